"""
Tile decomposition of the ladder graph.

Each tile has one centre pair (x, 1), (x, -1) plus at most one vertex of
each neighbouring site. Whether a site is a centre, and which neighbours
join its tile, depends only on the figures to its left and right.
"""
import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from core import constants
from core.exceptions import EnvironmentValidationError, InvalidWindowError

from .ladder import FigureType, VertexId, require_valid

logger = logging.getLogger(__name__)

F1, F2, F3 = FigureType.F1, FigureType.F2, FigureType.F3

# (left figure, right figure) -> (takes (x-1,-1), takes (x+1,1)); None marks a non-centre
_CASES = {
    (F1, F1): (False, False),
    (F1, F2): (False, True),
    (F2, F3): None,
    (F3, F1): (True, False),
    (F3, F2): (True, True),
}


@dataclass(frozen=True)
class Tile:
    index: int
    centre_site: int
    vertices: frozenset

    @property
    def size(self):
        return len(self.vertices)


@dataclass(frozen=True)
class TileDecomposition:
    """
    Tiles ordered by centre site. ``centre_of[x]`` is the tile index centred
    at site x or None; ``tile_of[v]`` is the tile of flat vertex index v.
    """
    n: int
    tiles: tuple
    centre_of: tuple
    tile_of: np.ndarray
    sizes: np.ndarray
    centre_sites: np.ndarray

    @property
    def t_n(self):
        return len(self.tiles)

    @property
    def kappa_n(self):
        return self.n / self.t_n

    def tile_of_vertex(self, vertex):
        return int(self.tile_of[VertexId(*vertex).index])

    def centre_vertex_indices(self):
        """Flat indices of (x_j, 1) and (x_j, -1) for every tile j."""
        return 2 * self.centre_sites, 2 * self.centre_sites + 1


def decompose_tiles(env):
    require_valid(env)
    n = env.n
    figures = env.figures
    tiles = []
    centre_of = [None] * n
    tile_of = np.full(2 * n, -1, dtype=np.int64)

    for x in range(n):
        case = _CASES.get((figures[(x - 1) % n], figures[x]))
        if case is None:
            if (figures[(x - 1) % n], figures[x]) != (F2, F3):
                raise EnvironmentValidationError(
                    f'Impossible figure pair around site {x}'
                )
            continue
        takes_left, takes_right = case
        members = [VertexId(x, 1), VertexId(x, -1)]
        if takes_left:
            members.append(VertexId((x - 1) % n, -1))
        if takes_right:
            members.append(VertexId((x + 1) % n, 1))
        index = len(tiles)
        tiles.append(Tile(index=index, centre_site=x, vertices=frozenset(members)))
        centre_of[x] = index
        for v in members:
            tile_of[v.index] = index

    if np.any(tile_of < 0):
        missing = [tuple(VertexId.from_index(int(v))) for v in np.flatnonzero(tile_of < 0)]
        raise EnvironmentValidationError(f'Vertices left outside every tile: {missing[:5]}')

    decomp = TileDecomposition(
        n=n,
        tiles=tuple(tiles),
        centre_of=tuple(centre_of),
        tile_of=tile_of,
        sizes=np.array([t.size for t in tiles], dtype=np.int64),
        centre_sites=np.array([t.centre_site for t in tiles], dtype=np.int64),
    )
    logger.debug("decomposed n=%d into T_N=%d tiles (kappa_N=%.6f)", n, decomp.t_n, decomp.kappa_n)
    return decomp


def cyclic_window_sum(values, l):
    """Sum of values[k] over |k - j| <= l, cyclically, for every j."""
    values = np.asarray(values)
    t = len(values)
    if 2 * l + 1 > t:
        raise InvalidWindowError(constants.WINDOW_TOO_LARGE.format(width=2 * l + 1, tiles=t))
    padded = np.concatenate((values[t - l:], values, values[:l])) if l else values
    csum = np.concatenate(([0], np.cumsum(padded)))
    return csum[2 * l + 1:] - csum[:t]


def shape_census(decomp, l):
    """
    Count tiles j by the number of vertices m in the 2l+1 tiles around j.
    Every m in [4l+2, 8l+4] appears as a key.
    """
    if isinstance(l, bool) or not isinstance(l, (int, np.integer)) or l < 1:
        raise InvalidWindowError(constants.HALF_WINDOW_INVALID.format(l=l))
    width = 2 * l + 1
    if decomp.t_n <= width:
        raise InvalidWindowError(constants.WINDOW_TOO_LARGE.format(width=width, tiles=decomp.t_n))
    masses = cyclic_window_sum(decomp.sizes, l)
    counts = Counter(int(m) for m in masses)
    return {m: counts.get(m, 0) for m in range(4 * l + 2, 8 * l + 5)}


def census_proportions(census):
    total = sum(census.values())
    return {m: c / total for m, c in census.items()}


def tile_profile(decomp, profile):
    """
    Per-vertex densities of the second-order local equilibrium: every
    vertex of tile j gets ``profile(j / T_N)``.
    """
    positions = np.arange(decomp.t_n) / decomp.t_n
    per_tile = np.asarray(profile(positions), dtype=float)
    return per_tile[decomp.tile_of]


def site_profile(n, profile):
    """Per-vertex densities of the usual local equilibrium: both rows of site j get profile(j/N)."""
    per_site = np.asarray(profile(np.arange(n) / n), dtype=float)
    return np.repeat(per_site, 2)
