"""
The randomly oriented ladder graph on T_N x {-1, 1}.

Between consecutive sites j and j+1 sits one of three figures, each an
orientation of the four horizontal/diagonal edges. Vertices are stored
flat as ``2 * site + (row == -1)`` so the simulator can index arrays
directly.
"""
import enum
import hashlib
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from core import constants
from core.exceptions import (
    EnvironmentValidationError,
    InvalidParameterError,
    InvalidSizeError,
)

logger = logging.getLogger(__name__)


class FigureType(enum.IntEnum):
    F1 = 1
    F2 = 2
    F3 = 3

    @property
    def char(self):
        return str(int(self))


class VertexId(NamedTuple):
    site: int
    row: int

    @property
    def index(self):
        return vertex_index(self.site, self.row)

    @classmethod
    def from_index(cls, index):
        return cls(index // 2, 1 if index % 2 == 0 else -1)


def vertex_index(site, row):
    return 2 * site + (0 if row == 1 else 1)


@dataclass(frozen=True)
class Environment:
    """
    A quenched environment: figures[j] is the figure between site j and
    site j+1 (mod n). Immutable, so it can be shared between replicas.
    """
    n: int
    figures: tuple
    seed: int = 0
    pair_prob: float = float('nan')

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSizeError(constants.SITE_COUNT_TOO_SMALL.format(n=self.n))
        if len(self.figures) != self.n:
            raise InvalidSizeError(
                f'Expected {self.n} figures, got {len(self.figures)}'
            )

    @property
    def vertex_count(self):
        return 2 * self.n

    def to_string(self):
        return ''.join(FigureType(f).char for f in self.figures)

    def figure_array(self):
        return np.asarray(self.figures, dtype=np.int8)

    def __str__(self):
        text = self.to_string()
        if len(text) > 40:
            text = text[:37] + '...'
        return f"Environment(n={self.n}, figures={text})"


@dataclass(frozen=True)
class Violation:
    kind: str
    location: int
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def is_valid(self):
        return not self.violations

    def kinds(self):
        return {v.kind for v in self.violations}

    def messages(self):
        return [v.message for v in self.violations]

    def __bool__(self):
        # Truthy when something is wrong, like a non-empty list.
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)


@dataclass(frozen=True)
class OrientedEdgeSet:
    """
    Flat edge arrays. ``out_adjacency[v]`` holds the two targets of vertex v.
    """
    sources: np.ndarray
    targets: np.ndarray
    out_adjacency: np.ndarray

    def __len__(self):
        return len(self.sources)

    @property
    def edges(self):
        return [
            (VertexId.from_index(int(s)), VertexId.from_index(int(t)))
            for s, t in zip(self.sources, self.targets)
        ]

    def in_degrees(self, vertex_count):
        return np.bincount(self.targets, minlength=vertex_count)

    def out_degrees(self, vertex_count):
        return np.bincount(self.sources, minlength=vertex_count)

    def reversed(self):
        return _edge_set(self.targets.copy(), self.sources.copy(), len(self.out_adjacency))


# ============================================================================
# CONSTRUCTION
# ============================================================================

def environment_from_string(text, seed=0, pair_prob=float('nan')):
    text = text.strip()
    figures = []
    for pos, char in enumerate(text):
        if char not in '123':
            raise EnvironmentValidationError(
                constants.UNKNOWN_FIGURE_CHARACTER.format(char=char, pos=pos)
            )
        figures.append(FigureType(int(char)))
    return Environment(n=len(figures), figures=tuple(figures), seed=seed, pair_prob=pair_prob)


def generate_environment(n, p, seed):
    """
    Walk the cycle making one Bernoulli(p) decision per block: a pair
    "23" or a single "1". A pair drawn with fewer than two free slots left
    becomes a "1", so the sequence never ends inside a pair.
    """
    if n < 2:
        raise InvalidSizeError(constants.SITE_COUNT_TOO_SMALL.format(n=n))
    if not 0.0 <= p < 1.0:
        raise InvalidParameterError(constants.PAIR_PROBABILITY_OUT_OF_RANGE.format(p=p))

    rng = np.random.default_rng(seed)
    figures = []
    pos = 0
    while pos < n:
        wants_pair = rng.random() < p
        if wants_pair and n - pos >= 2:
            figures.extend((FigureType.F2, FigureType.F3))
            pos += 2
        else:
            figures.append(FigureType.F1)
            pos += 1

    env = Environment(n=n, figures=tuple(figures), seed=seed, pair_prob=p)
    logger.debug("generated environment n=%d p=%s seed=%d", n, p, seed)
    return env


def shift_environment(env, s):
    """Relabel sites cyclically: new site j is old site j + s."""
    s %= env.n
    figures = env.figures[s:] + env.figures[:s]
    return Environment(n=env.n, figures=figures, seed=env.seed, pair_prob=env.pair_prob)


def environment_digest(env):
    return hashlib.sha256(env.to_string().encode('ascii')).hexdigest()


def block_census(env):
    """
    Count decision blocks of the generation automaton: every "1" and every
    "23" pair is one block. Returns (blocks, pairs).
    """
    pairs = sum(1 for f in env.figures if f == FigureType.F2)
    singles = sum(1 for f in env.figures if f == FigureType.F1)
    return singles + pairs, pairs


# ============================================================================
# EDGES
# ============================================================================

def _figure_edges(figure, j, n):
    right = (j + 1) % n
    up_l, down_l = vertex_index(j, 1), vertex_index(j, -1)
    up_r, down_r = vertex_index(right, 1), vertex_index(right, -1)
    if figure == FigureType.F1:
        return ((up_l, up_r), (down_l, down_r), (up_r, down_l), (down_r, up_l))
    if figure == FigureType.F2:
        return ((up_l, up_r), (down_l, up_r), (down_r, up_l), (down_r, down_l))
    return ((up_l, up_r), (up_l, down_r), (up_r, down_l), (down_r, down_l))


def _edge_set(sources, targets, vertex_count):
    # valid environments give every vertex exactly two out-edges
    order = np.argsort(sources, kind='stable')
    adjacency = targets[order].reshape(vertex_count, 2)
    return OrientedEdgeSet(sources=sources, targets=targets, out_adjacency=adjacency)


def _raw_edges(env):
    pairs = [edge for j, f in enumerate(env.figures) for edge in _figure_edges(f, j, env.n)]
    sources = np.fromiter((s for s, _ in pairs), dtype=np.int64, count=len(pairs))
    targets = np.fromiter((t for _, t in pairs), dtype=np.int64, count=len(pairs))
    return sources, targets


def build_edges(env, reverse=False):
    """
    Read the oriented edges off the per-figure terms of the generator.
    With ``reverse`` every edge is flipped (the time-reversed dynamics).
    """
    require_valid(env)
    sources, targets = _raw_edges(env)
    if reverse:
        sources, targets = targets, sources
    return _edge_set(sources, targets, env.vertex_count)


# ============================================================================
# VALIDATION
# ============================================================================

def validate_environment(env):
    """Collect every violated invariant; an empty report means valid."""
    report = ValidationReport()
    figures = env.figures
    n = env.n

    for j, f in enumerate(figures):
        nxt = figures[(j + 1) % n]
        prev = figures[(j - 1) % n]
        if f == FigureType.F2 and nxt != FigureType.F3:
            report.violations.append(Violation('grammar', j, constants.F2_NOT_FOLLOWED_BY_F3))
        if f == FigureType.F3 and prev != FigureType.F2:
            report.violations.append(Violation('grammar', j, constants.F3_NOT_PRECEDED_BY_F2))

    f2 = sum(1 for f in figures if f == FigureType.F2)
    f3 = sum(1 for f in figures if f == FigureType.F3)
    if f2 != f3:
        report.violations.append(
            Violation('count', -1, constants.FIGURE_COUNT_MISMATCH.format(f2=f2, f3=f3))
        )

    sources, targets = _raw_edges(env)
    indeg = np.bincount(targets, minlength=env.vertex_count)
    outdeg = np.bincount(sources, minlength=env.vertex_count)
    for v in np.flatnonzero((indeg != 2) | (outdeg != 2)):
        report.violations.append(Violation(
            'degree', int(v),
            constants.DEGREE_VIOLATION.format(
                vertex=tuple(VertexId.from_index(int(v))), indeg=int(indeg[v]), outdeg=int(outdeg[v]),
            ),
        ))

    sites = np.arange(n)[:, None]
    rightward = np.sum(sources.reshape(n, 4) // 2 == sites, axis=1)
    leftward = np.sum(targets.reshape(n, 4) // 2 == sites, axis=1)
    for j in np.flatnonzero((rightward != 2) | (leftward != 2)):
        report.violations.append(Violation(
            'cut', int(j),
            constants.CUT_VIOLATION.format(site=int(j), right=int(rightward[j]), left=int(leftward[j])),
        ))
    return report


def require_valid(env):
    report = validate_environment(env)
    if report:
        raise EnvironmentValidationError(
            constants.ENVIRONMENT_INVALID.format(count=len(report), first=report.messages()[0]),
            report=report,
        )
    return env
