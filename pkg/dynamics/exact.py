"""
Exact generator of the process on tiny ladders.

With K particles on V = 2n vertices the state space is every composition
of K into V parts, C(K + V - 1, K) states. The generator is assembled as a
sparse matrix so stationarity, transient laws and Dirichlet forms can be
checked to machine precision.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import sparse, stats
from scipy.special import logsumexp, rel_entr

from core import constants
from core.exceptions import DomainError, InvalidParameterError, NormalizationError, StateSpaceError
from environment.ladder import build_edges
from measures.jump_rates import get_jump_rate

logger = logging.getLogger(__name__)

DEFAULT_STATE_LIMIT = 10**6
_NORMALIZATION_TOLERANCE = 1e-9
_POISSON_TAIL = 1e-15


def state_count(vertex_count, k):
    return math.comb(k + vertex_count - 1, k)


def enumerate_states(vertex_count, k):
    """All occupancy vectors with total k, one per row, in stars-and-bars order."""
    if k == 0:
        return np.zeros((1, vertex_count), dtype=np.int64)
    bars = np.array(list(combinations(range(k + vertex_count - 1), vertex_count - 1)), dtype=np.int64)
    bars = bars.reshape(-1, vertex_count - 1)
    padded = np.hstack((
        np.full((len(bars), 1), -1, dtype=np.int64),
        bars,
        np.full((len(bars), 1), k + vertex_count - 1, dtype=np.int64),
    ))
    return np.diff(padded, axis=1) - 1


class _StateIndex:
    """Row lookup for occupancy vectors, by base-(K+1) code when it fits in int64."""

    def __init__(self, states, k):
        self._base = k + 1
        vertex_count = states.shape[1]
        self._coded = vertex_count * math.log2(self._base) < 62
        if self._coded:
            self._powers = self._base ** np.arange(vertex_count, dtype=np.int64)
            codes = states @ self._powers
            self._order = np.argsort(codes)
            self._sorted = codes[self._order]
        else:
            self._lookup = {row.tobytes(): i for i, row in enumerate(states)}

    def __call__(self, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        if self._coded:
            codes = rows @ self._powers
            pos = np.searchsorted(self._sorted, codes)
            return self._order[pos]
        return np.array([self._lookup[row.tobytes()] for row in rows], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ExactModel:
    """
    ``generator[s, s']`` is the rate of the move s -> s'. ``transitions``
    keeps the off-diagonal entries one per (state, edge with occupied
    source) before duplicates are merged.
    """
    env: object
    rate: object
    k: int
    states: np.ndarray
    generator: sparse.csr_matrix
    transitions: tuple
    index: _StateIndex

    @property
    def n_states(self):
        return len(self.states)

    def exit_rates(self):
        return -self.generator.diagonal()

    def state_of(self, occupancy):
        return int(self.index(occupancy)[0])

    def point_mass(self, occupancy):
        mu = np.zeros(self.n_states)
        mu[self.state_of(occupancy)] = 1.0
        return mu


def build_exact_model(env, g, k, limit=DEFAULT_STATE_LIMIT, reverse=False):
    if k < 0:
        raise InvalidParameterError(f'Particle count must be nonnegative, got {k}')
    count = state_count(env.vertex_count, k)
    if count > limit:
        raise StateSpaceError(constants.STATE_SPACE_TOO_LARGE.format(count=count, limit=limit))

    rate = get_jump_rate(g)
    edges = build_edges(env, reverse=reverse)
    states = enumerate_states(env.vertex_count, k)
    index = _StateIndex(states, k)
    g_values = rate.values(max(k, 1))

    rows, cols, data = [], [], []
    for source, target in zip(edges.sources, edges.targets):
        occupied = np.flatnonzero(states[:, source] > 0)
        if not occupied.size:
            continue
        moved = states[occupied].copy()
        moved[:, source] -= 1
        moved[:, target] += 1
        rows.append(occupied)
        cols.append(index(moved))
        data.append(g_values[states[occupied, source]])

    n = len(states)
    if rows:
        rows, cols, data = np.concatenate(rows), np.concatenate(cols), np.concatenate(data)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    off_diagonal = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    exit_rates = np.asarray(off_diagonal.sum(axis=1)).ravel()
    generator = (off_diagonal - sparse.diags(exit_rates)).tocsr()

    logger.info("exact model: n=%d K=%d g=%s with %d states and %d transitions",
                env.n, k, rate.name, n, len(data))
    return ExactModel(
        env=env,
        rate=rate,
        k=k,
        states=states,
        generator=generator,
        transitions=(rows, cols, data),
        index=index,
    )


# ============================================================================
# MEASURES ON THE STATE SPACE
# ============================================================================

def canonical_measure(model):
    """pi(s) proportional to prod_x 1 / g(s_x)!, the product law conditioned on K."""
    log_fact = model.rate.log_factorials(max(model.k, 1))
    log_w = -log_fact[model.states].sum(axis=1)
    return np.exp(log_w - logsumexp(log_w))


def _check_distribution(pi):
    pi = np.asarray(pi, dtype=float)
    total = float(pi.sum())
    if abs(total - 1.0) > _NORMALIZATION_TOLERANCE or np.any(pi < 0):
        raise NormalizationError(constants.NOT_NORMALIZED.format(total=total))
    return pi


def stationarity_residual(model, pi):
    """||pi^T Q||_inf."""
    pi = _check_distribution(pi)
    return float(np.max(np.abs(model.generator.T @ pi)))


def transient_distribution(model, mu0, t):
    """
    mu0 e^{Qt} by uniformization: with L the largest exit rate and
    P = I + Q/L, mu_t = sum_k Poisson(k; L t) mu0 P^k.
    """
    mu0 = _check_distribution(mu0)
    if t < 0:
        raise InvalidParameterError(constants.NEGATIVE_HORIZON.format(t=t))
    uniform_rate = float(np.max(model.exit_rates(), initial=0.0))
    if t == 0 or uniform_rate == 0:
        return mu0.copy()

    lt = uniform_rate * t
    k_max = int(stats.poisson.isf(_POISSON_TAIL, lt)) + 1
    weights = stats.poisson.pmf(np.arange(k_max + 1), lt)
    kernel_t = (sparse.identity(model.n_states, format='csr') + model.generator / uniform_rate).T.tocsr()

    term = mu0.copy()
    result = weights[0] * term
    for weight in weights[1:]:
        term = kernel_t @ term
        result += weight * term
    logger.debug("uniformization at L t=%.4g used %d terms", lt, k_max + 1)
    return result / result.sum()


def relative_entropy(mu, pi):
    """H(mu | pi) = sum mu log(mu / pi); +inf when mu charges a pi-null state."""
    mu = np.asarray(mu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.any((mu > 0) & (pi == 0)):
        return float('inf')
    return float(np.sum(rel_entr(mu, pi)))


def dirichlet_form(model, h, pi=None):
    """
    D(h) = 1/2 sum_s pi(s) sum_{(x,y)} g(s_x) (sqrt h(s^{x,y}) - sqrt h(s))^2,
    pi the canonical measure unless given.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise DomainError(constants.NEGATIVE_FUNCTION)
    pi = canonical_measure(model) if pi is None else np.asarray(pi, dtype=float)
    rows, cols, rates = model.transitions
    root = np.sqrt(h)
    return 0.5 * float(np.sum(pi[rows] * rates * (root[cols] - root[rows]) ** 2))


def empirical_state_distribution(model, configurations):
    """Histogram of configurations (Configuration or occupancy arrays) over model states."""
    rows = np.array([getattr(c, 'occupancy', c) for c in configurations], dtype=np.int64)
    counts = np.bincount(model.index(rows), minlength=model.n_states)
    return counts / counts.sum()


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))
