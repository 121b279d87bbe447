"""
The fugacity machinery of the stationary marginals.

For a jump rate g the one-vertex stationary law at fugacity phi puts
weight phi^k / g(k)! on k particles. Z(phi) is the normalising constant,
R(phi) the mean and Phi = R^{-1} the flux as a function of density.

Scalar entry points (partition_function, mean_density, flux,
flux_derivative) sum the series directly. FugacityTable tabulates Phi on a
density grid for the vectorised hot paths (PDE right-hand side, grids of
the large-deviation check).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicHermiteSpline
from scipy.special import logsumexp

from core import constants
from core.exceptions import DensityRangeError, DivergenceError, SolverError

from .jump_rates import JumpRate, get_jump_rate

logger = logging.getLogger(__name__)

DEFAULT_RHO_MAX = 50.0
TABLE_POINTS = 4096

_TAIL_TOLERANCE = 1e-17
_MAX_TERMS = 1 << 22
_CHUNK_ROWS = 256
_ROUND_TRIP_TOLERANCE = 1e-12


class SeriesMoments(NamedTuple):
    log_z: np.ndarray
    mean: np.ndarray
    var: np.ndarray


# ============================================================================
# SERIES
# ============================================================================

def _check_fugacity(rate, phis):
    bad = (phis < 0) | (phis >= rate.phi_star)
    if np.any(bad):
        phi = float(phis[np.flatnonzero(bad)[0]])
        raise DivergenceError(constants.FUGACITY_DIVERGES.format(phi=phi, phi_star=rate.phi_star))


def truncation_index(rate, phi):
    """
    Number of terms K after which the series tail is below 1e-17 of the
    partial sum. Term ratios phi/g(k+1) never increase for nondecreasing g,
    so the geometric bound on the tail holds.
    """
    if phi == 0:
        return 0
    log_phi = math.log(phi)
    k_max = 64
    while k_max <= _MAX_TERMS:
        logw = np.arange(k_max + 1) * log_phi - rate.log_factorials(k_max)
        ratio = phi / rate(k_max + 1)
        if ratio < 1.0:
            log_tail = logw[-1] + math.log(ratio) - math.log1p(-ratio)
            if log_tail - logsumexp(logw) < math.log(_TAIL_TOLERANCE):
                return k_max
        k_max *= 2
    raise DivergenceError(constants.FUGACITY_DIVERGES.format(phi=phi, phi_star=rate.phi_star))


def log_weights(rate, phi, k_max=None):
    """log(phi^k / g(k)!) for k = 0..K; K defaults to truncation_index."""
    if k_max is None:
        k_max = truncation_index(rate, phi)
    ks = np.arange(k_max + 1)
    if phi == 0:
        return np.where(ks == 0, 0.0, -np.inf)
    return ks * math.log(phi) - rate.log_factorials(k_max)


def series_moments(rate, phis):
    """
    log Z, mean and variance of the marginal at every fugacity in ``phis``.
    Rows are processed in sorted chunks, each truncated for its largest
    fugacity.
    """
    rate = get_jump_rate(rate)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    _check_fugacity(rate, phis)

    log_z = np.zeros_like(phis)
    mean = np.zeros_like(phis)
    var = np.zeros_like(phis)

    order = np.argsort(phis, kind='stable')
    positive = order[phis[order] > 0]
    for start in range(0, len(positive), _CHUNK_ROWS):
        idx = positive[start:start + _CHUNK_ROWS]
        sub = phis[idx]
        k_max = truncation_index(rate, float(sub.max()))
        ks = np.arange(k_max + 1, dtype=float)
        logw = np.log(sub)[:, None] * ks - rate.log_factorials(k_max)
        lz = logsumexp(logw, axis=1)
        probs = np.exp(logw - lz[:, None])
        m = probs @ ks
        log_z[idx] = lz
        mean[idx] = m
        var[idx] = np.sum(probs * (ks[None, :] - m[:, None]) ** 2, axis=1)
    return SeriesMoments(log_z=log_z, mean=mean, var=var)


def _scalar_moments(rate, phi):
    moments = series_moments(rate, [phi])
    return float(moments.log_z[0]), float(moments.mean[0]), float(moments.var[0])


def partition_function(g, phi):
    """Z(phi) = sum_k phi^k / g(k)!."""
    return math.exp(_scalar_moments(get_jump_rate(g), phi)[0])


def log_partition_function(g, phi):
    return _scalar_moments(get_jump_rate(g), phi)[0]


def mean_density(g, phi):
    """R(phi), the mean occupation at fugacity phi."""
    return _scalar_moments(get_jump_rate(g), phi)[1]


def fugacity_variance(g, phi):
    return _scalar_moments(get_jump_rate(g), phi)[2]


# ============================================================================
# INVERSION
# ============================================================================

def upper_fugacity(rate, rho):
    """A fugacity whose mean density is at least ``rho``."""
    if math.isinf(rate.phi_star):
        hi = max(1.0, rho)
        while mean_density(rate, hi) < rho:
            hi *= 2.0
        return hi
    for k in range(1, 60):
        hi = rate.phi_star * (1.0 - 2.0 ** -k)
        if mean_density(rate, hi) >= rho:
            return hi
    raise DensityRangeError(constants.DENSITY_OUT_OF_RANGE.format(rho=rho, rho_max='the reachable range'))


@lru_cache(maxsize=8192)
def _invert_density(rate, rho):
    """Solve R(phi) = rho: bisection to 1e-12, then Newton polish."""
    if rho == 0:
        return 0.0
    hi = upper_fugacity(rate, rho)
    phi = optimize.bisect(lambda p: mean_density(rate, p) - rho, 0.0, hi, xtol=1e-12, maxiter=200)
    logger.debug("bisection for rho=%s bracketed phi=%s in [0, %s]", rho, phi, hi)

    for _ in range(4):
        _, mean, var = _scalar_moments(rate, phi)
        residual = mean - rho
        if abs(residual) <= 1e-13 * max(1.0, rho):
            break
        phi = min(max(phi - residual * phi / var, 0.0), hi)
    return phi


def _check_density(rho, rho_max):
    values = np.atleast_1d(np.asarray(rho, dtype=float))
    bad = ~((values >= 0) & (values <= rho_max))
    if np.any(bad):
        raise DensityRangeError(
            constants.DENSITY_OUT_OF_RANGE.format(rho=float(values[np.flatnonzero(bad)[0]]), rho_max=rho_max)
        )


def flux(table, rho):
    """Phi(rho) by direct inversion of R, accurate to 1e-10 in R."""
    rho = float(rho)
    _check_density(rho, table.rho_max)
    return _invert_density(table.rate, rho)


def flux_derivative(table, rho):
    """Phi'(rho) = Phi(rho) / Var at fugacity Phi(rho); equals g(1) at rho = 0."""
    phi = flux(table, rho)
    if phi == 0:
        return table.rate(1)
    return phi / fugacity_variance(table.rate, phi)


# ============================================================================
# TABLE
# ============================================================================

def _solve_fugacities(rate, rhos):
    """Vectorised Newton with bisection safeguard, one root per density."""
    phis = np.zeros_like(rhos)
    mask = rhos > 0
    target = rhos[mask]
    if not target.size:
        return phis

    lo = np.zeros_like(target)
    hi = np.full_like(target, upper_fugacity(rate, float(target.max())))
    phi = 0.5 * hi
    for iteration in range(200):
        moments = series_moments(rate, phi)
        residual = moments.mean - target
        if np.all(np.abs(residual) <= _ROUND_TRIP_TOLERANCE * np.maximum(1.0, target)):
            logger.debug("table inversion converged after %d iterations", iteration)
            break
        lo = np.where(residual < 0, phi, lo)
        hi = np.where(residual > 0, phi, hi)
        newton = phi - residual * phi / moments.var
        inside = (newton > lo) & (newton < hi)
        phi = np.where(inside, newton, 0.5 * (lo + hi))
    else:
        raise SolverError(
            constants.NEWTON_DIVERGED.format(iterations=200),
            diagnostics={'max_residual': float(np.max(np.abs(residual)))},
        )
    phis[mask] = phi
    return phis


@dataclass(frozen=True, eq=False)
class FugacityTable:
    """
    Phi tabulated at densities rho_max * s^2 (denser near 0) with a cubic
    Hermite interpolant built on the exact node slopes Phi' = phi / Var.
    Immutable and shared between replicas.
    """
    rate: JumpRate
    rho_max: float
    rho_nodes: np.ndarray
    phi_nodes: np.ndarray
    log_z_nodes: np.ndarray
    var_nodes: np.ndarray
    _flux: CubicHermiteSpline = field(repr=False)
    _flux_prime: object = field(repr=False)
    _log_z: CubicHermiteSpline = field(repr=False)

    @property
    def g(self):
        return self.rate

    @property
    def phi_star(self):
        return self.rate.phi_star

    def z_of_phi(self, phi):
        return _shape_like(phi, np.exp(series_moments(self.rate, phi).log_z))

    def r_of_phi(self, phi):
        return _shape_like(phi, series_moments(self.rate, phi).mean)

    def variance(self, phi):
        return _shape_like(phi, series_moments(self.rate, phi).var)

    def flux_of_rho(self, rho):
        _check_density(rho, self.rho_max)
        return _shape_like(rho, self._flux(rho))

    def flux_deriv(self, rho):
        _check_density(rho, self.rho_max)
        return _shape_like(rho, self._flux_prime(rho))

    def log_z_of_rho(self, rho):
        """log Z(Phi(rho)), interpolated."""
        _check_density(rho, self.rho_max)
        return _shape_like(rho, self._log_z(rho))


def _shape_like(reference, values):
    values = np.asarray(values, dtype=float)
    if np.ndim(reference) == 0:
        return float(values.reshape(-1)[0])
    return values.reshape(np.shape(reference))


def build_fugacity_table(g, rho_max=DEFAULT_RHO_MAX, points=TABLE_POINTS):
    rate = get_jump_rate(g)
    rho_nodes = rho_max * np.linspace(0.0, 1.0, points) ** 2
    phi_nodes = _solve_fugacities(rate, rho_nodes)
    moments = series_moments(rate, phi_nodes)

    flux_slopes = np.empty_like(phi_nodes)
    log_z_slopes = np.empty_like(phi_nodes)
    # limits at rho = 0: Phi'(0) = g(1) and d log Z(Phi(rho)) / d rho = 1
    flux_slopes[0] = rate(1)
    log_z_slopes[0] = 1.0
    flux_slopes[1:] = phi_nodes[1:] / moments.var[1:]
    log_z_slopes[1:] = rho_nodes[1:] / moments.var[1:]

    flux_spline = CubicHermiteSpline(rho_nodes, phi_nodes, flux_slopes)
    table = FugacityTable(
        rate=rate,
        rho_max=float(rho_max),
        rho_nodes=rho_nodes,
        phi_nodes=phi_nodes,
        log_z_nodes=moments.log_z,
        var_nodes=moments.var,
        _flux=flux_spline,
        _flux_prime=flux_spline.derivative(),
        _log_z=CubicHermiteSpline(rho_nodes, moments.log_z, log_z_slopes),
    )
    logger.info("built fugacity table for g=%s on [0, %s] with %d nodes", rate.name, rho_max, points)
    return table


@lru_cache(maxsize=16)
def get_fugacity_table(g, rho_max=DEFAULT_RHO_MAX, points=TABLE_POINTS):
    """Cached build_fugacity_table; ``g`` is a name or JumpRate."""
    return build_fugacity_table(g, rho_max=rho_max, points=points)


def export_table_csv(table, path):
    """Write the table nodes as (phi, Z, R) rows."""
    from core.reports import write_csv

    rows = zip(table.phi_nodes, np.exp(table.log_z_nodes), table.rho_nodes)
    return write_csv(path, ('phi', 'Z', 'R'), rows)
