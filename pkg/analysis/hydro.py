"""
Macroscopic observables: the F and G fields built from a PDE solution,
block-averaged empirical density profiles and their comparison with the
PDE, cylinder functions and the test-function statistic of the
hydrodynamic limit.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from core import constants
from core.exceptions import InvalidParameterError, InvalidWindowError, ReportInputError, SingularityError
from measures.fugacity import flux
from measures.large_deviations import curvature_gap, lipschitz_constant
from measures.sampling import MarginalSampler

logger = logging.getLogger(__name__)

CYLINDER_TAIL = 1e-12
CYLINDER_TENSOR_LIMIT = 2 * 10**7
MAX_CYLINDER_SPAN = 3
_QUADRATURE_POINTS = 16


# ============================================================================
# F AND G
# ============================================================================

def f_field(profile, table, kappa):
    """F = kappa d_xx Phi(rho) / Phi(rho) on the PDE grid (central differences)."""
    phi = table.flux_of_rho(profile.values)
    if np.any(phi <= 0):
        raise SingularityError(constants.DENSITY_TOUCHES_ZERO)
    second = (np.roll(phi, -1) - 2.0 * phi + np.roll(phi, 1)) / profile.dx ** 2
    return kappa * second / phi


def _profile_at(pde_solution, t):
    if hasattr(pde_solution, 'values'):
        return pde_solution
    return min(pde_solution, key=lambda p: abs(p.time - t))


def eval_F(pde_solution, table, kappa, t, x):
    """
    F(t, x) read off the profile at time t (the closest one when given a
    path), periodically interpolated between grid points.
    """
    profile = _profile_at(pde_solution, t)
    values = f_field(profile, table, kappa)
    result = np.interp(np.mod(x, 1.0), profile.grid, values, period=1.0)
    return float(result) if np.ndim(result) == 0 else result


def sup_abs_F(path, table, kappa):
    return max(float(np.max(np.abs(f_field(p, table, kappa)))) for p in path)


def eval_G(table, kappa, gamma, F_value, rho_ref, lam):
    """G = 2 kappa gamma F {Phi(lambda) - Phi(rho) - (lambda - rho) Phi'(rho)}."""
    return gamma * F_value * curvature_gap(table, kappa, lam, rho_ref)


def g_bound_constants(table, kappa, gamma, F_bound, k2):
    """
    (C1, C2) with |G| <= C1 + C2 lambda whenever rho <= K2:
    C1 = 4 kappa gamma ||F|| (Phi(K2) + C0 K2), C2 = 8 kappa gamma ||F|| C0.
    """
    c0 = lipschitz_constant(table, table.rho_max)
    scale = kappa * gamma * abs(F_bound)
    return 4.0 * scale * (flux(table, k2) + c0 * k2), 8.0 * scale * c0


# ============================================================================
# EMPIRICAL PROFILES
# ============================================================================

def default_block_size(n):
    return max(4, n // 64)


@dataclass(frozen=True)
class EmpiricalProfile:
    """Per-vertex density on blocks of b sites, replica mean and standard error."""
    n: int
    block_size: int
    centres: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    replicas: int

    @property
    def width(self):
        return self.block_size / self.n


def empirical_profile(snapshots, block_size=None):
    if not snapshots:
        raise ReportInputError(constants.EMPTY_SNAPSHOTS)
    n = snapshots[0].n_sites
    b = default_block_size(n) if block_size is None else int(block_size)
    if b <= 0 or n % b:
        raise InvalidWindowError(constants.BLOCK_DOES_NOT_DIVIDE.format(b=b, n=n))

    blocks = np.array([s.site_totals().reshape(-1, b).sum(axis=1) / (2.0 * b) for s in snapshots])
    replicas = len(snapshots)
    stderr = blocks.std(axis=0, ddof=1) / math.sqrt(replicas) if replicas > 1 else np.zeros(n // b)
    return EmpiricalProfile(
        n=n,
        block_size=b,
        centres=(np.arange(n // b) + 0.5) * b / n,
        mean=blocks.mean(axis=0),
        stderr=stderr,
        replicas=replicas,
    )


def block_average(profile, n, block_size):
    """Average of a continuous profile (DensityProfile or callable) over each block."""
    width = block_size / n
    offsets = (np.arange(_QUADRATURE_POINTS) + 0.5) / _QUADRATURE_POINTS
    points = (np.arange(n // block_size)[:, None] + offsets[None, :]) * width
    evaluate = profile.at if hasattr(profile, 'at') else profile
    return np.asarray(evaluate(points), dtype=float).mean(axis=1)


@dataclass
class ComparisonReport:
    """
    l1_error = sum_k |empirical_k - pde_k| * width. pooled_se is the same
    sum over the standard errors, the scale of l1_error from sampling noise
    alone; half_width is its 95% normal band.
    """
    l1_error: float
    pooled_se: float
    half_width: float
    replicas: int
    blocks: list = field(default_factory=list)

    def to_dict(self):
        return {
            'l1_error': self.l1_error,
            'pooled_se': self.pooled_se,
            'half_width': self.half_width,
            'replicas': self.replicas,
            'blocks': self.blocks,
        }


def compare_profiles(empirical, pde_solution):
    reference = block_average(pde_solution, empirical.n, empirical.block_size)
    width = empirical.width
    pooled = float(np.sum(empirical.stderr) * width)
    report = ComparisonReport(
        l1_error=float(np.sum(np.abs(empirical.mean - reference)) * width),
        pooled_se=pooled,
        half_width=1.96 * pooled,
        replicas=empirical.replicas,
        blocks=[
            {'centre': c, 'empirical': m, 'stderr': s, 'pde': r}
            for c, m, s, r in zip(empirical.centres, empirical.mean, empirical.stderr, reference)
        ],
    )
    logger.info("L1 error %.5f (pooled SE %.5f) over %d replicas", report.l1_error, pooled, empirical.replicas)
    return report


# ============================================================================
# CYLINDER FUNCTIONS
# ============================================================================

@dataclass(frozen=True)
class CylinderFunction:
    """
    psi(omega) depending on the vertices ``offsets`` = ((site offset, row), ...)
    relative to a reference site. ``func`` maps an (..., len(offsets))
    integer array to values.
    """
    offsets: tuple
    func: Callable
    name: str = 'psi'

    def __post_init__(self):
        if not self.offsets or self.span > MAX_CYLINDER_SPAN:
            raise InvalidParameterError(
                constants.CYLINDER_TOO_WIDE.format(span=self.span if self.offsets else 0, n=MAX_CYLINDER_SPAN)
            )

    @property
    def span(self):
        sites = [s for s, _ in self.offsets]
        return max(sites) - min(sites) + 1

    def local_values(self, config):
        """(n_sites, len(offsets)) occupations seen from every site j."""
        n = config.n_sites
        j = np.arange(n)[:, None]
        shifts = np.array([s for s, _ in self.offsets])[None, :]
        rows = np.array([r for _, r in self.offsets])[None, :]
        return config.occupancy[2 * ((j + shifts) % n) + (rows == -1)]

    def evaluate_all(self, config):
        """psi(tau_j omega) for every site j."""
        if self.span > config.n_sites:
            raise InvalidParameterError(constants.CYLINDER_TOO_WIDE.format(span=self.span, n=config.n_sites))
        return np.asarray(self.func(self.local_values(config)), dtype=float)

    def expectation(self, table, rho):
        """E[psi] under the product law with density rho at every vertex, by truncated summation."""
        sampler = MarginalSampler(table, rho, exact=False)
        keep = int(np.searchsorted(sampler.cdf, 1.0 - CYLINDER_TAIL)) + 1
        pmf = sampler.pmf[:keep]
        size = len(pmf) ** len(self.offsets)
        if size > CYLINDER_TENSOR_LIMIT:
            raise InvalidParameterError(
                constants.CYLINDER_TENSOR_TOO_LARGE.format(vertices=len(self.offsets), size=size)
            )
        grid = np.array(list(product(range(len(pmf)), repeat=len(self.offsets))), dtype=np.int64)
        weights = np.prod(pmf[grid], axis=1)
        return float(np.asarray(self.func(grid), dtype=float) @ weights / weights.sum())


def density_cylinder():
    """omega_{0,1} + omega_{0,-1}."""
    return CylinderFunction(offsets=((0, 1), (0, -1)), func=lambda w: w.sum(axis=-1), name='density')


def jump_rate_cylinder(rate):
    """g(omega_{0,1})."""
    return CylinderFunction(offsets=((0, 1),), func=lambda w: rate(w[..., 0]), name=f'g_{rate.name}')


# ============================================================================
# TEST-FUNCTION STATISTIC
# ============================================================================

@dataclass(frozen=True)
class TestFunctionResult:
    values: np.ndarray
    mean: float
    stderr: float
    limit: float


def theorem1_statistic(snapshots, pde_solution, phi, psi, table):
    """
    |(1/N) sum_j phi(j/N) psi(tau_j omega) - int phi(x) E_{nu_rho(t,x)}[psi] dx|
    per replica; the integral uses the PDE grid (periodic rectangle rule).
    """
    if not snapshots:
        raise ReportInputError(constants.EMPTY_SNAPSHOTS)
    grid_rho = pde_solution.values
    unique, inverse = np.unique(grid_rho, return_inverse=True)
    expectations = np.array([psi.expectation(table, rho) for rho in unique])[inverse]
    limit = float(np.mean(np.asarray(phi(pde_solution.grid), dtype=float) * expectations))

    values = []
    for config in snapshots:
        weights = np.asarray(phi(np.arange(config.n_sites) / config.n_sites), dtype=float)
        values.append(abs(float(np.mean(weights * psi.evaluate_all(config))) - limit))
    values = np.array(values)
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return TestFunctionResult(values=values, mean=float(values.mean()), stderr=stderr, limit=limit)
