"""
Large-deviation objects of the iid marginals: the log moment generating
function, the rate function J_rho, the Bregman gap M(lambda, rho) and the
grid check that gamma |F M| stays below J.
"""
import logging
import math

import numpy as np
from scipy import optimize

from core import constants
from core.exceptions import InvalidParameterError

from .fugacity import flux, log_partition_function, mean_density, upper_fugacity

logger = logging.getLogger(__name__)

RATE_METHODS = ('newton', 'golden')


def log_moment_generating(table, rho, theta):
    """
    log E_{nu_rho}[exp(theta omega)] = log Z(e^theta Phi(rho)) - log Z(Phi(rho));
    +inf once e^theta Phi(rho) reaches the radius of convergence.
    """
    phi = flux(table, rho)
    if phi == 0:
        return 0.0
    shifted = math.exp(theta) * phi
    if shifted >= table.phi_star:
        return math.inf
    return log_partition_function(table.rate, shifted) - log_partition_function(table.rate, phi)


def _rate_newton(table, rho, lam):
    # the supremum over theta sits where R(e^theta Phi(rho)) = lambda
    phi_rho = flux(table, rho)
    phi_lam = flux(table, lam)
    value = log_partition_function(table.rate, phi_rho) - log_partition_function(table.rate, phi_lam)
    if lam > 0:
        value += lam * math.log(phi_lam / phi_rho)
    return max(value, 0.0)


def _theta_bracket(table, phi_rho, lam):
    """theta interval whose tilted means straddle lambda."""
    lo = -1.0
    while mean_density(table.rate, math.exp(lo) * phi_rho) > lam:
        lo *= 2.0
    hi = math.log(upper_fugacity(table.rate, lam) / phi_rho)
    return lo, max(hi, lo + 1e-6)


def _rate_golden(table, rho, lam):
    phi_rho = flux(table, rho)
    if lam == 0:
        return log_partition_function(table.rate, phi_rho)
    lo, hi = _theta_bracket(table, phi_rho, lam)
    result = optimize.minimize_scalar(
        lambda theta: log_moment_generating(table, rho, theta) - theta * lam,
        bounds=(lo, hi),
        method='bounded',
        options={'xatol': 1e-10},
    )
    return max(-float(result.fun), 0.0)


def rate_function(table, rho, lam, method='newton'):
    """
    J_rho(lambda) = sup_theta [theta lambda - log E_{nu_rho} e^{theta omega}].
    Returns +inf for lambda < 0 or beyond the tabulated density range.
    """
    if method not in RATE_METHODS:
        raise InvalidParameterError(f"Unknown rate-function method {method!r}; choose one of {RATE_METHODS}")
    lam = float(lam)
    if lam < 0 or lam > table.rho_max:
        return math.inf
    if rho == 0:
        return 0.0 if lam == 0 else math.inf
    if lam == rho:
        return 0.0
    if method == 'newton':
        return _rate_newton(table, rho, lam)
    return _rate_golden(table, rho, lam)


def rate_function_grid(table, rho, lambdas):
    """Vectorised J_rho over a lambda grid, through the table interpolants."""
    lambdas = np.asarray(lambdas, dtype=float)
    phi_rho = table.flux_of_rho(rho)
    phi_lam = table.flux_of_rho(lambdas)
    values = table.log_z_of_rho(rho) - table.log_z_of_rho(lambdas)
    positive = lambdas > 0
    values[positive] += lambdas[positive] * np.log(phi_lam[positive] / phi_rho)
    return np.maximum(values, 0.0)


def curvature_gap(table, kappa, lam, rho):
    """M(lambda, rho) = 2 kappa {Phi(lambda) - Phi(rho) - (lambda - rho) Phi'(rho)}."""
    lam = np.asarray(lam, dtype=float)
    value = 2.0 * kappa * (
        table.flux_of_rho(lam) - table.flux_of_rho(rho) - (lam - rho) * table.flux_deriv(rho)
    )
    return float(value) if np.ndim(value) == 0 else value


def proposition4_check(table, kappa, F_bound, gamma, rho_range, lambda_grid):
    """
    max over the grid of gamma |F_bound M(lambda, rho)| - J_rho(lambda),
    skipping lambda = rho. A nonpositive value certifies the inequality on
    the grid.
    """
    if gamma <= 0:
        raise InvalidParameterError(constants.NON_POSITIVE_GAMMA.format(gamma=gamma))
    lambdas = np.asarray(lambda_grid, dtype=float)
    worst = -math.inf
    for rho in np.atleast_1d(np.asarray(rho_range, dtype=float)):
        keep = lambdas != rho
        lam = lambdas[keep]
        gap = np.abs(F_bound * curvature_gap(table, kappa, lam, rho))
        values = gamma * gap - rate_function_grid(table, rho, lam)
        worst = max(worst, float(np.max(values)))
    logger.debug("gamma grid max %.3e at gamma=%s", worst, gamma)
    return worst


def lipschitz_constant(table, upper):
    """max(sup Phi' on [0, upper], Phi(upper)), taken on a fine grid."""
    grid = np.linspace(0.0, upper, 2049)
    return float(max(np.max(table.flux_deriv(grid)), table.flux_of_rho(upper)))


def gamma_moment_threshold(table, kappa, F_bound, k2):
    """
    The gamma below which exp(p C_2 omega) stays integrable for some p > 1:
    log(phi*/Phi(K_2)) / (8 kappa ||F|| C_0), +inf when phi* is infinite.
    """
    if math.isinf(table.phi_star):
        return math.inf
    if F_bound == 0:
        return math.inf
    c0 = lipschitz_constant(table, table.rho_max)
    return math.log(table.phi_star / flux(table, k2)) / (8.0 * kappa * abs(F_bound) * c0)


