"""
Sampling from the stationary marginals and from product measures built
on them, plus relative entropies between product measures.
"""
import logging

import numpy as np
from scipy.special import logsumexp, rel_entr

from dynamics.configuration import Configuration
from environment.tiles import site_profile

from .fugacity import flux, log_weights, truncation_index

logger = logging.getLogger(__name__)


def _pmf(rate, phi, k_max=None):
    logw = log_weights(rate, phi, k_max)
    return np.exp(logw - logsumexp(logw))


class MarginalSampler:
    """
    The one-vertex law nu_rho, sampled by inverse CDF over the normalised
    weights Phi(rho)^k / g(k)!.
    """

    def __init__(self, table, rho, exact=True):
        self.table = table
        self.rho = float(rho)
        self.phi = flux(table, rho) if exact else table.flux_of_rho(self.rho)
        self.pmf = _pmf(table.rate, self.phi)
        self.cdf = np.cumsum(self.pmf)
        self.cdf[-1] = 1.0

    def sample(self, rng, size=None):
        return np.searchsorted(self.cdf, rng.random(size), side='right').astype(np.int64)

    def mean(self):
        return float(np.arange(len(self.pmf)) @ self.pmf)

    def expectation(self, func):
        """E[func(k)] for a vectorised func."""
        return float(np.asarray(func(np.arange(len(self.pmf))), dtype=float) @ self.pmf)


def vertex_densities(env, profile):
    """
    Per-vertex densities from a profile: a callable of the macroscopic
    position j/N (both rows of site j share it), a per-site array, or a
    per-vertex array.
    """
    if callable(profile):
        return site_profile(env.n, profile)
    values = np.asarray(profile, dtype=float)
    if np.ndim(values) == 0:
        return np.full(env.vertex_count, float(values))
    if len(values) == env.n:
        return np.repeat(values, 2)
    return values.copy()


class ProductMeasure:
    """
    Independent marginals, one density per vertex. Samplers are built once
    per distinct density so replicas only pay for the draws.
    """

    def __init__(self, table, densities):
        densities = np.asarray(densities, dtype=float)
        table.flux_of_rho(densities)  # range check
        self.table = table
        self.densities = densities
        values, groups = np.unique(densities, return_inverse=True)
        order = np.argsort(groups, kind='stable')
        counts = np.bincount(groups, minlength=len(values))
        self._indices = np.split(order, np.cumsum(counts)[:-1])
        self._samplers = [MarginalSampler(table, rho, exact=False) for rho in values]
        logger.debug("product measure over %d vertices with %d distinct densities", len(densities), len(values))

    def sample(self, rng):
        u = rng.random(len(self.densities))
        occupancy = np.empty(len(self.densities), dtype=np.int64)
        for sampler, idx in zip(self._samplers, self._indices):
            occupancy[idx] = np.searchsorted(sampler.cdf, u[idx], side='right')
        return Configuration(occupancy)


def sample_marginal(table, rho, rng, size=None):
    return MarginalSampler(table, rho).sample(rng, size)


def sample_product_configuration(env, profile, table, rng):
    """
    One draw from the product measure with the given profile. A constant
    profile gives nu^N, a profile of j/N gives the usual local equilibrium,
    and a tile-resolved per-vertex array gives the second-order one.
    """
    return ProductMeasure(table, vertex_densities(env, profile)).sample(rng)


def product_relative_entropy(table, rho_a, rho_b):
    """sum_x KL(nu_{rho_a(x)} | nu_{rho_b(x)}) between two product measures."""
    rho_a = np.atleast_1d(np.asarray(rho_a, dtype=float))
    rho_b = np.atleast_1d(np.asarray(rho_b, dtype=float))
    pairs, counts = np.unique(np.column_stack((rho_a, rho_b)), axis=0, return_counts=True)

    total = 0.0
    rate = table.rate
    for (a, b), count in zip(pairs, counts):
        if a == b:
            continue
        phi_a, phi_b = flux(table, a), flux(table, b)
        k_max = max(truncation_index(rate, phi_a), truncation_index(rate, phi_b))
        total += count * float(np.sum(rel_entr(_pmf(rate, phi_a, k_max), _pmf(rate, phi_b, k_max))))
    return total
