"""
Tests for jump rates, the fugacity machinery, marginal sampling and the
large-deviation objects.
"""
import csv
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from core.exceptions import DensityRangeError, DivergenceError, InvalidParameterError
from environment.ladder import environment_from_string
from measures.fugacity import (
    export_table_csv,
    flux,
    flux_derivative,
    get_fugacity_table,
    mean_density,
    partition_function,
)
from measures.jump_rates import (
    CONST1,
    JUMP_RATES,
    LINEAR,
    JumpRate,
    get_jump_rate,
    register_jump_rate,
    validate_jump_rate,
)
from measures.large_deviations import (
    curvature_gap,
    gamma_moment_threshold,
    lipschitz_constant,
    log_moment_generating,
    proposition4_check,
    rate_function,
)
from measures.sampling import (
    MarginalSampler,
    ProductMeasure,
    product_relative_entropy,
    sample_marginal,
    sample_product_configuration,
)

# 2 log(4/3) + log(2/3): Legendre transform of the geometric(1/2) log-MGF at 2
GEOMETRIC_J_AT_2 = 2 * math.log(4 / 3) + math.log(2 / 3)


# ============================================================================
# JUMP RATE TESTS
# ============================================================================

class JumpRateTest(SimpleTestCase):

    def test_registry(self):
        self.assertIs(get_jump_rate('const1'), CONST1)
        self.assertIs(get_jump_rate('linear'), LINEAR)
        self.assertIs(get_jump_rate(CONST1), CONST1)

    def test_unknown_name(self):
        with self.assertRaises(InvalidParameterError):
            get_jump_rate('quadratic')

    def test_values(self):
        np.testing.assert_array_equal(CONST1.values(3), [0, 1, 1, 1])
        np.testing.assert_array_equal(LINEAR.values(3), [0, 1, 2, 3])
        self.assertEqual(CONST1(0), 0.0)
        self.assertEqual(LINEAR(5), 5.0)

    def test_shipped_rates_validate(self):
        validate_jump_rate(CONST1)
        validate_jump_rate(LINEAR)

    def test_rate_with_nonzero_origin_rejected(self):
        bad = JumpRate(name='shifted', func=lambda k: np.asarray(k, dtype=float) + 1, slg=False, phi_star=1.0)
        with self.assertRaises(InvalidParameterError):
            validate_jump_rate(bad)

    def test_registry_rejects_invalid_rate(self):
        decreasing = JumpRate(name='decreasing', func=lambda k: np.where(np.asarray(k) == 1, 2.0, np.minimum(k, 1.0)),
                              slg=True, phi_star=1.0)
        with self.assertRaises(InvalidParameterError):
            register_jump_rate(decreasing)
        self.assertNotIn('decreasing', JUMP_RATES)
        self.assertEqual(sorted(JUMP_RATES), ['const1', 'linear'])

    def test_sublinear_growth(self):
        """
        PURPOSE: Verifica la condición de crecimiento sublineal: g(k)/k
        tiende a 0 para g = 1 y no para g(k) = k.
        """
        self.assertLessEqual(CONST1.growth_ratio(10**5, 10**6), 1e-5)
        self.assertEqual(LINEAR.growth_ratio(10**5, 10**6), 1.0)
        self.assertTrue(CONST1.slg)
        self.assertFalse(LINEAR.slg)


# ============================================================================
# FUGACITY TESTS
# ============================================================================

class PartitionFunctionTest(SimpleTestCase):

    def test_geometric_series(self):
        self.assertAlmostEqual(partition_function('const1', 0.5), 2.0, places=12)

    def test_exponential_series(self):
        self.assertAlmostEqual(partition_function('linear', 1.3), math.exp(1.3), places=12)

    def test_zero_fugacity(self):
        self.assertEqual(partition_function('const1', 0.0), 1.0)
        self.assertEqual(partition_function('linear', 0.0), 1.0)

    def test_divergence(self):
        with self.assertRaises(DivergenceError):
            partition_function('const1', 1.0)
        with self.assertRaises(DivergenceError):
            partition_function('const1', 1.5)

    def test_mean_density(self):
        self.assertAlmostEqual(mean_density('const1', 0.5), 1.0, places=12)
        self.assertAlmostEqual(mean_density('linear', 2.0), 2.0, places=12)
        self.assertEqual(mean_density('linear', 0.0), 0.0)

    @settings(max_examples=40, deadline=None)
    @given(
        a=st.floats(min_value=1e-3, max_value=0.95),
        b=st.floats(min_value=1e-3, max_value=0.95),
    )
    def test_mean_density_increasing(self, a, b):
        if abs(a - b) < 1e-6:
            return
        lo, hi = sorted((a, b))
        self.assertLess(mean_density('const1', lo), mean_density('const1', hi))
        self.assertLess(partition_function('linear', lo), partition_function('linear', hi))


class FluxTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.const1 = get_fugacity_table('const1')
        cls.linear = get_fugacity_table('linear')

    def test_closed_forms(self):
        self.assertAlmostEqual(flux(self.const1, 1.0), 0.5, places=10)
        self.assertAlmostEqual(flux(self.linear, 0.7), 0.7, places=10)
        self.assertEqual(flux(self.const1, 0.0), 0.0)

    def test_derivative_closed_forms(self):
        self.assertAlmostEqual(flux_derivative(self.const1, 1.0), 0.25, places=9)
        self.assertAlmostEqual(flux_derivative(self.linear, 3.0), 1.0, places=9)
        self.assertEqual(flux_derivative(self.const1, 0.0), 1.0)

    def test_round_trip(self):
        """
        PURPOSE: Verifica |R(Phi(rho)) - rho| <= 1e-10 en 200 densidades
        para las dos familias de g.
        """
        for table in (self.const1, self.linear):
            for rho in np.linspace(0.05, table.rho_max, 200):
                self.assertLessEqual(abs(mean_density(table.rate, flux(table, rho)) - rho), 1e-10)

    def test_derivative_matches_finite_difference(self):
        h = 1e-5
        for table in (self.const1, self.linear):
            for rho in (0.3, 1.0, 4.0, 20.0):
                fd = (flux(table, rho + h) - flux(table, rho - h)) / (2 * h)
                exact = flux_derivative(table, rho)
                self.assertLessEqual(abs(fd - exact), 1e-6 * exact)

    def test_out_of_range(self):
        with self.assertRaises(DensityRangeError):
            flux(self.const1, -0.1)
        with self.assertRaises(DensityRangeError):
            flux(self.const1, self.const1.rho_max + 1)
        with self.assertRaises(DensityRangeError):
            self.const1.flux_of_rho(np.array([1.0, 60.0]))

    def test_table_interpolation_close_to_direct_inversion(self):
        for table in (self.const1, self.linear):
            rhos = np.linspace(0.01, table.rho_max, 57)
            direct = np.array([flux(table, rho) for rho in rhos])
            np.testing.assert_allclose(table.flux_of_rho(rhos), direct, atol=1e-8)
            derivs = np.array([flux_derivative(table, rho) for rho in rhos])
            np.testing.assert_allclose(table.flux_deriv(rhos), derivs, atol=1e-6)

    def test_table_nodes_increasing(self):
        for table in (self.const1, self.linear):
            self.assertTrue(np.all(np.diff(table.phi_nodes) > 0))
            self.assertTrue(np.all(table.phi_nodes < table.phi_star))

    def test_table_accessors(self):
        self.assertAlmostEqual(self.const1.z_of_phi(0.5), 2.0, places=12)
        self.assertAlmostEqual(self.const1.r_of_phi(0.5), 1.0, places=12)
        # geometric law with mean 1 has variance 2
        self.assertAlmostEqual(self.const1.variance(0.5), 2.0, places=10)
        np.testing.assert_allclose(self.linear.variance(np.array([1.0, 2.0])), [1.0, 2.0], rtol=1e-12)

    def test_export_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = export_table_csv(self.const1, Path(tmp) / 'table.csv')
            with open(path, newline='') as fh:
                rows = list(csv.reader(fh))
        self.assertEqual(rows[0], ['phi', 'Z', 'R'])
        self.assertEqual(len(rows), len(self.const1.phi_nodes) + 1)
        phi, z, r = (float(v) for v in rows[-1])
        self.assertAlmostEqual(z, 1 / (1 - phi), places=6)
        self.assertAlmostEqual(r, self.const1.rho_max)


# ============================================================================
# SAMPLING TESTS
# ============================================================================

class SamplingTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.const1 = get_fugacity_table('const1')
        cls.linear = get_fugacity_table('linear')

    def test_geometric_marginal(self):
        """
        PURPOSE: Verifica que con g = 1 y rho = 1 la marginal es geométrica
        de parámetro 1/2 y que la media empírica está dentro de 4 desvíos.
        """
        sampler = MarginalSampler(self.const1, 1.0)
        np.testing.assert_allclose(sampler.pmf[:4], [0.5, 0.25, 0.125, 0.0625], atol=1e-12)
        draws = sampler.sample(np.random.default_rng(1), size=100_000)
        self.assertLess(abs(draws.mean() - 1.0), 4 * math.sqrt(2.0 / 100_000))

    def test_expected_jump_rate_is_flux(self):
        draws = sample_marginal(self.const1, 1.0, np.random.default_rng(2), size=100_000)
        rates = CONST1(draws)
        se = rates.std() / math.sqrt(len(draws))
        self.assertLess(abs(rates.mean() - flux(self.const1, 1.0)), 4 * se)

    def test_poisson_marginal(self):
        draws = sample_marginal(self.linear, 2.0, np.random.default_rng(3), size=100_000)
        self.assertLess(abs(draws.mean() - 2.0), 4 * math.sqrt(2.0 / 100_000))
        self.assertAlmostEqual(draws.var(), 2.0, delta=0.06)

    def test_zero_density(self):
        draws = sample_marginal(self.const1, 0.0, np.random.default_rng(4), size=1000)
        self.assertTrue(np.all(draws == 0))

    def test_sampler_expectation(self):
        sampler = MarginalSampler(self.linear, 1.5)
        self.assertAlmostEqual(sampler.mean(), 1.5, places=10)
        self.assertAlmostEqual(sampler.expectation(lambda k: k * (k - 1)), 1.5 ** 2, places=9)

    def test_constant_product_configuration(self):
        env = environment_from_string('1' * 10_000)
        config = sample_product_configuration(env, 1.0, self.const1, np.random.default_rng(5))
        self.assertEqual(config.n_vertices, 20_000)
        self.assertLess(abs(config.total / 20_000 - 1.0), 4 * math.sqrt(2.0 / 20_000))

    def test_profile_block_means(self):
        env = environment_from_string('1' * 2048)
        profile = lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x)  # noqa: E731
        measure = ProductMeasure(self.linear, np.repeat(profile(np.arange(2048) / 2048), 2))
        rng = np.random.default_rng(6)
        sums = sum(measure.sample(rng).site_totals() for _ in range(20))
        block_means = sums.reshape(16, 128).sum(axis=1) / (20 * 2 * 128)
        expected = profile(np.arange(2048) / 2048).reshape(16, 128).mean(axis=1)
        # Poisson block mean: variance expected / (20 * 256)
        se = np.sqrt(expected / (20 * 256))
        self.assertTrue(np.all(np.abs(block_means - expected) < 5 * se))
        self.assertEqual(env.n, 2048)

    def test_zero_profile_gives_empty_configuration(self):
        env = environment_from_string('1111')
        config = sample_product_configuration(env, lambda x: 0.0 * x, self.const1, np.random.default_rng(7))
        self.assertEqual(config.total, 0)

    def test_relative_entropy_matches_rate_function(self):
        """
        PURPOSE: KL(nu_lambda | nu_rho) coincide con J_rho(lambda); se
        comprueba la suma sobre vértices de dos medidas producto.
        """
        value = product_relative_entropy(self.const1, [1.0, 2.0, 2.0], [1.0, 1.0, 1.0])
        self.assertAlmostEqual(value, 2 * GEOMETRIC_J_AT_2, places=9)
        self.assertEqual(product_relative_entropy(self.const1, [1.0, 3.0], [1.0, 3.0]), 0.0)

    def test_relative_entropy_against_empty_reference(self):
        self.assertEqual(product_relative_entropy(self.const1, [1.0], [0.0]), math.inf)


# ============================================================================
# LARGE DEVIATION TESTS
# ============================================================================

class RateFunctionTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.const1 = get_fugacity_table('const1')
        cls.linear = get_fugacity_table('linear')

    def test_vanishes_at_mean(self):
        for rho in (0.5, 1.0, 3.0):
            self.assertEqual(rate_function(self.const1, rho, rho), 0.0)
            self.assertEqual(rate_function(self.linear, rho, rho, method='golden'), 0.0)

    def test_geometric_oracle(self):
        self.assertAlmostEqual(rate_function(self.const1, 1.0, 2.0), GEOMETRIC_J_AT_2, places=8)
        self.assertAlmostEqual(rate_function(self.const1, 1.0, 2.0, method='golden'), GEOMETRIC_J_AT_2, places=8)

    def test_poisson_closed_form(self):
        # Poisson(rho): J = lambda log(lambda / rho) - lambda + rho
        for lam in (0.3, 1.7, 6.0):
            expected = lam * math.log(lam / 2.0) - lam + 2.0
            self.assertAlmostEqual(rate_function(self.linear, 2.0, lam), expected, places=9)

    def test_methods_agree(self):
        for rho in (0.5, 1.5):
            for lam in (0.1, 0.9, 2.5, 10.0):
                newton = rate_function(self.const1, rho, lam)
                golden = rate_function(self.const1, rho, lam, method='golden')
                self.assertAlmostEqual(newton, golden, places=8)

    def test_value_at_zero(self):
        self.assertAlmostEqual(rate_function(self.const1, 1.0, 0.0), math.log(2.0), places=10)
        self.assertAlmostEqual(rate_function(self.const1, 1.0, 0.0, method='golden'), math.log(2.0), places=10)

    def test_convex_and_nonnegative(self):
        grid = np.linspace(0.0, 8.0, 33)
        values = np.array([rate_function(self.const1, 1.0, lam) for lam in grid])
        self.assertTrue(np.all(values >= 0))
        midpoints = np.array([rate_function(self.const1, 1.0, lam) for lam in (grid[:-2] + grid[2:]) / 2])
        self.assertTrue(np.all(midpoints <= (values[:-2] + values[2:]) / 2 + 1e-12))

    def test_out_of_range_is_infinite(self):
        self.assertEqual(rate_function(self.const1, 1.0, -1.0), math.inf)
        self.assertEqual(rate_function(self.const1, 1.0, self.const1.rho_max + 1), math.inf)

    def test_unknown_method(self):
        with self.assertRaises(InvalidParameterError):
            rate_function(self.const1, 1.0, 2.0, method='simplex')

    def test_log_moment_generating(self):
        self.assertEqual(log_moment_generating(self.const1, 1.0, 0.0), 0.0)
        self.assertEqual(log_moment_generating(self.const1, 1.0, math.log(2.0)), math.inf)
        self.assertAlmostEqual(
            log_moment_generating(self.linear, 2.0, 0.5), 2.0 * (math.exp(0.5) - 1.0), places=9,
        )


class CurvatureGapTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.const1 = get_fugacity_table('const1')
        cls.linear = get_fugacity_table('linear')

    def test_vanishes_on_diagonal(self):
        self.assertAlmostEqual(curvature_gap(self.const1, 1.5, 1.0, 1.0), 0.0, places=12)

    def test_linear_flux_has_no_gap(self):
        lams = np.linspace(0, 20, 41)
        np.testing.assert_allclose(curvature_gap(self.linear, 2.0, lams, 3.0), 0.0, atol=1e-9)

    def test_geometric_value(self):
        self.assertAlmostEqual(curvature_gap(self.const1, 1.0, 2.0, 1.0), -1 / 6, places=8)


class GammaBoundCheckTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.const1 = get_fugacity_table('const1')
        cls.linear = get_fugacity_table('linear')
        cls.lambdas = np.linspace(0.0, 50.0, 401)[1:]
        cls.rhos = np.linspace(0.5, 1.5, 11)

    def test_linear_certifies_every_gamma(self):
        for gamma in (1e-3, 1.0, 100.0):
            self.assertLess(proposition4_check(self.linear, 1.0, 5.0, gamma, self.rhos, self.lambdas), 0)

    def test_small_gamma_certifies_const1(self):
        """
        PURPOSE: Verifica que existe gamma > 0 para el que el máximo de
        gamma |F M| - J sobre la grilla es no positivo cuando g = 1.
        """
        value = proposition4_check(self.const1, 1.5, 10.0, 1e-3, self.rhos, self.lambdas)
        self.assertLessEqual(value, 0.0)

    def test_large_gamma_fails(self):
        self.assertGreater(proposition4_check(self.const1, 1.5, 10.0, 100.0, self.rhos, self.lambdas), 0.0)

    def test_limit_of_small_gamma(self):
        tiny = proposition4_check(self.const1, 1.5, 10.0, 1e-12, [1.0], self.lambdas)
        small = proposition4_check(self.const1, 1.5, 10.0, 1e-3, [1.0], self.lambdas)
        self.assertLess(tiny, 0.0)
        self.assertLessEqual(tiny, small)

    def test_gamma_must_be_positive(self):
        with self.assertRaises(InvalidParameterError):
            proposition4_check(self.const1, 1.5, 10.0, 0.0, self.rhos, self.lambdas)

    def test_moment_threshold(self):
        self.assertEqual(gamma_moment_threshold(self.linear, 1.0, 5.0, 1.5), math.inf)
        threshold = gamma_moment_threshold(self.const1, 1.5, 5.0, 1.5)
        c0 = lipschitz_constant(self.const1, self.const1.rho_max)
        self.assertAlmostEqual(c0, 1.0, places=6)
        self.assertAlmostEqual(threshold, math.log(1 / 0.6) / (8 * 1.5 * 5.0 * c0), places=6)
