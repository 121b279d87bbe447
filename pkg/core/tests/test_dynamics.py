"""
Tests for configurations, the Fenwick tree, the Gillespie engine, replica
seeding and the exact-generator toolkit.
"""
import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from core.exceptions import (
    ConservationError,
    DomainError,
    InvalidParameterError,
    InvalidSizeError,
    NormalizationError,
    ReportInputError,
    StateSpaceError,
)
from dynamics.configuration import Configuration, SimClock
from dynamics.exact import (
    build_exact_model,
    canonical_measure,
    dirichlet_form,
    empirical_state_distribution,
    enumerate_states,
    relative_entropy,
    stationarity_residual,
    total_variation,
    transient_distribution,
)
from dynamics.fenwick import FenwickTree
from dynamics.gillespie import (
    SnapshotRecorder,
    ZeroRangeSimulator,
    gillespie_step,
    replica_rng,
    run_replicas,
    simulate,
)
from dynamics.storage import read_snapshot, read_snapshot_dir, snapshot_path, write_snapshot
from environment.ladder import build_edges, environment_from_string, vertex_index
from measures.fugacity import get_fugacity_table
from measures.jump_rates import CONST1, LINEAR
from measures.sampling import ProductMeasure, sample_product_configuration, vertex_densities

ENV_MATRIX = ('11', '111', '1111', '123', '2323')


def draw_task(index, rng):
    return index, float(rng.random())


def short_run_task(index, rng):
    env = environment_from_string('123123')
    config = Configuration(np.full(12, 2))
    result = simulate(config, env, LINEAR, 0.05, rng)
    return result.event_count, result.config.occupancy.tolist()


# ============================================================================
# CONFIGURATION TESTS
# ============================================================================

class ConfigurationTest(SimpleTestCase):

    def test_total_tracks_moves(self):
        config = Configuration([1, 0, 2, 0])
        config.move(2, 1)
        np.testing.assert_array_equal(config.occupancy, [1, 1, 1, 0])
        self.assertEqual(config.total, 3)
        self.assertEqual(config.check_total(), 3)

    def test_site_totals_and_shift(self):
        config = Configuration([1, 2, 3, 4, 5, 6])
        np.testing.assert_array_equal(config.site_totals(), [3, 7, 11])
        np.testing.assert_array_equal(config.shifted(1).occupancy, [3, 4, 5, 6, 1, 2])

    def test_invalid_arrays(self):
        with self.assertRaises(InvalidSizeError):
            Configuration([1, 2, 3])
        with self.assertRaises(DomainError):
            Configuration([1, -1])

    def test_conservation_error(self):
        config = Configuration([1, 1])
        config.occupancy[0] = 5
        with self.assertRaises(ConservationError):
            config.check_total()

    def test_require_size(self):
        env = environment_from_string('111')
        Configuration.empty(3).require_size(env)
        with self.assertRaises(InvalidSizeError):
            Configuration.empty(4).require_size(env)

    def test_clock_scaling(self):
        clock = SimClock(n=10, micro_time=50.0)
        self.assertEqual(clock.macro_time, 0.5)
        self.assertEqual(clock.micro_horizon(0.02), 2.0)


# ============================================================================
# FENWICK TREE TESTS
# ============================================================================

class FenwickTreeTest(SimpleTestCase):

    def test_find_skips_zero_rates(self):
        tree = FenwickTree.from_values([0, 2, 0, 3, 1])
        self.assertEqual(tree.total(), 6)
        self.assertEqual(tree.find(0.0), 1)
        self.assertEqual(tree.find(1.99), 1)
        self.assertEqual(tree.find(2.0), 3)
        self.assertEqual(tree.find(4.99), 3)
        self.assertEqual(tree.find(5.5), 4)

    def test_set_value(self):
        tree = FenwickTree(4)
        for i, v in enumerate([1.0, 1.0, 1.0, 1.0]):
            tree.set_value(i, v)
        tree.set_value(2, 5.0)
        self.assertEqual(tree.prefix_sum(1), 2.0)
        self.assertEqual(tree.prefix_sum(2), 7.0)
        self.assertEqual(tree.total(), 8.0)
        self.assertEqual(tree.find(2.5), 2)

    @settings(max_examples=60, deadline=None)
    @given(values=st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=70))
    def test_matches_cumulative_search(self, values):
        """
        PURPOSE: La búsqueda en el árbol coincide con searchsorted sobre
        la suma acumulada para todo u en [0, total).
        """
        if sum(values) == 0:
            return
        tree = FenwickTree.from_values(values)
        cumulative = np.cumsum(values)
        for u in np.arange(sum(values)) + 0.5:
            self.assertEqual(tree.find(u), int(np.searchsorted(cumulative, u, side='right')))


# ============================================================================
# GILLESPIE TESTS
# ============================================================================

class GillespieStepTest(SimpleTestCase):

    def setUp(self):
        self.env = environment_from_string('1111')
        self.edges = build_edges(self.env)

    def test_empty_configuration_is_absorbing(self):
        config = Configuration.empty(4)
        self.assertIsNone(gillespie_step(config, self.edges, CONST1, np.random.default_rng(0)))

    def test_single_particle_moves_along_out_edges(self):
        source = vertex_index(0, 1)
        targets = {vertex_index(1, 1), vertex_index(3, -1)}
        rng = np.random.default_rng(1)
        hits = {t: 0 for t in targets}
        for _ in range(4000):
            config = Configuration.empty(4)
            config.occupancy[source] = 1
            config.total = 1
            dt, (fired_source, target) = gillespie_step(config, self.edges, CONST1, rng)
            self.assertGreater(dt, 0)
            self.assertEqual(fired_source, source)
            self.assertIn(target, targets)
            self.assertEqual(config.occupancy[target], 1)
            hits[target] += 1
        # each target with probability 1/2
        for count in hits.values():
            self.assertLess(abs(count - 2000), 4 * math.sqrt(1000))

    def test_total_rate_linear(self):
        config = Configuration.empty(4)
        config.occupancy[[0, 5]] = 1
        config.total = 2
        sim = ZeroRangeSimulator(config, self.env, LINEAR, np.random.default_rng(2))
        self.assertEqual(sim.total_rate, 4.0)


class SimulateTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.table = get_fugacity_table('const1')
        cls.env = environment_from_string('1' * 64)

    def _initial(self, seed):
        return sample_product_configuration(self.env, 1.0, self.table, np.random.default_rng(seed))

    def test_zero_horizon(self):
        config = self._initial(1)
        result = simulate(config, self.env, CONST1, 0.0, np.random.default_rng(0))
        self.assertEqual(result.config, config)
        self.assertEqual(result.event_count, 0)

    def test_negative_horizon(self):
        with self.assertRaises(InvalidParameterError):
            simulate(self._initial(1), self.env, CONST1, -0.1, np.random.default_rng(0))

    def test_conservation(self):
        config = self._initial(2)
        result = simulate(config, self.env, CONST1, 0.05, np.random.default_rng(3))
        self.assertEqual(result.config.total, config.total)
        self.assertEqual(int(result.config.occupancy.sum()), config.total)
        self.assertGreater(result.event_count, 1000)
        self.assertFalse(result.absorbed)

    def test_input_configuration_untouched(self):
        config = self._initial(4)
        before = config.copy()
        simulate(config, self.env, CONST1, 0.01, np.random.default_rng(5))
        self.assertEqual(config, before)

    def test_deterministic(self):
        config = self._initial(6)
        first = simulate(config, self.env, CONST1, 0.02, np.random.default_rng(7))
        second = simulate(config, self.env, CONST1, 0.02, np.random.default_rng(7))
        self.assertEqual(first.config, second.config)
        self.assertEqual(first.event_count, second.event_count)

    def test_tree_and_scan_agree(self):
        """
        PURPOSE: Con tasas enteras las sumas son exactas, así que el árbol
        de Fenwick y el barrido lineal eligen los mismos eventos.
        """
        env = environment_from_string('1232311123')
        config = Configuration(np.arange(20) % 3)
        scan = ZeroRangeSimulator(config, env, LINEAR, np.random.default_rng(8), use_tree=False)
        tree = ZeroRangeSimulator(config, env, LINEAR, np.random.default_rng(8), use_tree=True)
        scan.advance_to(50.0)
        tree.advance_to(50.0)
        self.assertEqual(scan.config, tree.config)
        self.assertEqual(scan.clock.event_count, tree.clock.event_count)
        self.assertAlmostEqual(tree.total_rate, 2.0 * tree.config.total, places=9)

    def test_empty_configuration_absorbed(self):
        result = simulate(Configuration.empty(64), self.env, CONST1, 0.1, np.random.default_rng(0))
        self.assertTrue(result.absorbed)
        self.assertEqual(result.clock.macro_time, 0.1)

    def test_snapshots_once_per_time(self):
        calls = []
        recorder = SnapshotRecorder()

        def observer(t, config):
            calls.append(t)
            return config.total

        config = self._initial(9)
        result = simulate(
            config, self.env, CONST1, 0.02, np.random.default_rng(10),
            snapshot_times=[0.01, 0.0, 0.02, 0.5], observers={'total': observer, 'snapshot': recorder},
        )
        self.assertEqual(calls, [0.0, 0.01, 0.02])
        self.assertEqual(set(result.outputs['total'].values()), {config.total})
        self.assertEqual(result.outputs['snapshot'][0.0], config)
        self.assertEqual(result.outputs['snapshot'][0.02], result.config)

    def test_reversed_dynamics_conserve(self):
        env = environment_from_string('2323123111')
        config = sample_product_configuration(env, 2.0, self.table, np.random.default_rng(11))
        result = simulate(config, env, CONST1, 0.5, np.random.default_rng(12), reverse=True)
        self.assertEqual(result.config.total, config.total)

    def test_independent_walkers_follow_heat_kernel(self):
        """
        PURPOSE: Con g(k) = k las partículas son caminantes independientes:
        partiendo de Poisson producto, la media por vértice evoluciona con
        la matriz de transición de una partícula y los conteos por bloque
        siguen siendo Poisson.
        """
        env = environment_from_string('1' * 32)
        edges = build_edges(env)
        linear = get_fugacity_table('linear')
        densities = vertex_densities(env, lambda x: 1 + 0.5 * np.sin(2 * np.pi * x))
        measure = ProductMeasure(linear, densities)

        generator = np.zeros((64, 64))
        for s, t in zip(edges.sources, edges.targets):
            generator[s, t] += 1.0
            generator[s, s] -= 1.0
        t_macro = 0.02
        expected = densities @ expm(generator * t_macro * 32 ** 2)

        replicas = 60
        counts = np.zeros(64)
        for index in range(replicas):
            rng = replica_rng(13, index)
            counts += simulate(measure.sample(rng), env, LINEAR, t_macro, rng).config.occupancy
        block_counts = counts.reshape(8, 8).sum(axis=1)
        block_expected = replicas * expected.reshape(8, 8).sum(axis=1)
        self.assertTrue(np.all(np.abs(block_counts - block_expected) < 5 * np.sqrt(block_expected)))


class ReplicaTest(SimpleTestCase):

    def test_streams_depend_only_on_index(self):
        serial = run_replicas(draw_task, 8, master_seed=42, workers=1)
        pooled = run_replicas(draw_task, 8, master_seed=42, workers=4)
        self.assertEqual(serial, pooled)
        self.assertEqual([i for i, _ in serial], list(range(8)))
        self.assertEqual(len({v for _, v in serial}), 8)

    def test_process_pool_matches_serial_simulation(self):
        serial = run_replicas(short_run_task, 6, master_seed=5, workers=1)
        pooled = run_replicas(short_run_task, 6, master_seed=5, workers=3)
        self.assertEqual(serial, pooled)
        self.assertTrue(all(events > 0 for events, _ in serial))
        self.assertTrue(all(sum(occupancy) == 24 for _, occupancy in serial))

    def test_master_seed_changes_streams(self):
        self.assertNotEqual(replica_rng(1, 0).random(), replica_rng(2, 0).random())

    def test_replica_count_validated(self):
        with self.assertRaises(InvalidParameterError):
            run_replicas(lambda i, rng: i, 0, master_seed=0)


# ============================================================================
# EXACT MODEL TESTS
# ============================================================================

class ExactModelTest(SimpleTestCase):

    def test_state_enumeration(self):
        states = enumerate_states(6, 2)
        self.assertEqual(len(states), 21)
        self.assertTrue(np.all(states.sum(axis=1) == 2))
        self.assertEqual(len({tuple(s) for s in states}), 21)

    def test_two_site_single_particle(self):
        model = build_exact_model(environment_from_string('11'), CONST1, 1)
        self.assertEqual(model.n_states, 4)
        np.testing.assert_array_equal(model.exit_rates(), [2.0, 2.0, 2.0, 2.0])

    def test_row_sums_vanish(self):
        model = build_exact_model(environment_from_string('123'), CONST1, 2)
        self.assertEqual(model.n_states, 21)
        row_sums = np.asarray(model.generator.sum(axis=1)).ravel()
        self.assertLessEqual(np.max(np.abs(row_sums)), 1e-12)

    def test_state_space_guard(self):
        with self.assertRaises(StateSpaceError):
            build_exact_model(environment_from_string('1111'), CONST1, 50, limit=1000)

    def test_canonical_measure_is_stationary(self):
        """
        PURPOSE: La medida canónica pi ~ prod 1/g(s_x)! es invariante en
        todos los entornos, números de partículas y tasas de la matriz.
        """
        for text in ENV_MATRIX:
            env = environment_from_string(text)
            for k in (1, 2, 3):
                for g in (CONST1, LINEAR):
                    model = build_exact_model(env, g, k)
                    residual = stationarity_residual(model, canonical_measure(model))
                    self.assertLessEqual(residual, 1e-12, msg=f'{text} K={k} g={g.name}')

    def test_uniform_measure_fails_for_linear_rates(self):
        model = build_exact_model(environment_from_string('11'), LINEAR, 2)
        uniform = np.full(model.n_states, 1.0 / model.n_states)
        self.assertGreater(stationarity_residual(model, uniform), 0.1)
        self.assertLessEqual(stationarity_residual(model, canonical_measure(model)), 1e-12)

    def test_point_mass_residual_is_exit_rate(self):
        model = build_exact_model(environment_from_string('123'), LINEAR, 2)
        occupancy = model.states[5]
        residual = stationarity_residual(model, model.point_mass(occupancy))
        self.assertAlmostEqual(residual, model.exit_rates()[5], places=12)

    def test_empty_system(self):
        model = build_exact_model(environment_from_string('11'), CONST1, 0)
        self.assertEqual(model.n_states, 1)
        self.assertEqual(stationarity_residual(model, [1.0]), 0.0)

    def test_unnormalised_distribution(self):
        model = build_exact_model(environment_from_string('11'), CONST1, 1)
        with self.assertRaises(NormalizationError):
            stationarity_residual(model, np.ones(4))


class ExactEvolutionTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.model = build_exact_model(environment_from_string('123'), CONST1, 2)
        cls.pi = canonical_measure(cls.model)

    def test_relative_entropy_closed_forms(self):
        self.assertEqual(relative_entropy(self.pi, self.pi), 0.0)
        uniform = np.full(8, 1 / 8)
        point = np.eye(8)[3]
        self.assertAlmostEqual(relative_entropy(point, uniform), math.log(8), places=14)
        self.assertEqual(relative_entropy(uniform, point), math.inf)

    def test_transient_at_zero(self):
        mu0 = self.model.point_mass(self.model.states[0])
        np.testing.assert_array_equal(transient_distribution(self.model, mu0, 0.0), mu0)

    def test_transient_converges_to_canonical(self):
        mu0 = self.model.point_mass(self.model.states[0])
        mu = transient_distribution(self.model, mu0, 60.0)
        self.assertLess(total_variation(mu, self.pi), 1e-8)

    def test_entropy_decreases(self):
        mu0 = self.model.point_mass(self.model.states[7])
        values = [
            relative_entropy(transient_distribution(self.model, mu0, t), self.pi)
            for t in np.linspace(0.0, 4.0, 20)
        ]
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(values, values[1:])))
        self.assertLess(values[-1], values[0])

    def test_exact_matches_monte_carlo(self):
        """
        PURPOSE: La ley transitoria por uniformización coincide con el
        histograma de réplicas de Gillespie en un modelo de 20 estados.
        """
        env = environment_from_string('11')
        model = build_exact_model(env, LINEAR, 3)
        start = np.array([3, 0, 0, 0])
        exact = transient_distribution(model, model.point_mass(start), 1.0)

        edges = build_edges(env)
        finals = []
        for index in range(10_000):
            sim = ZeroRangeSimulator(Configuration(start), env, LINEAR, replica_rng(5, index), edges=edges)
            sim.advance_to(1.0)
            finals.append(sim.config.occupancy.copy())
        empirical = empirical_state_distribution(model, finals)
        self.assertLess(total_variation(exact, empirical), 0.04)


class DirichletFormTest(SimpleTestCase):

    def setUp(self):
        self.model = build_exact_model(environment_from_string('11'), CONST1, 1)

    def test_constants_vanish(self):
        self.assertEqual(dirichlet_form(self.model, np.ones(4)), 0.0)
        self.assertEqual(dirichlet_form(self.model, np.full(4, 3.7)), 0.0)

    def test_indicator_against_brute_force(self):
        h = np.zeros(4)
        h[0] = 1.0
        pi = canonical_measure(self.model)
        edges = build_edges(self.model.env)
        brute = 0.0
        for i, state in enumerate(self.model.states):
            for s, t in zip(edges.sources, edges.targets):
                if state[s] == 0:
                    continue
                moved = state.copy()
                moved[s] -= 1
                moved[t] += 1
                j = self.model.state_of(moved)
                brute += pi[i] * CONST1(state[s]) * (math.sqrt(h[j]) - math.sqrt(h[i])) ** 2
        brute *= 0.5
        self.assertAlmostEqual(dirichlet_form(self.model, h), brute, delta=1e-14)
        self.assertAlmostEqual(brute, 0.5, places=14)

    def test_negative_function(self):
        with self.assertRaises(DomainError):
            dirichlet_form(self.model, np.array([1.0, -1.0, 0.0, 0.0]))


# ============================================================================
# STORAGE AND COMMAND TESTS
# ============================================================================

class SnapshotStorageTest(SimpleTestCase):

    def test_write_and_read(self):
        config = Configuration([0, 3, 1, 0, 2, 2])
        with tempfile.TemporaryDirectory() as tmp:
            path = write_snapshot(config, snapshot_path(tmp, 0.05, 2))
            self.assertEqual(path.parent.name, 't_0.05')
            self.assertEqual(path.name, 'replica_0002.csv')
            self.assertEqual(read_snapshot(path), config)
            self.assertEqual(read_snapshot_dir(path.parent), [config])

    def test_unreadable_snapshots_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ReportInputError):
                read_snapshot_dir(Path(tmp) / 't_0.05')
            empty = Path(tmp) / 'replica_0000.csv'
            empty.write_text('')
            with self.assertRaises(ReportInputError):
                read_snapshot(empty)
            binary = Path(tmp) / 'replica_0001.csv'
            binary.write_bytes(b'site,row,occupancy\n0,1,\xff\n')
            with self.assertRaises(ReportInputError):
                read_snapshot(binary)


class SimulateCommandTest(TestCase):

    def test_simulate_writes_snapshots_and_summary(self):
        with tempfile.TemporaryDirectory() as tmp:
            env_path = Path(tmp) / 'env.txt'
            out = Path(tmp) / 'sim'
            call_command('gen_env', n=16, p=0.4, seed=1, out=str(env_path), stdout=StringIO())
            call_command(
                'simulate', env=str(env_path), g='const1', rho0='sine:1,0.5', t=0.01,
                snapshots='0.005,0.01', replicas=2, seed=3, out=str(out), stdout=StringIO(),
            )
            summary = json.loads((out / 'summary.json').read_text())
            self.assertTrue(summary['conserved'])
            self.assertEqual(summary['snapshot_times'], [0.005, 0.01])
            self.assertEqual(len(read_snapshot_dir(out / 't_0.01')), 2)
            self.assertEqual(len(read_snapshot_dir(out / 't_0.005')), 2)

    def test_missing_environment_exit_code(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                call_command(
                    'simulate', env=str(Path(tmp) / 'missing.txt'), g='const1', rho0='const:1', t=0.01,
                    stdout=StringIO(),
                )
            self.assertEqual(ctx.exception.returncode, 2)
