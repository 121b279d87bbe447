"""
Experiment pipelines. Each one composes module operations and returns a
JSON-ready report that embeds the full config and the environment digest.

Errors escaping a stage carry the stage name (``[simulate] ...``).
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings

from analysis.hydro import (
    compare_profiles,
    density_cylinder,
    empirical_profile,
    g_bound_constants,
    sup_abs_F,
    theorem1_statistic,
)
from analysis.observables import c_of_l, one_block_statistic, section5_statistic
from core import constants
from core.exceptions import ZRPError
from core.experiments import ExperimentConfig
from core.reports import write_csv, write_report
from dynamics.configuration import Configuration
from dynamics.exact import (
    build_exact_model,
    canonical_measure,
    empirical_state_distribution,
    relative_entropy,
    stationarity_residual,
    total_variation,
    transient_distribution,
)
from dynamics.gillespie import ZeroRangeSimulator, run_replicas, simulate
from environment.ladder import build_edges, environment_digest, environment_from_string, generate_environment
from environment.storage import load_environment
from environment.tiles import decompose_tiles
from measures.fugacity import get_fugacity_table
from measures.large_deviations import gamma_moment_threshold, proposition4_check
from measures.sampling import ProductMeasure, vertex_densities
from pde.profiles import InitialProfile
from pde.solver import PDEConfig, solve_pde_path

logger = logging.getLogger(__name__)

STATIONARITY_TOLERANCE = 1e-12
NEGATIVE_CONTROL = {'env': '11', 'g': 'linear', 'k': 2}
GAMMA_BISECTIONS = 40


@contextmanager
def stage(name):
    try:
        yield
    except ZRPError as exc:
        if exc.stage is None:
            exc.with_stage(name)
        raise


def _workers(config):
    return config.workers or settings.ZRP_THREADS


def _table(g):
    return get_fugacity_table(g, rho_max=settings.ZRP_RHO_MAX)


def load_config_environment(config):
    if config.env_file:
        return load_environment(config.env_file, seed=config.env_seed, pair_prob=config.p)
    return generate_environment(config.n, config.p, config.env_seed)


def _base_report(config, env=None):
    report = {'experiment': config.experiment, 'config': config.to_dict()}
    if env is not None:
        report['environment_digest'] = environment_digest(env)
        report['n'] = env.n
    return report


# ============================================================================
# REPLICA TASKS
# ============================================================================
# Tasks handed to run_replicas must pickle, so no closures here.

@dataclass(frozen=True)
class HydroReplica:
    measure: ProductMeasure
    env: object
    rate: object
    t_end: float
    times: tuple

    def __call__(self, index, rng):
        result = simulate(self.measure.sample(rng), self.env, self.rate, self.t_end, rng, snapshot_times=self.times)
        return result.outputs['snapshot'], result.event_count


@dataclass(frozen=True)
class ExactReplica:
    start: tuple
    env: object
    g: str
    edges: object
    micro_time: float

    def __call__(self, index, rng):
        sim = ZeroRangeSimulator(Configuration(self.start), self.env, self.g, rng, edges=self.edges)
        sim.advance_to(self.micro_time)
        return sim.config.occupancy.copy()


@dataclass(frozen=True)
class OneBlockReplica:
    measure: ProductMeasure
    decomp: object
    table: object
    windows: tuple

    def __call__(self, index, rng):
        config = self.measure.sample(rng)
        decomp, table = self.decomp, self.table
        return [
            (one_block_statistic(config, decomp, table, l), section5_statistic(config, decomp, table, l))
            for l in self.windows
        ]


# ============================================================================
# HYDRODYNAMICS
# ============================================================================

def run_hydro(config):
    """
    Environment -> tiles -> kappa_N -> local equilibrium replicas ->
    simulation to every snapshot time -> PDE with the realised kappa_N ->
    L1 comparison per snapshot.
    """
    with stage('environment'):
        env = load_config_environment(config)
        decomp = decompose_tiles(env)
    with stage('measures'):
        table = _table(config.g)
        profile = InitialProfile.parse(config.rho0)
        profile.check_bounds(table.rho_max)
        measure = ProductMeasure(table, vertex_densities(env, profile))
    times = config.snapshot_times
    replica = HydroReplica(measure=measure, env=env, rate=table.rate, t_end=config.t, times=tuple(times))

    with stage('simulate'):
        results = run_replicas(replica, config.replicas, config.master_seed, workers=_workers(config))
    with stage('pde'):
        pde_cfg = PDEConfig(kappa=decomp.kappa_n, m=config.pde_m, scheme=config.scheme)
        path = solve_pde_path(profile, table, pde_cfg, times)

    snapshots_by_time = {t: [snaps[t] for snaps, _ in results] for t in times}
    cos_phi = lambda x: np.cos(2 * np.pi * x)  # noqa: E731
    psi = density_cylinder()
    per_time = []
    with stage('compare'):
        for t, pde_profile in zip(times, path):
            empirical = empirical_profile(snapshots_by_time[t], config.block_size)
            comparison = compare_profiles(empirical, pde_profile)
            statistic = theorem1_statistic(snapshots_by_time[t], pde_profile, cos_phi, psi, table)
            per_time.append({
                't': t,
                'comparison': comparison.to_dict(),
                'test_function_statistic': {'mean': statistic.mean, 'stderr': statistic.stderr},
            })
            if config.out:
                out = Path(config.out)
                write_csv(out / f'pde_t_{t:g}.csv', ('x', 'rho'), zip(pde_profile.grid, pde_profile.values))
                write_csv(
                    out / f'empirical_t_{t:g}.csv', ('x', 'mean', 'stderr'),
                    zip(empirical.centres, empirical.mean, empirical.stderr),
                )

    final = per_time[-1]['comparison']
    report = _base_report(config, env)
    report.update({
        't_n': decomp.t_n,
        'kappa_n': decomp.kappa_n,
        'snapshots': per_time,
        'l1_error': final['l1_error'],
        'pooled_se': final['pooled_se'],
        'events': [events for _, events in results],
    })
    logger.info("hydro n=%d: L1 error %.5f at t=%s", env.n, report['l1_error'], config.t)
    return report


# ============================================================================
# EXACT GENERATOR
# ============================================================================

def run_stationarity(config):
    """Canonical-measure residuals over the env x K x g matrix, plus the uniform negative control."""
    limit = settings.ZRP_STATE_LIMIT
    entries = []
    with stage('exact'):
        for text in config.env_list:
            env = environment_from_string(text)
            for k in config.k_list:
                for g in config.g_list:
                    model = build_exact_model(env, g, k, limit=limit)
                    entries.append({
                        'env': text,
                        'k': k,
                        'g': g,
                        'states': model.n_states,
                        'residual': stationarity_residual(model, canonical_measure(model)),
                    })
        control_model = build_exact_model(
            environment_from_string(NEGATIVE_CONTROL['env']), NEGATIVE_CONTROL['g'], NEGATIVE_CONTROL['k'], limit=limit,
        )
        uniform = np.full(control_model.n_states, 1.0 / control_model.n_states)
        control_residual = stationarity_residual(control_model, uniform)

    max_residual = max((e['residual'] for e in entries), default=0.0)
    report = _base_report(config)
    report.update({
        'entries': entries,
        'max_residual': max_residual,
        'passed': max_residual <= STATIONARITY_TOLERANCE,
        'negative_control': {
            **NEGATIVE_CONTROL,
            'measure': 'uniform',
            'residual': control_residual,
            'expected_fail': True,
            'failed_as_expected': control_residual > 0.01,
        },
    })
    logger.info("stationarity: max residual %.3e over %d models", max_residual, len(entries))
    return report


def run_exact_small(config):
    """Uniformization against Gillespie replicas, and entropy decay from a point mass."""
    env = environment_from_string(config.exact_env)
    with stage('exact'):
        model = build_exact_model(env, config.g, config.k, limit=settings.ZRP_STATE_LIMIT)
        start = model.states[0]
        mu0 = model.point_mass(start)
        exact = transient_distribution(model, mu0, config.exact_t)
        pi = canonical_measure(model)
        times = np.linspace(0.0, config.exact_t, config.entropy_points)
        entropies = [relative_entropy(transient_distribution(model, mu0, t), pi) for t in times]

    replica = ExactReplica(start=tuple(start), env=env, g=config.g, edges=build_edges(env), micro_time=config.exact_t)

    with stage('simulate'):
        finals = run_replicas(replica, config.replicas, config.master_seed, workers=_workers(config))
    empirical = empirical_state_distribution(model, finals)

    report = _base_report(config, env)
    report.update({
        'states': model.n_states,
        'total_variation': total_variation(exact, empirical),
        'entropy_times': times,
        'entropy': entropies,
        'entropy_nonincreasing': all(b <= a + 1e-12 for a, b in zip(entropies, entropies[1:])),
    })
    return report


# ============================================================================
# ONE-BLOCK AND C(l)
# ============================================================================

def stationary_one_block(env, table, rho, windows, replicas, master_seed, workers=1):
    """Replica means and standard errors of both one-block statistics for each l."""
    decomp = decompose_tiles(env)
    measure = ProductMeasure(table, vertex_densities(env, rho))
    replica = OneBlockReplica(measure=measure, decomp=decomp, table=table, windows=tuple(windows))

    values = np.array(run_replicas(replica, replicas, master_seed, workers=workers))
    mean = values.mean(axis=0)
    stderr = values.std(axis=0, ddof=1) / np.sqrt(replicas) if replicas > 1 else np.zeros_like(mean)
    return {
        'environment_digest': environment_digest(env),
        'kappa_n': decomp.kappa_n,
        'rho': rho,
        'g': table.rate.name,
        'replicas': replicas,
        'master_seed': master_seed,
        'l': list(windows),
        'one_block': mean[:, 0],
        'one_block_stderr': stderr[:, 0],
        'section5': mean[:, 1],
        'section5_stderr': stderr[:, 1],
    }


def run_one_block(config):
    with stage('environment'):
        env = load_config_environment(config)
    with stage('one-block'):
        result = stationary_one_block(
            env, _table(config.g), config.rho, config.l_list, config.replicas,
            config.master_seed, workers=_workers(config),
        )
    report = _base_report(config, env)
    report.update(result)
    return report


def run_c_of_l(config):
    with stage('environment'):
        env = load_config_environment(config)
        decomp = decompose_tiles(env)
    with stage('c-of-l'):
        values = [c_of_l(decomp, l) for l in config.l_list]
    report = _base_report(config, env)
    report.update({
        'kappa_n': decomp.kappa_n,
        'l': list(config.l_list),
        'c_of_l': values,
        'decreasing': all(b <= a for a, b in zip(values, values[1:])),
    })
    return report


# ============================================================================
# PROPOSITION 4
# ============================================================================

def _certifies(table, kappa, F_bound, gamma, rhos, lambdas):
    value = proposition4_check(table, kappa, F_bound, gamma, rhos, lambdas)
    return value <= 0, value


def search_gamma(table, kappa, F_bound, rhos, lambdas, floor=1e-6):
    """
    Largest gamma in (0, 1] certified on the grid: halve from 1 until the
    grid max is nonpositive, then bisect between the last failure and the
    first success. Returns (gamma, grid_max) or (None, grid_max at floor).
    """
    ok, value = _certifies(table, kappa, F_bound, 1.0, rhos, lambdas)
    if ok:
        return 1.0, value
    failing = 1.0
    gamma = 0.5
    while gamma >= floor:
        ok, value = _certifies(table, kappa, F_bound, gamma, rhos, lambdas)
        if ok:
            break
        failing = gamma
        gamma /= 2
    else:
        _, value = _certifies(table, kappa, F_bound, floor, rhos, lambdas)
        return None, value

    certified, certified_value = gamma, value
    for _ in range(GAMMA_BISECTIONS):
        mid = 0.5 * (certified + failing)
        ok, value = _certifies(table, kappa, F_bound, mid, rhos, lambdas)
        if ok:
            certified, certified_value = mid, value
        else:
            failing = mid
        if failing - certified <= 1e-6 * certified:
            break
    return certified, certified_value


def run_prop4(config):
    """
    Search gamma such that gamma |F M| - J <= 0 on the density/lambda grid,
    with ||F|| taken from the PDE solution over [0, t]. A failed search is
    reported, not raised.
    """
    with stage('environment'):
        env = load_config_environment(config)
        kappa = decompose_tiles(env).kappa_n
    with stage('measures'):
        table = _table(config.g)
        profile = InitialProfile.parse(config.rho0)
        k1, k2 = profile.check_bounds(table.rho_max)
    with stage('pde'):
        pde_cfg = PDEConfig(kappa=kappa, m=config.pde_m, scheme=config.scheme)
        times = np.linspace(0.0, config.t, 11) if config.t > 0 else [0.0]
        F_bound = sup_abs_F(solve_pde_path(profile, table, pde_cfg, times), table, kappa)

    rhos = np.linspace(k1, k2, config.rho_points)
    lambdas = np.linspace(0.0, table.rho_max, config.lambda_points + 1)
    with stage('prop4'):
        gamma, grid_max = search_gamma(table, kappa, F_bound, rhos, lambdas, floor=config.gamma_floor)

    report = _base_report(config, env)
    report.update({
        'kappa_n': kappa,
        'k1': k1,
        'k2': k2,
        'F_bound': F_bound,
        'gamma_moment_threshold': gamma_moment_threshold(table, kappa, F_bound, k2),
    })
    if gamma is None:
        report.update({
            'status': 'failed',
            'certified_gamma': None,
            'grid_max': grid_max,
            'message': constants.NO_GAMMA_CERTIFIED.format(floor=config.gamma_floor),
        })
        logger.warning("prop4: no gamma certified down to %s", config.gamma_floor)
        return report

    refined = np.linspace(0.0, table.rho_max, 2 * config.lambda_points + 1)
    c1, c2 = g_bound_constants(table, kappa, gamma, F_bound, k2)
    report.update({
        'status': 'certified',
        'certified_gamma': gamma,
        'grid_max': grid_max,
        'refined_grid_max': proposition4_check(table, kappa, F_bound, gamma, rhos, refined),
        'C1': c1,
        'C2': c2,
    })
    logger.info("prop4: gamma=%.6g certified (grid max %.3e)", gamma, grid_max)
    return report


# ============================================================================
# DISPATCH
# ============================================================================

PIPELINES = {
    'hydro': run_hydro,
    'stationarity': run_stationarity,
    'exact-small': run_exact_small,
    'one-block': run_one_block,
    'c-of-l': run_c_of_l,
    'prop4': run_prop4,
}


def run_experiment(config):
    """Run the pipeline for ``config.experiment`` and write report.json under ``config.out``."""
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    report = PIPELINES[config.experiment](config)
    if config.out:
        write_report(report, Path(config.out) / 'report.json')
    return report
