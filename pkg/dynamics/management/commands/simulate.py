"""
Simulate replicas of the process from a local equilibrium initial law.

Usage:
    python manage.py simulate --env env.txt --g const1 --rho0 sine:1,0.5 \
        --t 0.05 --snapshots 0.01,0.05 --replicas 20 --seed 7 --out runs/sim
"""
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings

from core.management.base import ZRPCommand
from core.reports import write_report
from dynamics.gillespie import run_replicas, simulate
from dynamics.storage import snapshot_path, write_snapshot
from environment.ladder import environment_digest
from environment.storage import load_environment
from measures.fugacity import get_fugacity_table
from measures.jump_rates import JUMP_RATES
from measures.sampling import ProductMeasure, vertex_densities
from pde.profiles import InitialProfile


def parse_times(text):
    return sorted({float(t) for t in text.split(',') if t.strip()})


@dataclass(frozen=True)
class SnapshotReplica:
    measure: ProductMeasure
    env: object
    g: str
    t_end: float
    times: tuple
    out: Path
    reverse: bool = False

    def __call__(self, index, rng):
        initial = self.measure.sample(rng)
        result = simulate(
            initial, self.env, self.g, self.t_end, rng,
            snapshot_times=self.times, reverse=self.reverse,
        )
        for t, config in result.outputs['snapshot'].items():
            write_snapshot(config, snapshot_path(self.out, t, index))
        return {
            'index': index,
            'particles_initial': initial.total,
            'particles_final': result.config.total,
            'events': result.event_count,
            'absorbed': result.absorbed,
        }


class Command(ZRPCommand):
    help = 'Run Gillespie replicas and write occupancy snapshots'
    record_kind = 'simulate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--env', type=str, required=True, help='Environment file')
        parser.add_argument('--g', type=str, required=True, choices=sorted(JUMP_RATES), help='Jump rate')
        parser.add_argument('--rho0', type=str, required=True, help='Initial profile: const:c or sine:a,b')
        parser.add_argument('--t', type=float, required=True, help='Macroscopic horizon')
        parser.add_argument('--snapshots', type=str, default='', help='Comma-separated snapshot times')
        parser.add_argument('--replicas', type=int, default=1)
        parser.add_argument('--seed', type=int, default=0, help='Master seed')
        parser.add_argument('--out', type=str, default=None, help='Output directory')
        parser.add_argument('--reverse', action='store_true', help='Run the time-reversed dynamics')

    def run(self, **options):
        env = load_environment(options['env'])
        profile = InitialProfile.parse(options['rho0'])
        table = get_fugacity_table(options['g'], rho_max=settings.ZRP_RHO_MAX)
        profile.check_bounds(table.rho_max)
        out = Path(options['out'] or self.default_output_dir())
        t_end = options['t']
        measure = ProductMeasure(table, vertex_densities(env, profile))
        times = [t for t in parse_times(options['snapshots']) if t <= t_end] or [t_end]

        replica = SnapshotReplica(
            measure=measure, env=env, g=options['g'], t_end=t_end,
            times=tuple(times), out=out, reverse=options['reverse'],
        )
        replicas = run_replicas(replica, options['replicas'], options['seed'], workers=settings.ZRP_THREADS)
        report = {
            'environment_digest': environment_digest(env),
            'n': env.n,
            'g': options['g'],
            'rho0': profile.to_expr(),
            't': t_end,
            'snapshot_times': times,
            'master_seed': options['seed'],
            'reverse': options['reverse'],
            'replicas': replicas,
            'conserved': all(r['particles_initial'] == r['particles_final'] for r in replicas),
            'total_events': sum(r['events'] for r in replicas),
        }
        write_report(report, out / 'summary.json')
        self.record(options, report, config={k: report[k] for k in ('n', 'g', 'rho0', 't', 'master_seed')})
        self.stdout.write(
            self.style.SUCCESS(f"{len(replicas)} replica(s), {report['total_events']} events -> {out}")
        )
