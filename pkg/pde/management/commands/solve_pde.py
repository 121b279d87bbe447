"""
Solve the hydrodynamic equation d_t rho = kappa d_xx Phi(rho) on the torus.

Usage:
    python manage.py solve_pde --g const1 --env env.txt --rho0 sine:1,0.5 --t 0.05 --m 512 --out rho.csv
    python manage.py solve_pde --g linear --kappa 1 --rho0 sine:1,0.5 --t 0.02 --exact --out rho.csv
"""
from pathlib import Path

import numpy as np
from django.conf import settings

from core.management.base import ZRPCommand
from core.reports import write_csv
from environment.storage import load_environment
from environment.tiles import decompose_tiles
from measures.fugacity import get_fugacity_table
from measures.jump_rates import JUMP_RATES
from pde.profiles import InitialProfile
from pde.solver import SCHEMES, DensityProfile, PDEConfig, exact_linear_solution, solve_pde_path


def parse_times(text):
    return sorted({float(t) for t in text.split(',') if t.strip()})


class Command(ZRPCommand):
    help = 'Solve the limiting PDE and write the profile as CSV (x, rho)'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--g', type=str, required=True, choices=sorted(JUMP_RATES), help='Jump rate')
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--env', type=str, help='Environment file; kappa is its kappa_N')
        source.add_argument('--kappa', type=float, help='Diffusion prefactor')
        parser.add_argument('--rho0', type=str, required=True, help='Initial profile: const:c or sine:a,b')
        parser.add_argument('--t', type=float, required=True, help='Macroscopic end time')
        parser.add_argument('--snapshots', type=str, default='', help='Extra comma-separated output times')
        parser.add_argument('--m', type=int, default=512, help='Grid points')
        parser.add_argument('--dt', type=float, default=None, help='Time step (default: scheme-specific)')
        parser.add_argument('--scheme', type=str, default='explicit', choices=SCHEMES)
        parser.add_argument('--exact', action='store_true',
                            help='Also report the max-norm error against the Fourier solution (linear g only)')
        parser.add_argument('--out', type=str, required=True, help='Output CSV for the profile at --t')

    def run(self, **options):
        kappa = options['kappa']
        if options['env']:
            kappa = decompose_tiles(load_environment(options['env'])).kappa_n
        table = get_fugacity_table(options['g'], rho_max=settings.ZRP_RHO_MAX)
        profile = InitialProfile.parse(options['rho0'])
        profile.check_bounds(table.rho_max)
        cfg = PDEConfig(kappa=kappa, m=options['m'], dt=options['dt'], scheme=options['scheme'])

        times = sorted({t for t in parse_times(options['snapshots']) if t <= options['t']} | {options['t']})
        path = solve_pde_path(profile, table, cfg, times)

        out = Path(options['out'])
        for solution in path[:-1]:
            target = out.with_name(f'{out.stem}_t_{solution.time:g}{out.suffix}')
            write_csv(target, ('x', 'rho'), zip(solution.grid, solution.values))
        final = path[-1]
        write_csv(out, ('x', 'rho'), zip(final.grid, final.values))

        lo, hi = final.bounds()
        self.stdout.write(f'kappa={kappa:.6f} mass={final.mass():.12f} range=[{lo:.6f}, {hi:.6f}]')
        if options['exact']:
            exact = exact_linear_solution(DensityProfile.from_function(profile, cfg.m), kappa, options['t'], table)
            error = float(np.max(np.abs(exact.values - final.values)))
            self.stdout.write(f'max-norm error vs exact solution: {error:.3e}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {out}'))
