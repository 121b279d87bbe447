"""
Hydrodynamic-limit experiment: replicas against the PDE with the realised kappa_N.

Usage:
    python manage.py hydro --n 256 --p 0.4 --g const1 --rho0 sine:1,0.5 --t 0.05 --replicas 200 --out runs/hydro
"""
from core.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Simulate, solve the PDE and report the L1 error per snapshot'
    experiment = 'hydro'

    def summarize(self, report):
        for entry in report['snapshots']:
            comparison = entry['comparison']
            self.stdout.write(
                f"t={entry['t']:g}: L1 {comparison['l1_error']:.5f} (pooled SE {comparison['pooled_se']:.5f})"
            )
        self.stdout.write(self.style.SUCCESS(
            f"n={report['n']} kappa_N={report['kappa_n']:.6f} final L1 error {report['l1_error']:.5f}"
        ))
