"""
Search the largest gamma certifying the exponential-moment inequality.

Usage:
    python manage.py prop4 --g const1 --n 64 --p 0.4 --rho0 sine:1,0.5 --t 0.05
"""
from core.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Grid-certified gamma for gamma |F M| - J <= 0'
    experiment = 'prop4'

    def summarize(self, report):
        self.stdout.write(f"kappa_N={report['kappa_n']:.6f} sup|F|={report['F_bound']:.6g}")
        if report['status'] == 'certified':
            self.stdout.write(self.style.SUCCESS(
                f"gamma={report['certified_gamma']:.6g} certified (grid max {report['grid_max']:.3e})"
            ))
        else:
            # A failed search is a result, not an error
            self.stdout.write(self.style.WARNING(report['message']))
