"""
Exact stationarity check of the canonical measure on small instances.

Usage:
    python manage.py stationarity --out runs/stationarity
    python manage.py stationarity --config experiments/stationarity.json --record
"""
from core.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Canonical-measure residuals over the small env x K x g matrix'
    experiment = 'stationarity'

    def summarize(self, report):
        control = report['negative_control']
        self.stdout.write(f"{len(report['entries'])} models, max residual {report['max_residual']:.3e}")
        self.stdout.write(f"uniform control residual {control['residual']:.3e} (expected to fail)")
        if report['passed']:
            self.stdout.write(self.style.SUCCESS('Canonical measure is stationary on every instance'))
        else:
            self.stdout.write(self.style.ERROR('Residual above tolerance'))
