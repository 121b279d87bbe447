"""
Run any experiment from a config file.

Usage:
    python manage.py run_experiment --config experiments/hydro.json
    python manage.py run_experiment --experiment c-of-l --n 100000 --p 0.4 --l-list 1,2,4,8,16,32
"""
from core.experiments import EXPERIMENTS
from core.management.base import ExperimentCommand
from core.reports import report_json


class Command(ExperimentCommand):
    help = 'Run the pipeline named by the config (or --experiment) and write report.json'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--experiment', type=str, default=None, choices=EXPERIMENTS,
                            help='Experiment kind; overrides the config file')
        parser.add_argument('--print', action='store_true', dest='print_report', help='Echo the report')

    def run(self, **options):
        self.print_report = options['print_report']
        super().run(**options)

    def summarize(self, report):
        if self.print_report:
            self.stdout.write(report_json(report), ending='')
        status = report.get('status') or ('passed' if report.get('passed', True) else 'failed')
        self.stdout.write(self.style.SUCCESS(f"{report['experiment']} finished ({status})"))
