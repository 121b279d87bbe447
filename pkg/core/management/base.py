"""
Shared base for the simulator's management commands.

Subclasses implement ``run(**options)`` instead of ``handle``. Any
``ZRPError`` escaping ``run`` becomes a ``CommandError`` whose return code
is the error's exit code (2 for bad input, 3 for numerical failure).
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ZRPError
from core.experiments import ExperimentConfig
from core.pipelines import run_experiment

logger = logging.getLogger(__name__)


class ZRPCommand(BaseCommand):
    # Experiment kind stored on ExperimentRun when --record is given
    record_kind = None

    def add_arguments(self, parser):
        if self.record_kind:
            parser.add_argument(
                '--record',
                action='store_true',
                help='Store the produced report as an ExperimentRun',
            )

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except ZRPError as exc:
            logger.error("%s failed: %s", self.__module__.rsplit('.', 1)[-1], exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError("Subclasses must implement run()")

    def default_output_dir(self):
        return settings.ZRP_OUTPUT_DIR

    def record(self, options, report, config=None, kind=None):
        """Persist ``report`` when the command was called with --record."""
        if not options.get('record'):
            return None
        from core.models import ExperimentRun

        run = ExperimentRun.from_report(kind or self.record_kind, report, config=config)
        self.stdout.write(f'Recorded run #{run.pk}')
        return run


def parse_list(text, cast=float):
    return tuple(cast(v) for v in text.split(',') if v.strip())


class ExperimentCommand(ZRPCommand):
    """
    A command backed by one experiment pipeline.

    The config comes from ``--config`` (a JSON file) when given; flags
    override the file value for the fields they name.
    """
    experiment = None

    # flag dest -> ExperimentConfig field
    OVERRIDES = {
        'env': 'env_file',
        'n': 'n',
        'p': 'p',
        'env_seed': 'env_seed',
        'g': 'g',
        'rho0': 'rho0',
        't': 't',
        'snapshots': 'snapshots',
        'replicas': 'replicas',
        'block': 'block_size',
        'l_list': 'l_list',
        'rho': 'rho',
        'seed': 'master_seed',
        'out': 'out',
        'workers': 'workers',
        'pde_m': 'pde_m',
        'scheme': 'scheme',
        'k': 'k',
    }

    @property
    def record_kind(self):
        return self.experiment or 'experiment'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--config', type=str, default=None, help='Experiment config JSON file')
        parser.add_argument('--env', type=str, default=None, help='Environment file')
        parser.add_argument('--n', type=int, default=None, help='Sites of a generated environment')
        parser.add_argument('--p', type=float, default=None, help='Pair probability of a generated environment')
        parser.add_argument('--env-seed', type=int, default=None, help='Seed of a generated environment')
        parser.add_argument('--g', type=str, default=None, help='Jump rate')
        parser.add_argument('--rho0', type=str, default=None, help='Initial profile: const:c or sine:a,b')
        parser.add_argument('--t', type=float, default=None, help='Macroscopic horizon')
        parser.add_argument('--snapshots', type=str, default=None, help='Comma-separated snapshot times')
        parser.add_argument('--replicas', type=int, default=None)
        parser.add_argument('--block', type=int, default=None, help='Block size in sites')
        parser.add_argument('--l-list', type=str, default=None, help='Comma-separated half-windows')
        parser.add_argument('--rho', type=float, default=None, help='Stationary density')
        parser.add_argument('--seed', type=int, default=None, help='Master seed')
        parser.add_argument('--out', type=str, default=None, help='Output directory')
        parser.add_argument('--workers', type=int, default=None, help='Replica worker processes (default ZRP_THREADS)')
        parser.add_argument('--pde-m', type=int, default=None, help='PDE grid points')
        parser.add_argument('--scheme', type=str, default=None, help='PDE time scheme')
        parser.add_argument('--k', type=int, default=None, help='Particles in exact-generator runs')

    def build_config(self, options):
        kind = self.experiment or options.get('experiment')
        if options.get('config'):
            config = ExperimentConfig.from_json(options['config']).with_overrides(experiment=kind)
        else:
            config = ExperimentConfig(experiment=kind)

        overrides = {field: options.get(flag) for flag, field in self.OVERRIDES.items()}
        if overrides['snapshots'] is not None:
            overrides['snapshots'] = parse_list(overrides['snapshots'])
        if overrides['l_list'] is not None:
            overrides['l_list'] = parse_list(overrides['l_list'], cast=int)
        config = config.with_overrides(**overrides)
        if config.out is None:
            config = config.with_overrides(out=str(Path(self.default_output_dir()) / config.experiment))
        return config

    def run(self, **options):
        config = self.build_config(options)
        logger.info("running %s into %s", config.experiment, config.out)
        report = run_experiment(config)
        self.record(options, report, config=config, kind=config.experiment)
        self.summarize(report)
        self.stdout.write(f"Report written to {Path(config.out) / 'report.json'}")

    def summarize(self, report):
        self.stdout.write(self.style.SUCCESS(f"{report['experiment']} finished"))
