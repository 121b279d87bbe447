"""
Decompose a stored environment into tiles and write the result as JSON.

Usage:
    python manage.py decompose --env env.txt --out tiles.json --census 1,2,4
"""
from core.management.base import ZRPCommand
from core.reports import write_report
from environment.ladder import environment_digest
from environment.storage import load_environment
from environment.tiles import decompose_tiles, shape_census


class Command(ZRPCommand):
    help = 'Tile decomposition of an environment file'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--env', type=str, required=True, help='Environment file')
        parser.add_argument('--out', type=str, required=True, help='Output JSON file')
        parser.add_argument(
            '--census',
            type=str,
            default='',
            help='Comma-separated half-windows l for the shape census',
        )

    def run(self, **options):
        env = load_environment(options['env'])
        decomp = decompose_tiles(env)
        windows = [int(l) for l in options['census'].split(',') if l.strip()]

        report = {
            'environment_digest': environment_digest(env),
            'n': env.n,
            't_n': decomp.t_n,
            'kappa_n': decomp.kappa_n,
            'tiles': [
                {
                    'index': tile.index,
                    'centre_site': tile.centre_site,
                    'vertices': sorted([v.site, v.row] for v in tile.vertices),
                }
                for tile in decomp.tiles
            ],
            'census': {str(l): shape_census(decomp, l) for l in windows},
        }
        write_report(report, options['out'])
        self.stdout.write(self.style.SUCCESS(f'T_N={decomp.t_n} kappa_N={decomp.kappa_n:.6f}'))
