"""
One-block statistics at stationarity over a list of half-windows.

Usage:
    python manage.py one_block --env env.txt --rho 1.0 --l-list 1,2,4,8,16 --replicas 10
"""
from django.conf import settings

from analysis.observables import c_of_l
from core.management.base import ZRPCommand
from core.pipelines import stationary_one_block
from core.reports import write_report
from environment.storage import load_environment
from environment.tiles import decompose_tiles
from measures.fugacity import get_fugacity_table
from measures.jump_rates import JUMP_RATES


def parse_ints(text):
    return [int(v) for v in text.split(',') if v.strip()]


class Command(ZRPCommand):
    help = 'One-block statistics under the stationary product measure'
    record_kind = 'one-block'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--env', type=str, required=True, help='Environment file')
        parser.add_argument('--rho', type=float, required=True, help='Stationary density')
        parser.add_argument('--g', type=str, default='const1', choices=sorted(JUMP_RATES))
        parser.add_argument('--l-list', type=str, default='1,2,4,8,16', help='Comma-separated half-windows')
        parser.add_argument('--replicas', type=int, default=1)
        parser.add_argument('--seed', type=int, default=0, help='Master seed')
        parser.add_argument('--out', type=str, default=None, help='Output JSON file')

    def run(self, **options):
        env = load_environment(options['env'])
        table = get_fugacity_table(options['g'], rho_max=settings.ZRP_RHO_MAX)
        windows = parse_ints(options['l_list'])
        report = stationary_one_block(
            env, table, options['rho'], windows, options['replicas'], options['seed'],
            workers=settings.ZRP_THREADS,
        )
        decomp = decompose_tiles(env)
        report['c_of_l'] = [c_of_l(decomp, l) for l in windows]
        if options['out']:
            write_report(report, options['out'])
        self.record(options, report, config={k: report[k] for k in ('rho', 'g', 'replicas', 'master_seed', 'l')})
        for l, value, se in zip(report['l'], report['one_block'], report['one_block_stderr']):
            self.stdout.write(f'l={l}: {value:.5f} +/- {se:.5f}')
        self.stdout.write(self.style.SUCCESS('One-block sweep finished'))
