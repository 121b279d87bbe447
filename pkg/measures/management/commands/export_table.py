"""
Write the fugacity table of a jump rate as CSV.

Usage:
    python manage.py export_table --g const1 --out table.csv
"""
from django.conf import settings

from core.management.base import ZRPCommand
from measures.fugacity import TABLE_POINTS, export_table_csv, get_fugacity_table
from measures.jump_rates import JUMP_RATES


class Command(ZRPCommand):
    help = 'Export the (phi, Z, R) fugacity table'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--g', type=str, required=True, choices=sorted(JUMP_RATES), help='Jump rate')
        parser.add_argument('--rho-max', type=float, default=None, help='Upper end of the density range')
        parser.add_argument('--points', type=int, default=TABLE_POINTS, help='Number of table nodes')
        parser.add_argument('--out', type=str, required=True, help='Output CSV file')

    def run(self, **options):
        rho_max = options['rho_max'] or settings.ZRP_RHO_MAX
        table = get_fugacity_table(options['g'], rho_max=rho_max, points=options['points'])
        path = export_table_csv(table, options['out'])
        self.stdout.write(self.style.SUCCESS(f'Wrote {path} ({len(table.phi_nodes)} rows)'))
