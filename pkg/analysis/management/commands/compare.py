"""
Compare replica snapshots with a PDE solution.

Usage:
    python manage.py compare --snapshots runs/sim/t_0.05 --pde rho.csv --block 4 --out compare.json
"""
import numpy as np

from analysis.hydro import compare_profiles, empirical_profile
from core.exceptions import ReportInputError
from core.management.base import ZRPCommand
from core.reports import read_csv_columns, write_report
from dynamics.storage import read_snapshot_dir
from pde.solver import DensityProfile


def load_pde_csv(path):
    columns = read_csv_columns(path)
    if 'rho' not in columns:
        raise ReportInputError(f'{path} has no rho column')
    order = np.argsort(columns.get('x', np.arange(len(columns['rho']))))
    return DensityProfile(values=columns['rho'][order])


class Command(ZRPCommand):
    help = 'L1 comparison of empirical block profiles against a PDE profile'
    record_kind = 'compare'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--snapshots', type=str, required=True, help='Directory of replica snapshots')
        parser.add_argument('--pde', type=str, required=True, help='CSV with columns x, rho')
        parser.add_argument('--block', type=int, default=None, help='Block size in sites')
        parser.add_argument('--out', type=str, required=True, help='Output JSON file')

    def run(self, **options):
        snapshots = read_snapshot_dir(options['snapshots'])
        empirical = empirical_profile(snapshots, options['block'])
        report = compare_profiles(empirical, load_pde_csv(options['pde'])).to_dict()
        report.update({
            'snapshots': options['snapshots'],
            'pde': options['pde'],
            'block_size': empirical.block_size,
            'n': empirical.n,
        })
        write_report(report, options['out'])
        self.record(options, report, config={'block_size': empirical.block_size})
        self.stdout.write(self.style.SUCCESS(
            f"L1 error {report['l1_error']:.5f} (pooled SE {report['pooled_se']:.5f}, {empirical.replicas} replicas)"
        ))
