"""
Snapshot files: one CSV per replica and time, columns (site, row, occupancy).

Layout under an output directory:

    <out>/t_<time>/replica_<index>.csv
"""
from pathlib import Path

import numpy as np

from core import constants
from core.exceptions import ReportInputError
from core.reports import read_csv_columns, write_csv

from .configuration import Configuration


def snapshot_dir(out, t):
    return Path(out) / f't_{t:g}'


def snapshot_path(out, t, index):
    return snapshot_dir(out, t) / f'replica_{index:04d}.csv'


def write_snapshot(config, path):
    sites = np.repeat(np.arange(config.n_sites), 2)
    rows = np.tile([1, -1], config.n_sites)
    return write_csv(path, ('site', 'row', 'occupancy'), zip(sites.tolist(), rows.tolist(), config.occupancy.tolist()))


def read_snapshot(path):
    columns = read_csv_columns(path)
    if set(columns) != {'site', 'row', 'occupancy'} or not len(columns['site']):
        raise ReportInputError(constants.NOT_A_SNAPSHOT.format(path=path))
    sites = columns['site'].astype(np.int64)
    rows = columns['row'].astype(np.int64)
    occupancy = np.zeros(2 * (int(sites.max()) + 1), dtype=np.int64)
    occupancy[2 * sites + (rows == -1)] = columns['occupancy'].astype(np.int64)
    return Configuration(occupancy)


def read_snapshot_dir(directory):
    """Every replica snapshot in ``directory``, in replica order."""
    paths = sorted(Path(directory).glob('replica_*.csv'))
    if not paths:
        raise ReportInputError(constants.NO_SNAPSHOTS_IN_DIR.format(directory=directory))
    return [read_snapshot(path) for path in paths]
