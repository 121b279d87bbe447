"""
JSON and CSV artifacts written by the pipelines and commands.

Reports are written with sorted keys and a fixed float repr so two runs
with the same master seed produce byte-identical files.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from core import constants
from core.exceptions import ReportInputError


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _to_builtin(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no inf/nan literals
        return 'inf' if value > 0 else ('-inf' if value < 0 else 'nan')
    if isinstance(value, Path):
        return str(value)
    return value


def report_json(report):
    return json.dumps(_to_builtin(report), sort_keys=True, indent=2) + '\n'


def write_report(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report), encoding='utf-8')
    return path


def read_report(path):
    return json.loads(Path(path).read_text(encoding='utf-8'))


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv_columns(path):
    """Read a headed numeric CSV into a dict of numpy columns."""
    try:
        with Path(path).open(newline='', encoding='utf-8') as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [row for row in reader if row]
        columns = list(zip(*rows)) if rows else [()] * len(header)
        return {name: np.asarray(col, dtype=float) for name, col in zip(header, columns)}
    except (OSError, UnicodeDecodeError, StopIteration, ValueError) as exc:
        raise ReportInputError(constants.INPUT_UNREADABLE.format(path=path, reason=str(exc) or 'empty file')) from exc
