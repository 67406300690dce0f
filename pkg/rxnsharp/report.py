"""
rxnsharp.report
===============

Plot-ready output files: CSV tables and JSON reports.

Every file is written atomically (temporary file in the destination
directory, then rename) so an interrupted run never leaves a half-written
table behind. JSON is written with sorted keys and numpy values converted
to plain Python; non-finite numbers become ``null``.
"""

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from rxnsharp.config import version

import logging
logger = logging.getLogger(__file__)


def atomic_write(path, text: str) -> Path:
    """
    Write `text` to `path` through a temporary file and an atomic rename.

    Parameters
    ----------
    path : str or Path
        Destination; missing parent directories are created.
    text : str
        Full file content.

    Returns
    -------
    Path
        The destination path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=str(path.parent))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as stream:
            stream.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug('wrote %s', path)
    return path


def to_jsonable(obj):
    """Recursively convert numpy values, tuples and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(value) for value in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_json(payload) -> str:
    """
    Serialize a report payload as indented JSON with sorted keys.

    Parameters
    ----------
    payload : dict
        Report content; converted with `to_jsonable` first.

    Returns
    -------
    str
        JSON text ending with a newline.
    """
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(path, payload) -> Path:
    """Atomically write `payload` to `path` as produced by `dumps_json`."""
    return atomic_write(path, dumps_json(payload))


def _cell(value) -> str:
    """CSV text of one value: lower-case booleans, ``repr`` floats, empty for non-finite."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else ''
    return str(value)


def csv_text(header, rows) -> str:
    """Render a header row and data rows as CSV text."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(path, header, rows) -> Path:
    """
    Atomically write a CSV table.

    Parameters
    ----------
    path : str or Path
        Destination file.
    header : sequence of str
        Column names.
    rows : iterable of sequence
        Data rows; cells are rendered by `_cell`.

    Returns
    -------
    Path
    """
    return atomic_write(path, csv_text(header, rows))


def density_csv(path, grid) -> Path:
    """Columns ``x,density,log_density`` of a `DensityGrid`."""
    rows = zip(grid.x, grid.values, grid.log_values)
    return write_csv(path, ('x', 'density', 'log_density'), rows)


def histogram_csv(path, histogram) -> Path:
    """Columns ``state,count`` of an `EnsembleHistogram`."""
    return write_csv(path, ('state', 'count'), histogram.counts.items())


def time_series_csv(path, times, samples) -> Path:
    """One row per sample time: ``t,cell_0,cell_1,...``."""
    samples = np.asarray(samples)
    header = ['t'] + [f'cell_{j}' for j in range(samples.shape[0])]
    rows = ([t] + column.tolist() for t, column in zip(times, samples.T))
    return write_csv(path, header, rows)


def stationary_csv(path, vector) -> Path:
    """Columns ``state,prob`` of a `StationaryVector` or `TransientVector`."""
    return write_csv(path, ('state', 'prob'), zip(vector.states.tolist(), vector.probs))


def sweep_csv(path, rows) -> Path:
    """Long-format ``K,region,metric,value`` table."""
    return write_csv(path, ('K', 'region', 'metric', 'value'), rows)


def sidecar(cfg, **extra) -> dict:
    """
    Provenance payload embedding the resolved run configuration.

    Parameters
    ----------
    cfg : RunConfig
        The resolved configuration.
    **extra
        Additional fields, e.g. ``K``, ``seed``, ``t_end``.
    """
    payload = dict(rxnsharp=version, config=cfg.to_dict())
    payload.update(extra)
    return payload
