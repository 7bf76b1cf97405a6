"""Curve CSV files: first row is the grid, each later row one curve."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..errors import InputFormatError
from ..fspace import Grid, PairedDiffSample


def _parse_float(cell: str, where: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise InputFormatError(f"{where}: non-numeric cell {cell!r}") from None
    if not math.isfinite(value):
        raise InputFormatError(f"{where}: non-finite cell {cell!r}")
    return value


def read_curves(path: str | Path) -> tuple[Grid, np.ndarray]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputFormatError(f"{path}: need a grid row and at least one curve")
    header = [_parse_float(c, f"{path} line 1") for c in rows[0]]
    points = np.array(header)
    if np.any(np.diff(points) <= 0):
        raise InputFormatError(f"{path}: grid points must be strictly increasing")
    values = np.empty((len(rows) - 1, points.size))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != points.size:
            raise InputFormatError(f"{path} line {i}: {len(row)} cells, expected {points.size}")
        values[i - 2] = [_parse_float(c, f"{path} line {i}") for c in row]
    return Grid.from_points(points), values


def parse_curves_csv(path: str | Path, y_path: str | Path | None = None) -> PairedDiffSample:
    """Difference sample from one ``W`` file, or from row-aligned ``X`` and ``Y``
    files (diffs ``Y - X``)."""
    grid, x = read_curves(path)
    if y_path is None:
        return PairedDiffSample(grid, x)
    grid_y, y = read_curves(y_path)
    if not grid.same_as(grid_y):
        raise InputFormatError("X and Y files use different grids")
    if x.shape[0] != y.shape[0]:
        raise InputFormatError(f"X has {x.shape[0]} curves but Y has {y.shape[0]}")
    return PairedDiffSample.from_pairs(grid, x, y)


def format_curves(grid: Grid, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([repr(float(t)) for t in grid.points])
    for row in np.atleast_2d(values):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_curves(path: str | Path, grid: Grid, values: np.ndarray) -> None:
    Path(path).write_text(format_curves(grid, values), encoding="utf-8")


def write_table(path: str | Path | None, rows: list[dict], columns: list[str],
                config: dict | None = None) -> str:
    """CSV with an optional leading ``# config: {...}`` comment line."""
    buf = io.StringIO()
    if config is not None:
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_table_config(path: str | Path) -> dict | None:
    """Config block embedded by ``write_table``."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("# config: "):
        return json.loads(first[len("# config: "):])
    return None


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
