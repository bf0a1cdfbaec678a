"""CSV ingestion into :class:`PairedSample`."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dependence import PairedSample
from .metric import MetricSpec, load_matrix


class DatasetError(ValueError):
    pass


def parse_metric(text: str, dimension: int | None = None) -> MetricSpec:
    """``euclidean``, ``manhattan``, ``discrete`` or ``matrix:<path>``."""
    if text.startswith("matrix:"):
        return MetricSpec.precomputed(load_matrix(text[len("matrix:"):]))
    if text in ("euclidean", "manhattan", "discrete"):
        return MetricSpec(text, dimension)
    raise DatasetError(f"unknown metric {text!r}")


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    x_cols: list[str] = field(default_factory=lambda: ["x"])
    y_cols: list[str] = field(default_factory=lambda: ["y"])
    z_cols: list[str] | None = None
    metric_x: str = "euclidean"
    metric_y: str = "euclidean"
    metric_z: str = "euclidean"
    seed: int = 0
    permutations: int = 199
    format: str = "json"
    timings: bool = False
    full: bool = False
    y_input: Path | None = None

    def selections(self) -> list[list[str]]:
        out = [self.x_cols, self.y_cols]
        if self.z_cols:
            out.append(self.z_cols)
        return out


def read_columns(path, columns: list[str]) -> dict[str, np.ndarray]:
    """Numeric columns of a CSV with a header row; every cell must parse."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise DatasetError(f"{path}: missing column(s) {', '.join(missing)}")
        where = {c: header.index(c) for c in columns}
        values: dict[str, list[float]] = {c: [] for c in columns}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                raise DatasetError(f"{path}: line {lineno} is blank")
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: line {lineno} has {len(row)} cells, header has {len(header)}"
                )
            for c, j in where.items():
                cell = row[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric cell {cell!r} at line {lineno}, column {c!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DatasetError(
                        f"{path}: non-finite cell {cell!r} at line {lineno}, column {c!r}"
                    )
                values[c].append(v)
    if not values[columns[0]]:
        raise DatasetError(f"{path}: no data rows")
    return {c: np.asarray(v) for c, v in values.items()}


def _margin(cols, data, metric_text):
    metric = parse_metric(metric_text, len(cols))
    pts = np.column_stack([data[c] for c in cols])
    if metric.kind == "precomputed":
        if len(cols) != 1:
            raise DatasetError("a matrix metric takes exactly one index column")
        pts = pts[:, 0]
        if not np.all(pts == np.round(pts)):
            raise DatasetError("matrix metric columns must hold integer indices")
    return pts, metric


def parse_dataset(path, config: RunConfig) -> PairedSample:
    selections = config.selections()
    flat = [c for cols in selections for c in cols]
    if any(not cols for cols in selections):
        raise DatasetError("every margin needs at least one column")
    if len(set(flat)) != len(flat):
        raise DatasetError("column selections must be disjoint")
    data = read_columns(path, flat)
    x, mx = _margin(config.x_cols, data, config.metric_x)
    y, my = _margin(config.y_cols, data, config.metric_y)
    if config.z_cols:
        z, mz = _margin(config.z_cols, data, config.metric_z)
        return PairedSample(x, y, mx, my, z, mz)
    return PairedSample(x, y, mx, my)
