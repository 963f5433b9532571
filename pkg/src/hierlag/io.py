"""Reading and writing datasets and fit results.

Two CSV layouts are understood. *Wide* files hold one series each, as a single
column under the header ``value``. *Long* files hold any number of series as
rows ``series_id,t,value``; rows are ordered by ``t`` within each series.
Floats are written with ``repr`` so that a save/load round trip is exact.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .design import MultiSeriesDataset
from .errors import EmptySeries, ParseError
from .pipeline import FitResult

__all__ = ["load_dataset", "save_long", "save_wide", "fit_result_to_json", "save_fit_result",
           "load_json", "dump_json", "format_float"]

WIDE_HEADER = ["value"]
LONG_HEADER = ["series_id", "t", "value"]
FORMATS = ("auto", "wide", "long")


def format_float(x: float) -> str:
    """Shortest round-trip decimal form of ``x``."""
    return repr(float(x))


def _parse_float(text: str, line: int, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(line, f"not a number: {text!r}", path) from None
    if not math.isfinite(v):
        raise ParseError(line, f"non-finite value: {text!r}", path)
    return v


def _rows(path: Path):
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh), start=1):
            if row and any(cell.strip() for cell in row):
                yield i, [cell.strip() for cell in row]


def _read_wide(path: Path) -> np.ndarray:
    rows = _rows(path)
    first = next(rows, None)
    if first is None or first[1] != WIDE_HEADER:
        raise ParseError(first[0] if first else 1, f"expected header {WIDE_HEADER}", path)
    values = []
    for line, row in rows:
        if len(row) != 1:
            raise ParseError(line, f"expected 1 field, found {len(row)}", path)
        values.append(_parse_float(row[0], line, path))
    if not values:
        raise EmptySeries(path.stem)
    return np.array(values)


def _read_long(path: Path, into: dict) -> None:
    rows = _rows(path)
    first = next(rows, None)
    if first is None or first[1] != LONG_HEADER:
        raise ParseError(first[0] if first else 1, f"expected header {LONG_HEADER}", path)
    for line, row in rows:
        if len(row) != 3:
            raise ParseError(line, f"expected 3 fields, found {len(row)}", path)
        sid, t_text, v_text = row
        if not sid:
            raise ParseError(line, "empty series_id", path)
        try:
            t = int(t_text)
        except ValueError:
            raise ParseError(line, f"time index is not an integer: {t_text!r}", path) from None
        series = into.setdefault(sid, {})
        if t in series:
            raise ParseError(line, f"duplicate time {t} for series {sid!r}", path)
        series[t] = _parse_float(v_text, line, path)


def _detect(path: Path) -> str:
    for line, row in _rows(path):
        if row == WIDE_HEADER:
            return "wide"
        if row == LONG_HEADER:
            return "long"
        raise ParseError(line, f"unrecognised header {row}", path)
    raise EmptySeries(path.stem)


def load_dataset(paths: Sequence | str | Path, format: str = "auto") -> MultiSeriesDataset:
    """Read a dataset from one or more CSV files.

    Parameters
    ----------
    paths : path or sequence of paths
        Wide files contribute one series each, labelled by file stem. Long
        files contribute one series per ``series_id`` in order of first
        appearance.
    format : {"auto", "wide", "long"}
        ``"auto"`` decides per file from its header.

    Raises
    ------
    ParseError
        With the 1-based line number of the offending row.
    EmptySeries
        When a wide file has a header but no values.
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    if isinstance(paths, (str, Path)):
        paths = [paths]
    series: dict = {}
    for p in map(Path, paths):
        kind = _detect(p) if format == "auto" else format
        if kind == "wide":
            if p.stem in series:
                raise ValueError(f"duplicate series label {p.stem!r}")
            series[p.stem] = _read_wide(p)
        else:
            long_series: dict = {}
            _read_long(p, long_series)
            for sid, pts in long_series.items():
                if sid in series:
                    raise ValueError(f"duplicate series label {sid!r}")
                series[sid] = np.array([pts[t] for t in sorted(pts)])
    if not series:
        raise ValueError("no series found")
    for sid, x in series.items():
        if x.size == 0:
            raise EmptySeries(sid)
    return MultiSeriesDataset(list(series.values()), list(series.keys()))


def save_long(dataset: MultiSeriesDataset, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LONG_HEADER)
        for lab, x in zip(dataset.labels, dataset.series):
            for t, v in enumerate(x):
                w.writerow([lab, t, format_float(v)])
    return path


def save_wide(dataset: MultiSeriesDataset, directory) -> list[Path]:
    """One ``<label>.csv`` per series in ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for lab, x in zip(dataset.labels, dataset.series):
        p = directory / f"{lab}.csv"
        with open(p, "w") as fh:
            fh.write("value\n")
            fh.writelines(format_float(v) + "\n" for v in x)
        out.append(p)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def fit_result_to_json(fr: FitResult, extra: dict | None = None) -> str:
    payload = fr.to_dict()
    if extra:
        payload.update(extra)
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True)


def save_fit_result(fr: FitResult, path, extra: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(fit_result_to_json(fr, extra) + "\n")
    return path


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path=None) -> str:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
