"""Monte Carlo experiment harness.

A run configuration names a grid of cells (number of series, true
coefficients, series length) and a list of replicate seeds. Every
``(cell, seed)`` pair simulates a dataset, runs the pipeline and evaluates the
fit against the truth. The report holds one row per pair, ordered by cell
then seed, plus a summary with the log-log slope of the median estimation
error against the regression sample size ``D``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .ar_core import ARProcessSpec, simulate_ar
from .design import MultiSeriesDataset
from .diagnostics import (estimation_error, false_discoveries, one_step_prediction_mse,
                          pad_coefficients)
from .errors import HierLagError
from .io import dump_json, format_float
from .pipeline import MODES, TUNINGS, TheoryConstants, run_pipeline
from .solver import SolverConfig

__all__ = ["SCHEMA_VERSION", "COLUMNS", "ExperimentGrid", "RunConfig", "ExperimentReport",
           "simulate_dataset", "run_experiment", "loglog_slope"]

SCHEMA_VERSION = 1
COLUMNS = ["row_type", "cell", "seed", "M", "L0", "L", "D", "lambda", "L0_hat", "est_error",
           "false_discoveries", "stability", "prediction_mse", "runtime_ms", "status", "slope"]
COMMANDS = ("simulate", "fit", "eval", "experiment")


def simulate_dataset(coeffs, lengths: Sequence[int], sigma: float = 1.0, seed: int = 0,
                     burn_in: int | None = None, labels=None) -> MultiSeriesDataset:
    """Independent realisations of one AR process, one per entry of ``lengths``.

    Series ``m`` is simulated with the ``m``-th word of
    ``numpy.random.SeedSequence(seed).generate_state(M)`` as its seed.
    """
    spec = ARProcessSpec(coeffs, sigma)
    seeds = np.random.SeedSequence(seed).generate_state(len(lengths))
    series = [simulate_ar(spec, int(n), burn_in, int(s)).values for n, s in zip(lengths, seeds)]
    return MultiSeriesDataset(series, labels)


@dataclass(frozen=True)
class ExperimentGrid:
    """Cells are the Cartesian product of ``M``, ``coeffs`` and ``n``.

    Series lengths are ``n + k`` with ``k`` uniform on ``0..n_spread``. ``L``
    fixes the lag bound (otherwise it comes from the sample-size rule) and
    ``holdout`` > 0 scores prediction on fresh series of that length.
    """

    M: tuple = (4,)
    coeffs: tuple = ((0.5, -0.3),)
    n: tuple = (500,)
    n_spread: int = 0
    sigma: float = 1.0
    L: int | None = None
    tuning: str = "noise"
    holdout: int = 0

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        object.__setattr__(self, "coeffs", tuple(tuple(float(b) for b in c) for c in self.coeffs))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if not (self.M and self.coeffs and self.n):
            raise ValueError("grid axes must be nonempty")
        if self.tuning not in TUNINGS:
            raise ValueError(f"tuning must be one of {TUNINGS}")
        if self.n_spread < 0 or self.holdout < 0:
            raise ValueError("n_spread and holdout must be nonnegative")

    def cells(self) -> list[tuple[int, tuple, int]]:
        return list(itertools.product(self.M, self.coeffs, self.n))


@dataclass(frozen=True)
class RunConfig:
    command: str = "experiment"
    input_paths: tuple = ()
    output_path: str | None = None
    constants: TheoryConstants = field(default_factory=TheoryConstants)
    solver: SolverConfig = field(default_factory=SolverConfig)
    mode: str = "auto"
    seeds: tuple = (0,)
    lambda_grid: tuple | None = None
    format: str = "csv"
    grid: ExperimentGrid = field(default_factory=ExperimentGrid)
    n_jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.command in ("simulate", "experiment") and not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if isinstance(d.get("constants"), dict):
            d["constants"] = TheoryConstants(**d["constants"])
        if isinstance(d.get("solver"), dict):
            d["solver"] = SolverConfig(**d["solver"])
        if isinstance(d.get("grid"), dict):
            d["grid"] = ExperimentGrid(**d["grid"])
        for key in ("input_paths", "seeds"):
            if key in d:
                d[key] = tuple(d[key])
        if d.get("lambda_grid") is not None:
            d["lambda_grid"] = tuple(float(v) for v in d["lambda_grid"])
        return cls(**d)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["constants"] = self.constants.to_dict()
        return out


@dataclass
class ExperimentReport:
    rows: list
    summary: dict
    config: dict

    @property
    def errors(self) -> list:
        return [r for r in self.rows if r["status"] != "ok"]

    def to_json(self) -> str:
        return dump_json({"schema_version": SCHEMA_VERSION, "config": self.config,
                          "rows": self.rows, "summary": self.summary})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows + [self.summary_row()]:
            w.writerow([_cell(r.get(c)) for c in COLUMNS])
        return buf.getvalue()

    def summary_row(self) -> dict:
        s = self.summary
        return {"row_type": "summary", "est_error": s["median_est_error"],
                "stability": s["stability_census"], "slope": s["loglog_slope"],
                "status": "ok" if not s["n_errors"] else f"{s['n_errors']} rows errored"}

    def write(self, path, format: str | None = None) -> Path:
        path = Path(path)
        format = format or ("json" if path.suffix == ".json" else "csv")
        text = self.to_json() + "\n" if format == "json" else self.to_csv()
        path.write_text(text)
        return path


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else ""
    return str(v)


def loglog_slope(D, err) -> float | None:
    """Least-squares slope of ``log(err)`` on ``log(D)``; ``None`` with fewer than two points."""
    D = np.asarray(D, dtype=float)
    err = np.asarray(err, dtype=float)
    if D.size < 2 or np.unique(D).size < 2 or np.any(err <= 0):
        return None
    return float(np.polyfit(np.log(D), np.log(err), 1)[0])


def _run_row(task) -> dict:
    config, cell_index, (M, coeffs, n), seed = task
    grid = config.grid
    row = {"row_type": "data", "cell": cell_index, "seed": seed, "M": M, "L0": len(coeffs)}
    start = time.perf_counter()
    try:
        rng = np.random.default_rng([seed, cell_index])
        lengths = n + rng.integers(0, grid.n_spread + 1, size=M)
        data = simulate_dataset(coeffs, lengths, grid.sigma, seed=int(rng.integers(2 ** 63)))
        holdout = None
        if grid.holdout:
            holdout = simulate_dataset(coeffs, [grid.holdout] * M, grid.sigma,
                                       seed=int(rng.integers(2 ** 63)))
        fr = run_pipeline(data, config.constants, config.mode, config.solver, L=grid.L,
                          tuning=grid.tuning, lambda_grid=config.lambda_grid)
        width = max(fr.L_input, len(coeffs))
        est = pad_coefficients(fr.beta_hat_matrix, M, width)
        truth = pad_coefficients(coeffs, M, width)
        reports = fr.consolidated_stability
        row.update({
            "L": fr.L_input,
            "D": int(sum(max(x.size - fr.L_input, 0) for x in data.series)),
            "lambda": fr.lambda_used,
            "L0_hat": fr.L0_hat,
            "est_error": estimation_error(est, truth),
            "false_discoveries": false_discoveries(est, truth, fr.lambda_used),
            "stability": sum(r.is_stable for r in reports) / len(reports) if reports else 1.0,
            "prediction_mse": one_step_prediction_mse(fr.beta_tilde, holdout or data),
            "status": "ok",
        })
    except (HierLagError, ValueError, np.linalg.LinAlgError) as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    row["runtime_ms"] = 1000.0 * (time.perf_counter() - start)
    return row


def _summarise(rows: list) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    by_D: dict = {}
    for r in ok:
        by_D.setdefault(r["D"], []).append(r["est_error"])
    Ds = sorted(by_D)
    medians = [float(np.median(by_D[d])) for d in Ds]
    return {
        "n_rows": len(rows),
        "n_errors": len(rows) - len(ok),
        "median_est_error": float(np.median([r["est_error"] for r in ok])) if ok else None,
        "median_est_error_by_D": {str(d): m for d, m in zip(Ds, medians)},
        "loglog_slope": loglog_slope(Ds, medians),
        "lag_recovery_rate": float(np.mean([r["L0_hat"] == r["L0"] for r in ok])) if ok else None,
        "zero_false_discovery_rate":
            float(np.mean([r["false_discoveries"] == 0 for r in ok])) if ok else None,
        "stability_census": float(np.mean([r["stability"] for r in ok])) if ok else None,
    }


def run_experiment(config: RunConfig) -> ExperimentReport:
    """Run every ``(cell, seed)`` pair and assemble the report.

    Rows that raise are kept with an ``error: ...`` status so that partial
    results survive. With ``n_jobs > 1`` rows are computed in a process pool;
    the report order is always by cell, then seed.
    """
    tasks = [(config, c, cell, seed) for c, cell in enumerate(config.grid.cells())
             for seed in config.seeds]
    if config.n_jobs > 1:
        with ProcessPoolExecutor(config.n_jobs) as pool:
            rows = list(pool.map(_run_row, tasks))
    else:
        rows = [_run_row(t) for t in tasks]
    return ExperimentReport(rows, _summarise(rows), config.to_dict())
