"""Estimation error against total sample size.

Four AR(2) series with a fixed lag bound of 5 are simulated at four sizes so
that the regression sample size ``D`` doubles from 2000 to 16000. The median
Euclidean error over the replicates is printed for each size together with
the least-squares slope on the log-log scale; a slope near ``-1/2`` is the
square-root rate.

Run with ``python3 demos/rate_sweep.py [n_seeds] [n_jobs]``.
"""
import sys

from hierlag.experiment import ExperimentGrid, RunConfig, run_experiment

L = 5
SIZES = (2000, 4000, 8000, 16000)


def main(n_seeds=10, n_jobs=1):
    grid = ExperimentGrid(M=(4,), coeffs=((0.5, -0.3),), n=tuple(D // 4 + L for D in SIZES), L=L)
    report = run_experiment(RunConfig(mode="identical", seeds=tuple(range(n_seeds)), grid=grid,
                                      n_jobs=n_jobs))
    s = report.summary
    print(f"{'D':>6s} {'median error':>13s}")
    for D, err in s["median_est_error_by_D"].items():
        print(f"{D:>6s} {err:13.4f}")
    print(f"log-log slope: {s['loglog_slope']:.3f}")
    print(f"lag recovered in {s['lag_recovery_rate']:.0%} of rows, "
          f"no false discoveries in {s['zero_false_discovery_rate']:.0%}, "
          f"stable fits {s['stability_census']:.0%}")
    if report.errors:
        print(f"{len(report.errors)} rows failed")


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
