"""Command-line entry point: ``hierlag {simulate,fit,eval,experiment}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .diagnostics import (estimation_error, false_discoveries, one_step_prediction_mse,
                          pad_coefficients)
from .errors import HierLagError
from .experiment import RunConfig, run_experiment, simulate_dataset
from .io import dump_json, load_dataset, load_json, save_fit_result, save_long, save_wide
from .pipeline import MODES, TheoryConstants, run_pipeline
from .solver import SolverConfig
from .ar_core import stability_report


def _constants(args) -> TheoryConstants:
    return TheoryConstants(A=args.A, delta=args.delta, epsilon=args.epsilon,
                           lag_constant_override=args.lag_constant,
                           lambda_override=args.lam)


def cmd_simulate(args) -> int:
    lengths = args.n if len(args.n) > 1 else args.n * args.M
    ds = simulate_dataset(args.coeffs, lengths, args.sigma, args.seed, args.burn_in)
    if args.format == "wide":
        for p in save_wide(ds, args.output):
            print(p)
    else:
        print(save_long(ds, args.output))
    return 0


def cmd_fit(args) -> int:
    ds = load_dataset(args.input)
    tuning = "theory" if args.theory else ("cv" if args.cv else "noise")
    solver = SolverConfig(max_iters=args.max_iters)
    fr = run_pipeline(ds, _constants(args), args.mode, solver, L=args.L, tuning=tuning,
                      sigma_max=args.sigma_max)
    extra = {"inputs": [str(p) for p in args.input]}
    save_fit_result(fr, args.output, extra)
    print(f"L={fr.L_input} lambda={fr.lambda_used:.6g} ({fr.lambda_source}) "
          f"L0_hat={fr.L0_hat} mode={fr.mode} converged={fr.trace.converged}")
    return 0 if fr.trace.converged else 1


def cmd_eval(args) -> int:
    fit = load_json(args.fit)
    truth = load_json(args.truth)
    beta_hat = np.asarray(fit["beta_hat"], dtype=float)
    M, L = beta_hat.shape
    coeffs = truth["coeffs"]
    L0_true = np.atleast_2d(coeffs).shape[1]
    width = max(L, L0_true)
    est = pad_coefficients(beta_hat, M, width)
    true = pad_coefficients(coeffs, M, width)
    lam = float(fit["lambda_used"])
    reports = [stability_report(row if len(row) else [0.0]) for row in fit["beta_tilde"]]
    if fit["mode"] == "identical":
        reports = reports[:1]
    out = {
        "est_error": estimation_error(est, true),
        "false_discoveries": false_discoveries(est, true, lam),
        "true_lag_recovered": fit["L0_hat"] == L0_true,
        "stability": sum(r.is_stable for r in reports) / len(reports),
    }
    if args.input:
        out["prediction_mse"] = one_step_prediction_mse(np.asarray(fit["beta_tilde"]).reshape(M, -1),
                                                        load_dataset(args.input))
    text = dump_json(out, args.output)
    print(text)
    return 0


def cmd_experiment(args) -> int:
    raw = load_json(args.config)
    if args.output:
        raw["output_path"] = args.output
    if args.jobs:
        raw["n_jobs"] = args.jobs
    config = RunConfig.from_dict(raw)
    if config.command != "experiment":
        raise ValueError(f"config command is {config.command!r}, expected 'experiment'")
    report = run_experiment(config)
    if config.output_path:
        report.write(config.output_path, args.format or config.format)
    else:
        sys.stdout.write(report.to_json() + "\n" if (args.format or config.format) == "json"
                         else report.to_csv())
    for row in report.errors:
        print(f"row cell={row['cell']} seed={row['seed']}: {row['status']}", file=sys.stderr)
    return 1 if report.errors else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hierlag",
        description="Joint lag selection and AR coefficient estimation for several series.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate AR series to CSV")
    p.add_argument("--coeffs", type=float, nargs="+", required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, nargs="+", required=True,
                   help="series length, or one length per series")
    p.add_argument("--M", type=int, default=1, help="number of series when one length is given")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--format", choices=("long", "wide"), default="long",
                   help="wide writes one file per series into the output directory")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the pipeline to CSV data")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--L", type=int, default=None, help="lag bound (default: sample-size rule)")
    tune = p.add_mutually_exclusive_group()
    tune.add_argument("--lambda", dest="lam", type=float, default=None)
    tune.add_argument("--theory", action="store_true", help="theory-mode penalty level")
    tune.add_argument("--cv", action="store_true", help="cross-validated penalty level")
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--lag-constant", type=float, default=None,
                   help="replace the sample-size constant of the lag-bound rule")
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=50_000)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="score a fit against true coefficients")
    p.add_argument("--fit", required=True)
    p.add_argument("--truth", required=True, help='JSON with "coeffs" (one vector or one per series)')
    p.add_argument("--input", nargs="*", default=None, help="data for the prediction error")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HierLagError, ValueError, OSError) as exc:
        print(f"hierlag {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
