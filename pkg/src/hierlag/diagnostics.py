"""Measured counterparts of the estimator's guarantees.

Each function compares a fit with the truth or with a theoretical quantity:
estimation error, false discoveries, the effective-noise surrogate, empirical
restricted-eigenvalue ratios, spectral bands of the reverse characteristic
polynomial, one-step prediction error and the fraction of stable fitted models.
The right-hand sides of the error and false-discovery bounds are provided as
formulas so that they can be reported next to the measured values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .ar_core import DEFAULT_GRID_POINTS, stability_report
from .design import DesignSystem, MultiSeriesDataset, build_design, lagged_block
from .errors import DegenerateProbe, DimensionMismatch, LagTooLarge, UnstableProcess
from .hiergroup import HierGroupStructure, dual_norm_upper_bound
from .pipeline import FitResult, TheoryConstants

__all__ = ["GuaranteeReport", "pad_coefficients", "estimation_error", "false_discoveries",
           "effective_noise_surrogate", "re_sparsity", "empirical_re_ratio", "spectral_band",
           "one_step_prediction_mse", "stability_census", "min_noise_share",
           "effective_noise_level", "noise_sample_size", "estimation_error_bound",
           "false_discovery_bound", "evaluate_fit"]


@dataclass(frozen=True)
class GuaranteeReport:
    est_error_l2: float
    false_discoveries: int
    true_lag_recovered: bool
    effective_noise_surrogate: float
    re_min_ratio: float
    stability_fraction: float
    prediction_mse: float

    def __post_init__(self):
        for name in ("est_error_l2", "effective_noise_surrogate", "re_min_ratio",
                     "stability_fraction", "prediction_mse"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.stability_fraction > 1:
            raise ValueError("stability_fraction must lie in [0, 1]")
        if self.false_discoveries < 0:
            raise ValueError("false_discoveries must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def pad_coefficients(beta_true, M: int, L: int) -> np.ndarray:
    """Lay out true coefficients as a length ``M L`` vector.

    ``beta_true`` may be one vector shared by all series or an ``M``-row
    array, in either case with at most ``L`` lags; missing lags are zero.
    """
    b = np.asarray(beta_true, dtype=float)
    if b.ndim <= 1:
        b = np.tile(b.ravel(), (M, 1))
    if b.ndim != 2 or b.shape[0] != M:
        raise DimensionMismatch(f"true coefficients have shape {b.shape}, expected {M} rows")
    if b.shape[1] > L:
        raise DimensionMismatch(f"true lag {b.shape[1]} exceeds the fitted lag bound {L}")
    out = np.zeros((M, L))
    out[:, :b.shape[1]] = b
    return out.ravel()


def _as_flat(beta_hat, beta_true):
    bh = np.asarray(beta_hat, dtype=float).ravel()
    bt = np.asarray(beta_true, dtype=float).ravel()
    if bt.size < bh.size:
        bt = np.concatenate([bt, np.zeros(bh.size - bt.size)])
    if bt.size != bh.size:
        raise DimensionMismatch(f"estimate has {bh.size} entries, truth has {bt.size}")
    return bh, bt


def estimation_error(beta_hat, beta_true) -> float:
    """``||beta_hat - beta_true||_2``, the truth zero-padded to the estimate's length."""
    bh, bt = _as_flat(beta_hat, beta_true)
    return float(np.linalg.norm(bh - bt))


def false_discoveries(beta_hat, beta_true, lam: float) -> int:
    """Number of coordinates with ``|beta_hat_j| > lam`` whose true value is zero."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    bh, bt = _as_flat(beta_hat, beta_true)
    return int(np.count_nonzero((np.abs(bh) > lam) & (bt == 0)))


def effective_noise_surrogate(design: DesignSystem, residual_noise) -> float:
    """``(2/D) L^{-1/2} ||X^T U||_inf``, the sup-norm stand-in for ``(2/D) N*(X^T U)``."""
    u = np.asarray(residual_noise, dtype=float).ravel()
    if u.size != design.D:
        raise DimensionMismatch(f"noise has {u.size} entries, expected D={design.D}")
    structure = HierGroupStructure(design.M, design.L)
    return 2.0 / design.D * dual_norm_upper_bound(structure, design.rmatvec(u))


def re_sparsity(T: int, zeta: float, L: int) -> int:
    """``2 floor(T zeta^2 / (8 log L))``, the sparsity level of the RE bound."""
    if L < 2:
        raise ValueError("sparsity level needs L >= 2")
    return 2 * int(math.floor(T * zeta ** 2 / (8.0 * math.log(L))))


def empirical_re_ratio(block, sigma: float, epsilon: float, n_probes: int, s: int,
                       seed: int = 0) -> float:
    """Smallest ratio of ``||X_m v||^2`` to the restricted-eigenvalue lower bound.

    Probes are unit vectors with ``s`` nonzero Gaussian entries on a uniformly
    drawn support. For each probe the bound is
    ``(T sigma^2 eps^2 / 2) (||v||_2^2 - (2/s) ||v||_1^2)``; probes where the
    bracket is not positive carry no information and are skipped. A result of
    at least 1 means the bound held on every informative probe.

    Raises
    ------
    DegenerateProbe
        If every probe was skipped.
    """
    X = np.atleast_2d(np.asarray(block, dtype=float))
    T, L = X.shape
    if n_probes < 1:
        raise ValueError("n_probes must be positive")
    if not 1 <= s <= L:
        raise ValueError(f"s must lie in 1..{L}, got {s}")
    if sigma <= 0 or epsilon <= 0:
        raise ValueError("sigma and epsilon must be positive")
    rng = np.random.default_rng(seed)
    scale = T * sigma ** 2 * epsilon ** 2 / 2.0
    best = math.inf
    for _ in range(n_probes):
        v = np.zeros(L)
        v[rng.choice(L, size=s, replace=False)] = rng.standard_normal(s)
        v /= np.linalg.norm(v)
        bracket = 1.0 - (2.0 / s) * np.abs(v).sum() ** 2
        if bracket <= 0:
            continue
        Xv = X @ v
        best = min(best, float(Xv @ Xv) / (scale * bracket))
    if best == math.inf:
        raise DegenerateProbe(f"all {n_probes} probes had a nonpositive bracket (s={s})")
    return best


def spectral_band(coeffs, grid_points: int = DEFAULT_GRID_POINTS) -> tuple[float, float]:
    """``(min |f|^2, max |f|^2)`` over the unit circle for a stable polynomial."""
    rep = stability_report(coeffs, grid_points)
    if not rep.is_stable:
        raise UnstableProcess(f"spectral radius {rep.spectral_radius:.6g} >= 1")
    return rep.min_modulus ** 2, rep.max_modulus ** 2


def one_step_prediction_mse(beta_tilde, holdout: MultiSeriesDataset) -> float:
    """Pooled mean of ``(x_t - sum_l b_l x_{t-l})^2`` over series and times ``t >= L0``.

    ``beta_tilde`` is either one coefficient vector used for every series or
    one row per series. An empty vector predicts zero.
    """
    b = np.asarray(beta_tilde, dtype=float)
    if b.ndim <= 1:
        b = np.tile(b.ravel(), (holdout.M, 1))
    if b.ndim != 2 or b.shape[0] != holdout.M:
        raise DimensionMismatch(f"coefficients have shape {b.shape}, holdout has {holdout.M} series")
    L0 = b.shape[1]
    total, count = 0.0, 0
    for lab, x, coef in zip(holdout.labels, holdout.series, b):
        if x.size <= L0:
            raise LagTooLarge(lab, x.size, L0)
        if L0 == 0:
            r = x
        else:
            Xm, ym = lagged_block(x, L0)
            r = ym - Xm @ coef
        total += float(r @ r)
        count += r.size
    return total / count


def stability_census(fit_results: Sequence[FitResult]) -> float:
    """Fraction of consolidated fitted models that are stable."""
    reports = [rep for fr in fit_results for rep in fr.consolidated_stability]
    if not reports:
        raise ValueError("need at least one fitted model")
    return sum(rep.is_stable for rep in reports) / len(reports)


def min_noise_share(design: DesignSystem, sigmas) -> float:
    """``min_m T_m sigma_m^2 / D``."""
    sig = np.broadcast_to(np.asarray(sigmas, dtype=float), (design.M,))
    return float(np.min(np.asarray(design.block_sizes) * sig ** 2) / design.D)


def _log_term(M: int, L: int, delta: float) -> float:
    return math.log(M * L / delta)


def effective_noise_level(constants: TheoryConstants, M: int, L: int, D: int,
                          sigma_max: float, c_sharp: float) -> float:
    """``8 (84 A e)^{1/2} zeta^-1 (1+eps^-2+eps^-4) C#^{3/2} sigma_max^2 sqrt(L log(ML/delta) / (D M))``.

    The tuning level of theory mode is three times this value.
    """
    return (8.0 * math.sqrt(84.0 * constants.A * math.e) / constants.zeta
            * constants.stability_factor * c_sharp ** 1.5 * sigma_max ** 2
            * math.sqrt(L * _log_term(M, L, constants.delta) / (D * M)))


def noise_sample_size(constants: TheoryConstants, M: int, L: int, sigma_max: float,
                      eta: float) -> float:
    """Smallest ``D`` for the effective-noise tail bound at level ``eta``."""
    return (8.0 * sigma_max ** 2 * constants.stability_factor / (constants.c0 * eta)
            * _log_term(M, L, constants.delta))


def _bound_core(constants, M, L, D, sigma_max, c_sharp, alpha):
    eps = constants.epsilon
    return (math.sqrt(84.0 * constants.A * math.e) * sigma_max ** 2 * c_sharp ** 1.5
            * constants.stability_factor / (constants.zeta * alpha * eps ** 2)
            * math.sqrt(_log_term(M, L, constants.delta) / D))


def estimation_error_bound(constants: TheoryConstants, M: int, L: int, L0: int, D: int,
                           sigma_max: float, c_sharp: float, alpha: float) -> float:
    """Right-hand side of the high-probability bound on ``||beta_hat - beta||_2``."""
    return 81.0 * L * L0 * _bound_core(constants, M, L, D, sigma_max, c_sharp, alpha)


def false_discovery_bound(constants: TheoryConstants, M: int, L: int, L0: int, D: int,
                          sigma_max: float, c_sharp: float, alpha: float, lam: float) -> float:
    """Right-hand side of the high-probability bound on the number of false discoveries."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return 243.0 * L * L0 ** 1.5 * _bound_core(constants, M, L, D, sigma_max, c_sharp, alpha) / lam


def evaluate_fit(fit_result: FitResult, dataset: MultiSeriesDataset, beta_true,
                 sigma: float = 1.0, holdout: MultiSeriesDataset | None = None,
                 n_probes: int = 200, zeta: float = 0.25, seed: int = 0) -> GuaranteeReport:
    """Collect every diagnostic for one fit against known true coefficients.

    The noise of the effective-noise surrogate is the exact innovation
    sequence ``y - X beta_true``. RE ratios use the stability margin of the
    true coefficients and sparsity :func:`re_sparsity` (with ``zeta``) clipped
    to ``[2, L]``; series whose probes are all degenerate are left out, and the
    ratio is reported as 0 when no series is informative. Prediction error is
    measured on ``holdout``, or in sample when it is omitted.
    """
    L = fit_result.L_input
    M = fit_result.M
    truth = pad_coefficients(beta_true, M, L)
    design = build_design(dataset, L)
    noise = design.y - design.matvec(truth)
    true_rows = truth.reshape(M, L)
    L0_true = max((int(np.flatnonzero(r)[-1]) + 1 for r in true_rows if np.any(r)), default=0)

    ratios = []
    if L >= 2:
        s = min(max(2, re_sparsity(min(design.block_sizes), zeta, L)), L)
        for m, (Xm, row) in enumerate(zip(design.blocks, true_rows)):
            eps = stability_report(row[:max(L0_true, 1)]).epsilon_certified
            if eps <= 0:
                continue
            try:
                ratios.append(empirical_re_ratio(Xm, sigma, eps, n_probes, s, seed + m))
            except DegenerateProbe:
                pass
    reports = fit_result.consolidated_stability
    return GuaranteeReport(
        est_error_l2=estimation_error(fit_result.beta_hat, truth),
        false_discoveries=false_discoveries(fit_result.beta_hat, truth, fit_result.lambda_used),
        true_lag_recovered=fit_result.L0_hat == L0_true,
        effective_noise_surrogate=effective_noise_surrogate(design, noise),
        re_min_ratio=min(ratios) if ratios else 0.0,
        stability_fraction=sum(r.is_stable for r in reports) / len(reports) if reports else 1.0,
        prediction_mse=one_step_prediction_mse(fit_result.beta_tilde, holdout or dataset),
    )
