"""Joint lag selection and coefficient estimation for M autoregressive series.

The pipeline picks a lag bound ``L`` from the shortest series, fits the
hierarchical group-LASSO at a tuning level ``lam``, reads the lag estimate off
the coordinates exceeding ``lam`` and truncates (and, for identical processes,
averages) the per-series coefficients at that lag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ar_core import StabilityReport, stability_report
from .design import DesignSystem, MultiSeriesDataset, build_design
from .errors import LagBoundInfeasible
from .hiergroup import HierGroupStructure
from .solver import SolverConfig, SolveTrace, fit, lambda_max

__all__ = ["TheoryConstants", "CVResult", "FitResult", "select_lag_bound",
           "lambda_prefactor", "lambda_rate", "compute_lambda", "estimate_sigma_max",
           "estimate_sigmas", "noise_quantile_lambda", "TUNINGS",
           "cross_validate_lambda", "consolidate", "run_pipeline", "beta_min_check",
           "MODES"]

MODES = ("identical", "heterogeneous", "auto")
TUNINGS = ("noise", "cv", "theory")


@dataclass(frozen=True)
class TheoryConstants:
    """Confidence, stability and tuning constants.

    ``c0`` is the absolute constant of the Gaussian quadratic-form tail bound.
    Its value is not known; ``1/16`` is a placeholder, and only the noise
    sample-size requirement depends on it.
    """

    A: float = 1.0
    delta: float = 0.1
    epsilon: float = 0.5
    zeta: float | None = None
    c0: float = 1.0 / 16.0
    lag_constant_override: float | None = None
    lambda_override: float | None = None

    def __post_init__(self):
        if self.A < 1:
            raise ValueError(f"A must be >= 1, got {self.A}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.zeta is None:
            object.__setattr__(self, "zeta", self.epsilon ** 4 / 216.0)
        if self.zeta <= 0:
            raise ValueError("zeta must be positive")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.lag_constant_override is not None and self.lag_constant_override < 0:
            raise ValueError("lag_constant_override must be nonnegative")
        if self.lambda_override is not None and self.lambda_override <= 0:
            raise ValueError("lambda_override must be positive")

    @property
    def stability_factor(self) -> float:
        """``1 + eps^-2 + eps^-4``."""
        e2 = self.epsilon ** -2
        return 1.0 + e2 + e2 * e2

    @property
    def lag_constant(self) -> float:
        if self.lag_constant_override is not None:
            return float(self.lag_constant_override)
        return 84.0 * self.A * math.e / self.zeta ** 2

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("A", "delta", "epsilon", "zeta", "c0", "lag_constant_override", "lambda_override")}


def select_lag_bound(n_min: int, M: int, constants: TheoryConstants) -> int:
    """Largest ``L`` with ``L (1 + C log(M L / delta)) <= n_min`` and ``L < n_min``.

    ``C`` is ``84 A e / zeta^2`` unless overridden. Raises
    :class:`LagBoundInfeasible` when even ``L = 1`` fails.
    """
    if n_min < 2:
        raise ValueError(f"n_min must be >= 2, got {n_min}")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    C = constants.lag_constant
    delta = constants.delta

    def ok(L):
        return L * (1.0 + C * math.log(M * L / delta)) <= n_min

    if not ok(1):
        raise LagBoundInfeasible(
            f"n_min={n_min} is below {1.0 + C * math.log(M / delta):.6g}, the requirement "
            f"for L=1 (M={M}, delta={delta}, C={C:.6g}); override the lag constant or set L")
    lo, hi = 1, n_min - 1
    # the left-hand side increases with L
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def lambda_prefactor(constants: TheoryConstants, sigma_max: float, c_sharp: float) -> float:
    """``24 sqrt(84 A e) zeta^-1 sigma_max^2 C#^{3/2} (1 + eps^-2 + eps^-4)``."""
    return (24.0 * math.sqrt(84.0 * constants.A * math.e) / constants.zeta
            * sigma_max ** 2 * c_sharp ** 1.5 * constants.stability_factor)


def lambda_rate(L: int, M: int, D: int, delta: float) -> float:
    """``sqrt(L log(M L / delta) / (D M))``."""
    return math.sqrt(L * math.log(M * L / delta) / (D * M))


def compute_lambda(design: DesignSystem, structure: HierGroupStructure | None,
                   constants: TheoryConstants, sigma_max: float) -> float:
    """Theory-mode tuning level; returns ``constants.lambda_override`` when set."""
    if constants.lambda_override is not None:
        return float(constants.lambda_override)
    if sigma_max <= 0:
        raise ValueError("sigma_max must be positive")
    M, L = design.M, design.L
    if structure is not None and (structure.M, structure.L) != (M, L):
        raise ValueError("structure does not match design")
    c_sharp = max(design.block_sizes) / min(design.block_sizes)
    return lambda_prefactor(constants, sigma_max, c_sharp) * lambda_rate(L, M, design.D, constants.delta)


def estimate_sigmas(design: DesignSystem, ridge: float = 1e-6) -> np.ndarray:
    """Per-series residual standard deviations of a near-unpenalised fit."""
    sds = []
    for G, b, Xm, ym in zip(design.gram, design.xty, design.blocks, design.y_blocks):
        coef = np.linalg.solve(G + ridge * np.eye(design.L), b)
        r = ym - Xm @ coef
        sds.append(math.sqrt(float(r @ r) / ym.size))
    return np.array(sds)


def estimate_sigma_max(design: DesignSystem, ridge: float = 1e-6) -> float:
    """Largest per-series residual standard deviation of a near-unpenalised fit."""
    return float(estimate_sigmas(design, ridge).max())


def noise_quantile_lambda(design: DesignSystem, sigmas=None, level: float = 0.9,
                          n_draws: int = 200, seed: int = 0) -> float:
    """Simulated quantile of the effective-noise surrogate for a fixed design.

    Draws ``U_m ~ N(0, sigma_m^2 I)`` for every block, evaluates
    ``(2/D) L^{-1/2} ||X^T U||_inf`` and returns its ``level`` quantile, so
    that the penalty dominates the surrogate with probability ``level`` when
    the noise scales are right. ``sigmas`` defaults to :func:`estimate_sigmas`.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    sigmas = estimate_sigmas(design) if sigmas is None else np.broadcast_to(
        np.asarray(sigmas, dtype=float), (design.M,))
    rng = np.random.default_rng(seed)
    peak = np.zeros(n_draws)
    for Xm, s in zip(design.blocks, sigmas):
        proj = Xm.T @ (s * rng.standard_normal((Xm.shape[0], n_draws)))
        peak = np.maximum(peak, np.abs(proj).max(axis=0))
    surrogate = 2.0 / design.D * peak / math.sqrt(design.L)
    return float(np.quantile(surrogate, level))


@dataclass
class CVResult:
    lambdas: np.ndarray
    cv_error: np.ndarray
    cv_se: np.ndarray
    lambda_max: float
    best_index: int
    chosen_index: int
    rule: str

    @property
    def lambda_best(self) -> float:
        return float(self.lambdas[self.chosen_index])

    def to_dict(self) -> dict:
        return {"lambdas": self.lambdas.tolist(), "cv_error": self.cv_error.tolist(),
                "cv_se": self.cv_se.tolist(), "lambda_max": self.lambda_max,
                "best_index": self.best_index, "chosen_index": self.chosen_index,
                "rule": self.rule}


def _fold_masks(sizes: Sequence[int], k: int, folds: int) -> list[np.ndarray]:
    masks = []
    for T in sizes:
        edges = np.linspace(0, T, folds + 1).round().astype(int)
        m = np.zeros(T, dtype=bool)
        m[edges[k]:edges[k + 1]] = True
        masks.append(m)
    return masks


def cross_validate_lambda(design: DesignSystem, folds: int = 5, n_lambdas: int = 20,
                          min_ratio: float = 1e-3, lambdas=None,
                          solver_config: SolverConfig | None = None,
                          rule: str = "min") -> CVResult:
    """Blocked K-fold cross-validation of one-step-ahead squared error.

    Each series' regression rows are cut into ``folds`` contiguous blocks; fold
    ``k`` holds out block ``k`` of every series. The default grid has
    ``n_lambdas`` log-spaced points from ``lambda_max`` down to
    ``min_ratio * lambda_max``. ``rule="min"`` takes the grid point with least
    pooled validation error; ``rule="1se"`` takes the largest penalty whose
    error is within one standard error of that minimum.
    """
    if rule not in ("min", "1se"):
        raise ValueError(f"unknown rule {rule!r}")
    if folds < 2:
        raise ValueError("need at least 2 folds")
    structure = HierGroupStructure(design.M, design.L)
    lmax = lambda_max(design, structure)
    if lambdas is None:
        lambdas = lmax * np.logspace(0.0, math.log10(min_ratio), n_lambdas)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    sse = np.zeros((folds, lambdas.size))
    counts = np.zeros(folds)
    for k in range(folds):
        held = _fold_masks(design.block_sizes, k, folds)
        if any(h.all() for h in held):
            raise ValueError("a fold would leave a series without training rows")
        train = design.subset_rows([~h for h in held])
        Xv = [Xm[h] for Xm, h in zip(design.blocks, held)]
        yv = [ym[h] for ym, h in zip(design.y_blocks, held)]
        counts[k] = sum(h.sum() for h in held)
        beta = None
        for i, lam in enumerate(lambdas):
            beta, _ = fit(train, structure, lam, solver_config, beta0=beta)
            theta = beta.reshape(design.M, design.L)
            sse[k, i] = sum(float(np.sum((y - X @ b) ** 2)) for X, y, b in zip(Xv, yv, theta))
    per_fold = sse / counts[:, None]
    err = sse.sum(axis=0) / counts.sum()
    se = per_fold.std(axis=0, ddof=1) / math.sqrt(folds)
    best = int(np.argmin(err))
    chosen = best
    if rule == "1se":
        # lambdas descend, so the first index within one SE is the largest penalty
        chosen = int(np.flatnonzero(err <= err[best] + se[best])[0])
    return CVResult(lambdas, err, se, float(lmax), best, chosen, rule)


@dataclass
class FitResult:
    beta_hat: np.ndarray
    L_input: int
    lambda_used: float
    L0_hat: int
    beta_tilde: np.ndarray
    mode: str
    trace: SolveTrace
    stability: list
    labels: tuple = ()
    lambda_source: str = "theory"
    sigma_max: float | None = None
    cv: CVResult | None = None

    @property
    def M(self) -> int:
        return self.beta_hat.size // self.L_input

    @property
    def beta_hat_matrix(self) -> np.ndarray:
        return self.beta_hat.reshape(self.M, self.L_input)

    @property
    def consolidated_stability(self) -> list:
        """One report per distinct fitted model (one in identical mode)."""
        return self.stability[:1] if self.mode == "identical" else list(self.stability)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "beta_hat": self.beta_hat_matrix.tolist(),
            "L_input": self.L_input,
            "lambda_used": self.lambda_used,
            "lambda_source": self.lambda_source,
            "L0_hat": self.L0_hat,
            "beta_tilde": self.beta_tilde.tolist(),
            "mode": self.mode,
            "sigma_max": self.sigma_max,
            "stability": [s.to_dict() for s in self.stability],
            "trace": self.trace.summary(),
            "cv": self.cv.to_dict() if self.cv is not None else None,
        }


def _lag_estimate(rows: np.ndarray, lam: float) -> int:
    hits = np.flatnonzero(np.any(np.abs(np.atleast_2d(rows)) > lam, axis=0))
    return int(hits[-1]) + 1 if hits.size else 0


def consolidate(beta_hat, M: int, L: int, lam: float, mode: str) -> tuple[str, int, np.ndarray]:
    """Lag estimate and truncated coefficients from a full solution.

    Returns ``(mode, L0_hat, beta_tilde)`` where ``beta_tilde`` is ``M x L0_hat``.
    In identical mode the lag is read from the first series and every row of
    ``beta_tilde`` is the average of the truncated per-series vectors. In
    ``auto`` mode identical is chosen when all per-series estimates agree
    within ``2 lam`` in sup-norm.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    theta = np.asarray(beta_hat, dtype=float).reshape(M, L)
    if mode == "auto":
        spread = np.max(theta, axis=0) - np.min(theta, axis=0)
        mode = "identical" if float(spread.max()) <= 2.0 * lam else "heterogeneous"
    if mode == "identical":
        L0 = _lag_estimate(theta[0], lam)
        mean = theta[:, :L0].mean(axis=0)
        return mode, L0, np.tile(mean, (M, 1))
    L0 = _lag_estimate(theta, lam)
    return mode, L0, theta[:, :L0].copy()


def run_pipeline(dataset: MultiSeriesDataset, constants: TheoryConstants | None = None,
                 mode: str = "auto", solver_config: SolverConfig | None = None, *,
                 L: int | None = None, tuning: str = "noise", sigma_max: float | None = None,
                 cv_folds: int = 5, n_lambdas: int = 20, lambda_grid=None,
                 cv_rule: str = "min", noise_draws: int = 200, noise_seed: int = 0) -> FitResult:
    """Select the lag bound, fit, threshold and consolidate.

    Parameters
    ----------
    dataset : MultiSeriesDataset
    constants : TheoryConstants, optional
    mode : {"identical", "heterogeneous", "auto"}
    solver_config : SolverConfig, optional
    L : int, optional
        Lag bound; computed by :func:`select_lag_bound` when omitted.
    tuning : {"noise", "cv", "theory"}
        ``"noise"`` uses :func:`noise_quantile_lambda` at level ``1 - delta``,
        ``"cv"`` uses :func:`cross_validate_lambda` and ``"theory"`` uses
        :func:`compute_lambda`. ``constants.lambda_override`` beats all three.
    sigma_max : float, optional
        Innovation scale for theory and noise modes (shared by all series);
        estimated per series when omitted.
    noise_draws, noise_seed : int
        Monte Carlo size and seed for ``tuning="noise"``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if tuning not in TUNINGS:
        raise ValueError(f"tuning must be one of {TUNINGS}, got {tuning!r}")
    constants = constants or TheoryConstants()
    if L is None:
        L = select_lag_bound(dataset.n_min, dataset.M, constants)
    design = build_design(dataset, L)
    structure = HierGroupStructure(design.M, L)

    cv = None
    if constants.lambda_override is not None:
        lam, source = float(constants.lambda_override), "override"
    elif tuning == "theory":
        if sigma_max is None:
            sigma_max = estimate_sigma_max(design)
        lam, source = compute_lambda(design, structure, constants, sigma_max), "theory"
    elif tuning == "noise":
        sigmas = estimate_sigmas(design) if sigma_max is None else sigma_max
        lam = noise_quantile_lambda(design, sigmas, 1.0 - constants.delta, noise_draws, noise_seed)
        source = "noise"
    else:
        cv = cross_validate_lambda(design, cv_folds, n_lambdas, lambdas=lambda_grid,
                                   solver_config=solver_config, rule=cv_rule)
        lam, source = cv.lambda_best, "cv"

    beta_hat, trace = fit(design, structure, lam, solver_config)
    resolved, L0_hat, beta_tilde = consolidate(beta_hat, design.M, L, lam, mode)
    stability = [stability_report(row if row.size else [0.0]) for row in beta_tilde]
    return FitResult(beta_hat=beta_hat, L_input=L, lambda_used=lam, L0_hat=L0_hat,
                     beta_tilde=beta_tilde, mode=resolved, trace=trace, stability=stability,
                     labels=dataset.labels, lambda_source=source, sigma_max=sigma_max, cv=cv)


def beta_min_check(beta_true, c_beta: float) -> bool:
    """Every nonzero true coefficient has magnitude at least ``c_beta``."""
    b = np.abs(np.asarray(beta_true, dtype=float)).ravel()
    nz = b[b != 0]
    return bool(np.all(nz >= c_beta))
