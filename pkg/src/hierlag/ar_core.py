"""Univariate autoregressive processes: stability and simulation.

An AR(L0) process ``x_t = b_1 x_{t-1} + ... + b_L0 x_{t-L0} + u_t`` is stable
when its reverse characteristic polynomial ``f(z) = 1 - b_1 z - ... - b_L0 z^L0``
has no root in the closed unit disk, equivalently when every eigenvalue of the
companion matrix lies strictly inside the unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import NonFiniteCoefficient, UnstableProcess

DEFAULT_GRID_POINTS = 4096
STABILITY_TOL = 1e-9

__all__ = [
    "ARProcessSpec",
    "StabilityReport",
    "SimulatedSeries",
    "reverse_char_poly_eval",
    "companion_matrix",
    "stability_report",
    "default_burn_in",
    "simulate_ar",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float).ravel()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ARProcessSpec:
    """Coefficients and innovation scale of one AR process.

    The last coefficient must be nonzero so that ``lag`` is the true lag. The
    one exception is ``coeffs=[0]``, which describes white noise.
    """

    coeffs: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.size == 0:
            raise ValueError("coeffs must be nonempty")
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteCoefficient(f"non-finite coefficient in {coeffs}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if coeffs.size > 1 and coeffs[-1] == 0:
            raise ValueError("last coefficient is zero; declared lag exceeds the true lag")

    @property
    def lag(self) -> int:
        return int(self.coeffs.size)


@dataclass(frozen=True)
class StabilityReport:
    min_modulus: float
    max_modulus: float
    spectral_radius: float
    is_stable: bool
    epsilon_certified: float

    def to_dict(self) -> dict:
        return {
            "min_modulus": self.min_modulus,
            "max_modulus": self.max_modulus,
            "spectral_radius": self.spectral_radius,
            "is_stable": self.is_stable,
            "epsilon_certified": self.epsilon_certified,
        }


@dataclass(frozen=True)
class SimulatedSeries:
    values: np.ndarray
    seed: int
    burn_in: int

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __len__(self):
        return self.values.size


def reverse_char_poly_eval(coeffs, z):
    """Evaluate ``1 - sum_l coeffs[l-1] * z**l`` in complex arithmetic.

    ``z`` may be a scalar or an array of points.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        raise ValueError("coeffs must be nonempty")
    # highest degree first for polyval
    poly = np.concatenate([-coeffs[::-1], [1.0]])
    return np.polyval(poly, np.asarray(z, dtype=complex))


def companion_matrix(coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.size == 0:
        raise ValueError("coeffs must be nonempty")
    p = coeffs.size
    A = np.zeros((p, p))
    A[0] = coeffs
    A[1:, :-1] = np.eye(p - 1)
    return A


def stability_report(coeffs, grid_points: int = DEFAULT_GRID_POINTS) -> StabilityReport:
    """Stability decision plus unit-circle modulus certificate.

    Stability is decided by the companion spectral radius (strictly below
    ``1 - 1e-9``). The min/max of ``|f|`` over ``grid_points`` equispaced points
    on the unit circle certify the epsilon-stability margin; their accuracy
    depends on the grid resolution.
    """
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.size == 0:
        raise ValueError("coeffs must be nonempty")
    if not np.all(np.isfinite(coeffs)):
        raise NonFiniteCoefficient(f"non-finite coefficient in {coeffs}")
    if grid_points < 64:
        raise ValueError(f"grid_points must be >= 64, got {grid_points}")

    theta = 2.0 * np.pi * np.arange(grid_points) / grid_points
    modulus = np.abs(reverse_char_poly_eval(coeffs, np.exp(1j * theta)))
    min_mod = float(modulus.min())
    max_mod = float(modulus.max())
    rho = float(np.abs(np.linalg.eigvals(companion_matrix(coeffs))).max())
    stable = rho < 1.0 - STABILITY_TOL
    eps = min(min_mod, 1.0 / max_mod) if stable else 0.0
    return StabilityReport(min_mod, max_mod, rho, bool(stable), float(eps))


def default_burn_in(lag: int) -> int:
    return max(10 * lag, 500)


def simulate_ar(spec: ARProcessSpec, n: int, burn_in: int | None = None,
                seed: int = 0) -> SimulatedSeries:
    """Simulate ``n`` observations of a stable AR process.

    The recursion starts from zeros, runs ``burn_in + n`` steps driven by
    i.i.d. ``N(0, sigma^2)`` innovations, and the first ``burn_in`` values are
    dropped. Innovations come from ``numpy.random.default_rng(seed)`` (PCG64
    bit generator, ziggurat normals), so equal inputs give bit-identical output.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if burn_in is None:
        burn_in = default_burn_in(spec.lag)
    if burn_in < 0:
        raise ValueError(f"burn_in must be nonnegative, got {burn_in}")
    report = stability_report(spec.coeffs)
    if not report.is_stable:
        raise UnstableProcess(
            f"spectral radius {report.spectral_radius:.6g} >= 1; refusing to simulate")

    rng = np.random.default_rng(seed)
    u = spec.sigma * rng.standard_normal(burn_in + n)
    x = lfilter([1.0], np.concatenate([[1.0], -spec.coeffs]), u)
    return SimulatedSeries(values=x[burn_in:], seed=seed, burn_in=burn_in)
