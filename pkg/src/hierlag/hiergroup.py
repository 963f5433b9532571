"""Nested lag groups, the hierarchical group norm and its proximal operator.

Coefficients are laid out series-major, ``beta = (b^1_1..b^1_L, b^2_1..b^2_L, ...)``,
and are handled internally as an ``M x L`` matrix ``Theta`` with
``Theta[m, l-1] = b^m_l``. Group ``G_l`` collects every series' lags ``l..L``,
so ``G_1 > G_2 > ... > G_L`` and group ``l`` carries weight ``sqrt(M (L-l+1))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

__all__ = ["HierGroupStructure", "group_norm", "dual_norm_upper_bound",
           "prox_single_group", "prox_hier", "prox_hier_sequential",
           "hier_shrink_factors", "zero_groups", "is_suffix_closed"]


@dataclass(frozen=True)
class HierGroupStructure:
    M: int
    L: int

    def __post_init__(self):
        if self.M < 1 or self.L < 1:
            raise ValueError(f"M and L must be positive, got M={self.M}, L={self.L}")

    @property
    def weights(self) -> np.ndarray:
        """``sqrt(|G_l|) = sqrt(M (L-l+1))`` for ``l = 1..L``."""
        return np.sqrt(self.M * np.arange(self.L, 0, -1, dtype=float))

    def group_size(self, l: int) -> int:
        return self.M * (self.L - l + 1)

    def group_indices(self, l: int) -> np.ndarray:
        """Flat indices of ``G_l`` (1-based ``l``) in the series-major layout."""
        if not 1 <= l <= self.L:
            raise ValueError(f"group index {l} outside 1..{self.L}")
        m, j = np.meshgrid(np.arange(self.M), np.arange(l - 1, self.L), indexing="ij")
        return (m * self.L + j).ravel()

    def as_matrix(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        if beta.size != self.M * self.L:
            raise DimensionMismatch(
                f"coefficient vector has {beta.size} entries, expected M*L={self.M * self.L}")
        return beta.reshape(self.M, self.L)


def _suffix_norms(theta: np.ndarray) -> np.ndarray:
    """Frobenius norms of ``theta[:, l:]`` for every ``l``."""
    col_sq = np.einsum("ml,ml->l", theta, theta)
    return np.sqrt(np.cumsum(col_sq[::-1])[::-1])


def group_norm(structure: HierGroupStructure, beta) -> float:
    theta = structure.as_matrix(beta)
    return float(structure.weights @ _suffix_norms(theta))


def dual_norm_upper_bound(structure: HierGroupStructure, alpha) -> float:
    """The sup-norm surrogate ``L^{-1/2} max_j |alpha_j|`` for the dual norm.

    This is the quantity used to size the effective noise. It is not a strict
    bound for every ``alpha``: vectors with all entries of equal magnitude
    have dual norm slightly above it (for ``M=1, L=2`` the all-ones vector has
    dual norm ``0.732`` against a surrogate of ``0.707``).
    """
    alpha = structure.as_matrix(alpha)
    return float(np.abs(alpha).max() / np.sqrt(structure.L))


def prox_single_group(structure: HierGroupStructure, beta, l: int, threshold: float) -> np.ndarray:
    """Group soft-thresholding of ``G_l`` with weight ``sqrt(|G_l|)``.

    Coordinates outside ``G_l`` are returned unchanged. A block whose norm is at
    or below ``threshold * sqrt(|G_l|)`` is set to zero.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    theta = structure.as_matrix(beta).copy()
    _shrink_suffix(theta, l - 1, threshold * np.sqrt(structure.group_size(l)))
    return theta.ravel()


def _shrink_suffix(theta: np.ndarray, start: int, level: float) -> None:
    block = theta[:, start:]
    r = np.sqrt(np.einsum("ml,ml->", block, block))
    if r <= level:
        block[...] = 0.0
    else:
        block *= 1.0 - level / r


def hier_shrink_factors(col_sq, levels) -> np.ndarray:
    """Per-group scaling factors of the nested prox.

    ``col_sq[j]`` is the squared norm of lag column ``j`` and ``levels[l]`` the
    zeroing level of group ``l``. Groups are processed deepest first; after
    group ``l+1`` is shrunk by ``f[l+1]`` the squared norm of suffix ``l`` is
    ``col_sq[l] + f[l+1]^2 * S[l+1]``.
    """
    L = len(col_sq)
    f = np.zeros(L)
    tail = 0.0
    for l in range(L - 1, -1, -1):
        sq = col_sq[l] + tail
        r = sq ** 0.5
        if r <= levels[l]:
            f[l] = 0.0
            tail = 0.0
        else:
            f[l] = 1.0 - levels[l] / r
            tail = f[l] * f[l] * sq
    return f


def prox_hier(structure: HierGroupStructure, beta, threshold: float) -> np.ndarray:
    """Proximal map of ``threshold * N`` for the nested groups.

    Equivalent to group soft-thresholding ``G_L`` first and ``G_1`` last, which
    is exact for a nested (tree-structured) family of groups. Every group scales
    its whole suffix, so lag column ``j`` ends up multiplied by the product of
    the factors of groups ``1..j``.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    theta = structure.as_matrix(beta)
    if threshold == 0:
        return theta.ravel().copy()
    col_sq = np.einsum("ml,ml->l", theta, theta).tolist()
    levels = (threshold * structure.weights).tolist()
    scale = np.cumprod(hier_shrink_factors(col_sq, levels))
    return (theta * scale).ravel()


def prox_hier_sequential(structure: HierGroupStructure, beta, threshold: float) -> np.ndarray:
    """Literal composition ``prox_{G_1} o ... o prox_{G_L}``, one group at a time."""
    out = np.asarray(beta, dtype=float).ravel().copy()
    for l in range(structure.L, 0, -1):
        out = prox_single_group(structure, out, l, threshold)
    return out


def zero_groups(structure: HierGroupStructure, beta) -> np.ndarray:
    """Boolean mask over ``l = 1..L``: is ``beta`` identically zero on ``G_l``?"""
    theta = structure.as_matrix(beta)
    return _suffix_norms(theta) == 0.0


def is_suffix_closed(structure: HierGroupStructure, beta) -> bool:
    """True when the zero groups of ``beta`` are ``G_k, ..., G_L`` for some ``k``."""
    zero = zero_groups(structure, beta)
    return bool(np.all(zero[1:] >= zero[:-1]))
