"""Block-diagonal autoregressive regression systems.

For series ``m`` with ``n_m`` observations and lag bound ``L``, the first ``L``
observations serve as presamples and the remaining ``T_m = n_m - L`` are
responses. Row ``t`` of block ``m`` holds ``(x_{t-1}, ..., x_{t-L})``. The full
design is ``D x (M L)`` with ``D = sum_m T_m`` and is kept as a list of dense
``T_m x L`` blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch, LagTooLarge

__all__ = ["MultiSeriesDataset", "DesignSystem", "build_design", "lagged_block",
           "gram_operator_norm", "power_iteration"]


@dataclass(frozen=True)
class MultiSeriesDataset:
    series: tuple
    labels: tuple

    def __init__(self, series: Sequence, labels: Sequence | None = None):
        arrs = []
        for s in series:
            a = np.array(s, dtype=float).ravel()
            a.flags.writeable = False
            arrs.append(a)
        if labels is None:
            labels = [f"s{m}" for m in range(len(arrs))]
        labels = tuple(str(lab) for lab in labels)
        if len(arrs) < 1:
            raise ValueError("dataset needs at least one series")
        if len(labels) != len(arrs):
            raise ValueError(f"{len(labels)} labels for {len(arrs)} series")
        if len(set(labels)) != len(labels):
            raise ValueError("series labels must be unique")
        for lab, a in zip(labels, arrs):
            if a.size < 2:
                raise ValueError(f"series {lab!r} has {a.size} samples, need at least 2")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"series {lab!r} contains non-finite values")
        object.__setattr__(self, "series", tuple(arrs))
        object.__setattr__(self, "labels", labels)

    @property
    def M(self) -> int:
        return len(self.series)

    @property
    def lengths(self) -> list[int]:
        return [a.size for a in self.series]

    @property
    def n_min(self) -> int:
        return min(self.lengths)


def lagged_block(x: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressor block and response for one series.

    Returns ``(X_m, y_m)`` with ``X_m[t, l-1] = x[L + t - l]`` and
    ``y_m[t] = x[L + t]`` for ``t = 0 .. n-L-1``.
    """
    x = np.asarray(x, dtype=float)
    # windows[t] = x[t : t+L]; reversing gives (x_{t+L-1}, ..., x_t)
    windows = sliding_window_view(x[:-1], L)
    return np.ascontiguousarray(windows[:, ::-1]), x[L:].copy()


@dataclass(frozen=True, eq=False)
class DesignSystem:
    """Block-diagonal regression pair ``(X, y)``.

    Attributes
    ----------
    blocks : tuple of (T_m, L) arrays
    y_blocks : tuple of (T_m,) arrays
    block_sizes : tuple of T_m
    L : int
    gram : (M, L, L) array of ``X_m^T X_m``
    xty : (M, L) array of ``X_m^T y_m``
    """

    blocks: tuple
    y_blocks: tuple
    block_sizes: tuple
    L: int
    gram: np.ndarray
    xty: np.ndarray

    @property
    def M(self) -> int:
        return len(self.blocks)

    @property
    def D(self) -> int:
        return int(sum(self.block_sizes))

    @property
    def n_coef(self) -> int:
        return self.M * self.L

    @property
    def y(self) -> np.ndarray:
        return np.concatenate(self.y_blocks)

    @property
    def yty(self) -> float:
        return float(sum(yb @ yb for yb in self.y_blocks))

    def _check_beta(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        if beta.size != self.n_coef:
            raise DimensionMismatch(f"beta has {beta.size} entries, expected {self.n_coef}")
        return beta.reshape(self.M, self.L)

    def matvec(self, beta) -> np.ndarray:
        B = self._check_beta(beta)
        return np.concatenate([Xm @ bm for Xm, bm in zip(self.blocks, B)])

    def rmatvec(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.size != self.D:
            raise DimensionMismatch(f"vector has {r.size} entries, expected D={self.D}")
        out = np.empty((self.M, self.L))
        start = 0
        for m, Xm in enumerate(self.blocks):
            stop = start + Xm.shape[0]
            out[m] = Xm.T @ r[start:stop]
            start = stop
        return out.ravel()

    def residual(self, beta) -> np.ndarray:
        return self.y - self.matvec(beta)

    @cached_property
    def operator_norm(self) -> float:
        """Cached :func:`gram_operator_norm`."""
        return gram_operator_norm(self)

    def to_dense(self) -> np.ndarray:
        """Dense ``D x ML`` matrix; intended for tests and small problems."""
        X = np.zeros((self.D, self.n_coef))
        row = 0
        for m, Xm in enumerate(self.blocks):
            X[row:row + Xm.shape[0], m * self.L:(m + 1) * self.L] = Xm
            row += Xm.shape[0]
        return X

    @classmethod
    def from_blocks(cls, blocks, y_blocks) -> "DesignSystem":
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks)
        y_blocks = tuple(np.asarray(yb, dtype=float).ravel() for yb in y_blocks)
        if len(blocks) != len(y_blocks) or not blocks:
            raise DimensionMismatch("need one response block per design block")
        L = blocks[0].shape[1]
        for b, yb in zip(blocks, y_blocks):
            if b.shape[1] != L:
                raise DimensionMismatch("all blocks must have L columns")
            if b.shape[0] != yb.size or b.shape[0] < 1:
                raise DimensionMismatch("block rows must match response length")
        gram = np.stack([b.T @ b for b in blocks])
        xty = np.stack([b.T @ yb for b, yb in zip(blocks, y_blocks)])
        return cls(blocks, y_blocks, tuple(b.shape[0] for b in blocks), int(L), gram, xty)

    def subset_rows(self, masks) -> "DesignSystem":
        """Design restricted to the rows selected by one boolean mask per block."""
        return DesignSystem.from_blocks(
            [b[k] for b, k in zip(self.blocks, masks)],
            [yb[k] for yb, k in zip(self.y_blocks, masks)])


def build_design(dataset: MultiSeriesDataset, L: int) -> DesignSystem:
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    for lab, x in zip(dataset.labels, dataset.series):
        if x.size <= L:
            raise LagTooLarge(lab, x.size, L)
    pairs = [lagged_block(x, L) for x in dataset.series]
    return DesignSystem.from_blocks([p[0] for p in pairs], [p[1] for p in pairs])


def power_iteration(A: np.ndarray, rtol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite matrix.

    Iterates with ``A^4`` to shorten the run when the top eigenvalues are
    close, and stops when the eigen-residual ``||A v - mu v||`` of the Rayleigh
    quotient falls below ``rtol * mu``.
    """
    A = np.asarray(A, dtype=float)
    scale = float(np.abs(A).max())
    if scale == 0.0:
        return 0.0
    A = A / scale
    A2 = A @ A
    P = A2 @ A2
    rng = np.random.default_rng(0)
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(max_iter):
        w = A @ v
        mu = float(v @ w)
        if np.linalg.norm(w - mu * v) <= rtol * mu:
            break
        w = P @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector fell in the null space
            w = rng.standard_normal(A.shape[0])
            norm_w = np.linalg.norm(w)
        v = w / norm_w
    return mu * scale


def gram_operator_norm(design: DesignSystem) -> float:
    """``Lambda_max(X^T X)``, computed block by block."""
    return max(power_iteration(G) for G in design.gram)
