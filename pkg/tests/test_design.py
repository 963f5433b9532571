import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

import oracles
from hierlag.design import (DesignSystem, MultiSeriesDataset, build_design, gram_operator_norm,
                            lagged_block, power_iteration)
from hierlag.errors import DimensionMismatch, LagTooLarge


def test_dataset_validation():
    ds = MultiSeriesDataset([[1, 2, 3], [4, 5]])
    assert ds.M == 2 and ds.lengths == [3, 2] and ds.n_min == 2
    assert ds.labels == ("s0", "s1")
    with pytest.raises(ValueError):
        MultiSeriesDataset([])
    with pytest.raises(ValueError):
        MultiSeriesDataset([[1.0]])
    with pytest.raises(ValueError):
        MultiSeriesDataset([[1, 2], [3, 4]], labels=["a", "a"])
    with pytest.raises(ValueError):
        MultiSeriesDataset([[1, np.nan]])
    with pytest.raises(ValueError):
        MultiSeriesDataset([[1, 2]], labels=["a", "b"])


def test_smallest_design():
    d = build_design(MultiSeriesDataset([[1.0, 2.0, 3.0]]), 1)
    assert_array_equal(d.to_dense(), [[1.0], [2.0]])
    assert_array_equal(d.y, [2.0, 3.0])
    assert d.block_sizes == (2,) and d.D == 2


def test_two_series_shapes():
    d = build_design(MultiSeriesDataset([np.arange(4.0), np.arange(4.0) + 10]), 2)
    X = d.to_dense()
    assert d.D == 4 and X.shape == (4, 4)
    assert_array_equal(X[:2, 2:], 0)
    assert_array_equal(X[2:, :2], 0)
    # row t holds (x_{t-1}, x_{t-2})
    assert_array_equal(X[:2, :2], [[1, 0], [2, 1]])
    assert_array_equal(d.y, [2, 3, 12, 13])


def test_lagged_block_layout():
    x = np.arange(10.0)
    X, y = lagged_block(x, 3)
    for t in range(7):
        assert_array_equal(X[t], [x[t + 2], x[t + 1], x[t]])
        assert y[t] == x[t + 3]


def test_lag_too_large():
    with pytest.raises(LagTooLarge) as info:
        build_design(MultiSeriesDataset([[1, 2, 3], [1, 2]], labels=["a", "b"]), 2)
    assert info.value.series == "b"
    with pytest.raises(ValueError):
        build_design(MultiSeriesDataset([[1, 2, 3]]), 0)


def test_residual_identity_matches_double_sum():
    rng = np.random.default_rng(0)
    series = [rng.standard_normal(n) for n in (50, 60, 70)]
    d = build_design(MultiSeriesDataset(series), 5)
    beta = rng.standard_normal(15)
    r = d.residual(beta)
    assert_allclose(r @ r, oracles.residual_double_sum(series, 5, beta), rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_residual_identity_random(M, L, seed):
    rng = np.random.default_rng(seed)
    series = [rng.standard_normal(int(rng.integers(L + 1, L + 20))) for _ in range(M)]
    d = build_design(MultiSeriesDataset(series), L)
    beta = rng.standard_normal(M * L)
    r = d.y - d.to_dense() @ beta
    ref = oracles.residual_double_sum(series, L, beta)
    assert_allclose(r @ r, ref, rtol=1e-10)
    assert_allclose(d.residual(beta), r, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_block_diagonal_scan(M, L, seed):
    rng = np.random.default_rng(seed)
    series = [rng.standard_normal(int(rng.integers(L + 1, L + 15))) for _ in range(M)]
    d = build_design(MultiSeriesDataset(series), L)
    X = d.to_dense()
    edges = np.concatenate([[0], np.cumsum(d.block_sizes)])
    for m in range(M):
        cols = slice(m * L, (m + 1) * L)
        outside = np.ones(d.D, dtype=bool)
        outside[edges[m]:edges[m + 1]] = False
        assert not np.any(X[outside, cols])
    assert d.D == sum(len(s) - L for s in series)


def test_products_match_dense():
    rng = np.random.default_rng(1)
    d = build_design(MultiSeriesDataset([rng.standard_normal(n) for n in (20, 30)]), 3)
    X = d.to_dense()
    b = rng.standard_normal(6)
    r = rng.standard_normal(d.D)
    assert_allclose(d.matvec(b), X @ b, atol=1e-12)
    assert_allclose(d.rmatvec(r), X.T @ r, atol=1e-12)
    assert_allclose(d.gram[1], X[:, 3:].T @ X[:, 3:], atol=1e-10)
    assert d.yty == pytest.approx(d.y @ d.y)
    with pytest.raises(DimensionMismatch):
        d.matvec(np.ones(5))
    with pytest.raises(DimensionMismatch):
        d.rmatvec(np.ones(3))


def test_from_blocks_validation():
    with pytest.raises(DimensionMismatch):
        DesignSystem.from_blocks([np.ones((3, 2))], [np.ones(2)])
    with pytest.raises(DimensionMismatch):
        DesignSystem.from_blocks([np.ones((3, 2)), np.ones((3, 3))], [np.ones(3), np.ones(3)])
    with pytest.raises(DimensionMismatch):
        DesignSystem.from_blocks([], [])


def test_subset_rows():
    rng = np.random.default_rng(2)
    d = build_design(MultiSeriesDataset([rng.standard_normal(12), rng.standard_normal(9)]), 2)
    masks = [np.arange(10) % 2 == 0, np.arange(7) < 3]
    sub = d.subset_rows(masks)
    assert sub.block_sizes == (5, 3)
    assert_array_equal(sub.blocks[0], d.blocks[0][::2])


def test_operator_norm_examples():
    one = DesignSystem.from_blocks([[[1.0]]], [[0.0]])
    assert gram_operator_norm(one) == pytest.approx(1.0)
    rng = np.random.default_rng(3)
    B1, B2 = rng.standard_normal((10, 3)), 3 * rng.standard_normal((8, 3))
    d = DesignSystem.from_blocks([B1, B2], [np.zeros(10), np.zeros(8)])
    each = [np.linalg.eigvalsh(B.T @ B).max() for B in (B1, B2)]
    assert gram_operator_norm(d) == pytest.approx(max(each), rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_power_iteration_matches_eigensolver(seed):
    B = np.random.default_rng(seed).standard_normal((20, 5))
    G = B.T @ B
    assert power_iteration(G) == pytest.approx(np.linalg.eigvalsh(G).max(), rel=1e-6)


def test_power_iteration_edge_cases():
    assert power_iteration(np.zeros((3, 3))) == 0.0
    assert power_iteration(np.diag([1.0, 1.0, 0.5])) == pytest.approx(1.0)
    # rank one with tied structure
    v = np.ones(4)
    assert power_iteration(np.outer(v, v)) == pytest.approx(4.0)
