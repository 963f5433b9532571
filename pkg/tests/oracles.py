"""Independent reference computations used by the tests.

None of these share code with the package beyond plain numpy.
"""
import warnings

import numpy as np


def suffix_weights(M, L):
    return np.sqrt(M * np.arange(L, 0, -1, dtype=float))


def group_norm_bruteforce(beta, M, L):
    """Double loop over groups and coordinates."""
    beta = np.asarray(beta, dtype=float).ravel()
    total = 0.0
    for l in range(1, L + 1):
        sq = 0.0
        for m in range(M):
            for j in range(l, L + 1):
                sq += beta[m * L + j - 1] ** 2
        total += np.sqrt(M * (L - l + 1)) * np.sqrt(sq)
    return total


def prox_dual_bca(beta, M, L, t, tol=1e-13, max_passes=200_000, seed=0):
    """Prox of ``t * N`` by randomized block-coordinate ascent on the dual.

    The dual variables are one vector per group, each confined to a ball of
    radius ``t * w_l`` and supported on that group; the primal solution is
    ``beta - sum_l xi_l``. Each block update is an exact ball projection.
    """
    theta = np.asarray(beta, dtype=float).reshape(M, L)
    w = suffix_weights(M, L)
    xi = np.zeros((L, M, L))
    rng = np.random.default_rng(seed)
    for _ in range(max_passes):
        change = 0.0
        for l in rng.permutation(L):
            x = theta - xi.sum(axis=0) + xi[l]
            target = np.zeros((M, L))
            target[:, l:] = x[:, l:]
            r = np.linalg.norm(target)
            radius = t * w[l]
            new = target if r <= radius else target * (radius / r)
            change = max(change, np.abs(new - xi[l]).max())
            xi[l] = new
        if change < tol:
            break
    return (theta - xi.sum(axis=0)).ravel()


def objective_direct(X, y, b, M, L, lam):
    r = y - X @ b
    return float(r @ r) / X.shape[0] + lam * group_norm_bruteforce(b, M, L)


def _solve(cp, prob):
    # tight tolerances occasionally trigger an accuracy warning although the
    # returned point is fine; callers re-evaluate objectives themselves
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)


def _cvx_norm(cp, b, M, L):
    B = cp.reshape(b, (M, L), order="C")
    w = suffix_weights(M, L)
    return sum(w[l] * cp.norm(B[:, l:], "fro") for l in range(L))


def fit_objective_cvxpy(X, y, M, L, lam):
    """Conic-solver minimiser of ``(1/D)||y - X b||^2 + lam N(b)`` and its objective."""
    import cvxpy as cp

    D = X.shape[0]
    b = cp.Variable(M * L)
    obj = cp.sum_squares(y - X @ b) / D + lam * _cvx_norm(cp, b, M, L)
    prob = cp.Problem(cp.Minimize(obj))
    _solve(cp, prob)
    b = np.asarray(b.value)
    return objective_direct(X, y, b, M, L, lam), b


def dual_norm_cvxpy(alpha, M, L):
    """``max <alpha, b>`` over ``N(b) <= 1`` by a conic solver."""
    import cvxpy as cp

    b = cp.Variable(M * L)
    prob = cp.Problem(cp.Maximize(np.asarray(alpha, dtype=float).ravel() @ b),
                      [_cvx_norm(cp, b, M, L) <= 1])
    _solve(cp, prob)
    return float(prob.value)


def residual_double_sum(series, L, beta):
    """``sum_m sum_t (x_t - sum_l b^m_l x_{t-l})^2`` by explicit loops."""
    total = 0.0
    for m, x in enumerate(series):
        for t in range(L, len(x)):
            pred = sum(beta[m * L + l - 1] * x[t - l] for l in range(1, L + 1))
            total += (x[t] - pred) ** 2
    return total
