import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussconvex.nnls import (
    _nnls_batch_py,
    _simplex_batch_py,
    nnls_batch,
    nnls_gram,
    simplex_batch,
    simplex_ls_gram,
)


def brute_force_nnls(A, b):
    """Enumerate supports; the best feasible unconstrained solve on a support is optimal."""
    m = A.shape[1]
    best, best_r = np.zeros(m), float(b @ b)
    for k in range(1, m + 1):
        for S in itertools.combinations(range(m), k):
            x_s, *_ = np.linalg.lstsq(A[:, S], b, rcond=None)
            if np.all(x_s >= -1e-12):
                x = np.zeros(m)
                x[list(S)] = np.maximum(x_s, 0)
                r = float(np.sum((A @ x - b) ** 2))
                if r < best_r - 1e-14:
                    best, best_r = x, r
    return best, best_r


def brute_force_simplex(A, b):
    m = A.shape[1]
    best, best_r = None, np.inf
    for k in range(1, m + 1):
        for S in itertools.combinations(range(m), k):
            # min |A_S x - b|^2 s.t. sum x = 1 via the KKT system
            AS = A[:, S]
            K = np.block([[AS.T @ AS, np.ones((k, 1))], [np.ones((1, k)), np.zeros((1, 1))]])
            rhs = np.concatenate([AS.T @ b, [1.0]])
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0][:k]
            if np.all(sol >= -1e-12):
                x = np.zeros(m)
                x[list(S)] = np.maximum(sol, 0)
                x /= x.sum()
                r = float(np.sum((A @ x - b) ** 2))
                if r < best_r - 1e-14:
                    best, best_r = x, r
    return best, best_r


def test_scipy_free_oracle_on_known_case():
    A = np.eye(3)
    b = np.array([1.0, -2.0, 0.5])
    x = nnls_gram(A.T @ A, A.T @ b)
    assert np.allclose(x, [1.0, 0.0, 0.5])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6), st.integers(2, 7))
def test_nnls_matches_support_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    b = rng.standard_normal(n)
    x = nnls_gram(A.T @ A, A.T @ b)
    _, r_ref = brute_force_nnls(A, b)
    r = float(np.sum((A @ x - b) ** 2))
    assert np.all(x >= 0)
    assert r <= r_ref + 1e-10 * (1 + r_ref)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(2, 6))
def test_simplex_matches_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    b = rng.standard_normal(n)
    x = simplex_ls_gram(A.T @ A, A.T @ b)
    _, r_ref = brute_force_simplex(A, b)
    assert np.all(x >= 0) and abs(x.sum() - 1) <= 1e-12
    assert float(np.sum((A @ x - b) ** 2)) <= r_ref + 1e-10 * (1 + r_ref)


def test_batch_kernels_agree_with_python_fallback():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((4, 6))
    G = A.T @ A
    H = rng.standard_normal((500, 4)) @ A
    X, status = nnls_batch(G, H)
    Xp, sp = _nnls_batch_py(G, H, 300, 1e-10)
    assert np.all(status == 0) and np.all(sp == 0)
    assert np.allclose(X, Xp, atol=1e-10)
    Y, ys = simplex_batch(G, H)
    Yp, yps = _simplex_batch_py(G, H, 300, 1e-10)
    assert np.allclose(Y, Yp, atol=1e-10)


def test_kkt_conditions_on_batch():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((5, 9))
    G = A.T @ A
    H = rng.standard_normal((2000, 5)) @ A
    X, status = nnls_batch(G, H)
    grad = X @ G - H
    assert np.all(X >= 0)
    assert np.all(grad >= -1e-8)
    assert np.max(np.abs(X * grad)) <= 1e-8
