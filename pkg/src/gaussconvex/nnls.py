"""Active-set (Lawson-Hanson) least squares on a Gram matrix.

Both solvers minimize ``lam^T G lam / 2 - h^T lam`` over ``lam >= 0``; with
``G = V^T V`` and ``h = V^T x`` this is ``min |V lam - x|^2``. The simplex
variant adds ``sum(lam) = 1`` and projects onto the convex hull of the
columns of ``V``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["NumericalFailure", "nnls_batch", "nnls_gram", "simplex_batch", "simplex_ls_gram"]


class NumericalFailure(RuntimeError):
    pass


def _solve(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(G, rhs, rcond=None)[0]


def nnls_gram(G: np.ndarray, h: np.ndarray, maxiter: int | None = None,
              tol: float = 1e-10) -> np.ndarray:
    """Nonnegative least squares in Gram form.

    ``tol`` is relative to ``max(1, |h|_inf)``. Raises
    :class:`NumericalFailure` after ``maxiter`` (default ``50 m``) passes.
    """
    m = h.size
    maxiter = 50 * m if maxiter is None else maxiter
    scale = max(1.0, float(np.max(np.abs(h)))) if m else 1.0
    thresh = tol * scale
    lam = np.zeros(m)
    passive = np.zeros(m, dtype=bool)
    w = h.copy()
    it = 0
    while True:
        cand = np.where(passive, -np.inf, w)
        j = int(np.argmax(cand))
        if cand[j] <= thresh:
            break
        passive[j] = True
        while True:
            it += 1
            if it > maxiter:
                raise NumericalFailure(
                    f"NNLS did not converge in {maxiter} iterations "
                    f"(cond(G)={np.linalg.cond(G):.3g}, active={int(passive.sum())})")
            idx = np.flatnonzero(passive)
            s = np.zeros(m)
            s[idx] = _solve(G[np.ix_(idx, idx)], h[idx])
            if np.all(s[idx] > 0):
                lam = s
                break
            neg = idx[s[idx] <= 0]
            alpha = np.min(lam[neg] / (lam[neg] - s[neg]))
            lam = lam + alpha * (s - lam)
            passive &= lam > thresh * 1e-6
            lam[~passive] = 0.0
        w = h - G @ lam
    return lam


def simplex_ls_gram(G: np.ndarray, h: np.ndarray, maxiter: int | None = None,
                    tol: float = 1e-10) -> np.ndarray:
    """Least squares over the probability simplex, in Gram form."""
    m = h.size
    maxiter = 50 * m if maxiter is None else maxiter
    scale = max(1.0, float(np.max(np.abs(h))), float(np.max(np.abs(np.diag(G)))))
    thresh = tol * scale
    j0 = int(np.argmin(0.5 * np.diag(G) - h))
    lam = np.zeros(m)
    lam[j0] = 1.0
    passive = np.zeros(m, dtype=bool)
    passive[j0] = True
    it = 0
    while True:
        w = h - G @ lam
        nu = float(np.mean(w[passive]))
        cand = np.where(passive, -np.inf, w - nu)
        j = int(np.argmax(cand))
        if cand[j] <= thresh:
            break
        passive[j] = True
        while True:
            it += 1
            if it > maxiter:
                raise NumericalFailure(f"simplex least squares did not converge in {maxiter} iterations")
            idx = np.flatnonzero(passive)
            k = idx.size
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = G[np.ix_(idx, idx)]
            K[:k, k] = 1.0
            K[k, :k] = 1.0
            sol = _solve(K, np.concatenate([h[idx], [1.0]]))
            s = np.zeros(m)
            s[idx] = sol[:k]
            if np.all(s[idx] > 0):
                lam = s
                break
            neg = idx[s[idx] <= 0]
            alpha = np.min(lam[neg] / (lam[neg] - s[neg]))
            lam = lam + alpha * (s - lam)
            passive &= lam > thresh * 1e-6
            lam[~passive] = 0.0
            lam /= lam.sum()
    return lam


try:  # optional acceleration for Monte Carlo batches
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def _nnls_batch_py(G, H, maxiter, tol):
    out = np.empty_like(H)
    status = np.zeros(H.shape[0], dtype=np.int64)
    for i in range(H.shape[0]):
        try:
            out[i] = nnls_gram(G, H[i], maxiter, tol)
        except NumericalFailure:
            out[i] = np.nan
            status[i] = 1
    return out, status


def _nnls_batch_kernel(G, H, maxiter, tol):
    N, m = H.shape
    out = np.zeros((N, m))
    status = np.zeros(N, dtype=np.int64)
    for r in range(N):
        h = H[r]
        scale = 1.0
        for k in range(m):
            if abs(h[k]) > scale:
                scale = abs(h[k])
        thresh = tol * scale
        lam = np.zeros(m)
        passive = np.zeros(m, dtype=np.bool_)
        w = h.copy()
        it = 0
        failed = False
        while True:
            j = -1
            best = thresh
            for k in range(m):
                if not passive[k] and w[k] > best:
                    best = w[k]
                    j = k
            if j < 0:
                break
            passive[j] = True
            while True:
                it += 1
                if it > maxiter:
                    failed = True
                    break
                idx = np.flatnonzero(passive)
                k = idx.size
                Gs = np.empty((k, k))
                hs = np.empty(k)
                for a in range(k):
                    hs[a] = h[idx[a]]
                    for b in range(k):
                        Gs[a, b] = G[idx[a], idx[b]]
                ss = np.linalg.solve(Gs, hs)
                s = np.zeros(m)
                allpos = True
                for a in range(k):
                    s[idx[a]] = ss[a]
                    if ss[a] <= 0.0:
                        allpos = False
                if allpos:
                    lam = s
                    break
                alpha = np.inf
                for a in range(k):
                    q = idx[a]
                    if s[q] <= 0.0:
                        step = lam[q] / (lam[q] - s[q])
                        if step < alpha:
                            alpha = step
                for q in range(m):
                    lam[q] = lam[q] + alpha * (s[q] - lam[q])
                    if passive[q] and lam[q] <= thresh * 1e-6:
                        passive[q] = False
                    if not passive[q]:
                        lam[q] = 0.0
            if failed:
                break
            w = h - G @ lam
        if failed:
            status[r] = 1
            out[r, :] = np.nan
        else:
            out[r] = lam
    return out, status


if njit is not None:
    _nnls_batch_jit = njit(cache=True)(_nnls_batch_kernel)
else:  # pragma: no cover
    _nnls_batch_jit = None


def nnls_batch(G: np.ndarray, H: np.ndarray, maxiter: int | None = None,
               tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`nnls_gram` for ``H`` of shape ``(N, m)``.

    Returns ``(coefficients, status)``; ``status[i] = 1`` marks a row that
    hit the iteration cap (its coefficients are NaN).
    """
    G = np.ascontiguousarray(G, dtype=float)
    H = np.ascontiguousarray(H, dtype=float)
    maxiter = 50 * G.shape[0] if maxiter is None else int(maxiter)
    if _nnls_batch_jit is not None:
        return _nnls_batch_jit(G, H, maxiter, tol)
    return _nnls_batch_py(G, H, maxiter, tol)


def _simplex_batch_kernel(G, H, maxiter, tol):
    N, m = H.shape
    out = np.zeros((N, m))
    status = np.zeros(N, dtype=np.int64)
    dmax = 0.0
    for k in range(m):
        if abs(G[k, k]) > dmax:
            dmax = abs(G[k, k])
    for r in range(N):
        h = H[r]
        scale = max(1.0, dmax)
        for k in range(m):
            if abs(h[k]) > scale:
                scale = abs(h[k])
        thresh = tol * scale
        j0 = 0
        bestv = np.inf
        for k in range(m):
            v = 0.5 * G[k, k] - h[k]
            if v < bestv:
                bestv = v
                j0 = k
        lam = np.zeros(m)
        lam[j0] = 1.0
        passive = np.zeros(m, dtype=np.bool_)
        passive[j0] = True
        it = 0
        failed = False
        while True:
            w = h - G @ lam
            nu = 0.0
            cnt = 0
            for k in range(m):
                if passive[k]:
                    nu += w[k]
                    cnt += 1
            nu /= cnt
            j = -1
            best = thresh
            for k in range(m):
                if not passive[k] and w[k] - nu > best:
                    best = w[k] - nu
                    j = k
            if j < 0:
                break
            passive[j] = True
            while True:
                it += 1
                if it > maxiter:
                    failed = True
                    break
                idx = np.flatnonzero(passive)
                k = idx.size
                K = np.zeros((k + 1, k + 1))
                rhs = np.empty(k + 1)
                for a in range(k):
                    rhs[a] = h[idx[a]]
                    K[a, k] = 1.0
                    K[k, a] = 1.0
                    for b in range(k):
                        K[a, b] = G[idx[a], idx[b]]
                rhs[k] = 1.0
                sol = np.linalg.solve(K, rhs)
                s = np.zeros(m)
                allpos = True
                for a in range(k):
                    s[idx[a]] = sol[a]
                    if sol[a] <= 0.0:
                        allpos = False
                if allpos:
                    lam = s
                    break
                alpha = np.inf
                for a in range(k):
                    q = idx[a]
                    if s[q] <= 0.0:
                        step = lam[q] / (lam[q] - s[q])
                        if step < alpha:
                            alpha = step
                total = 0.0
                for q in range(m):
                    lam[q] = lam[q] + alpha * (s[q] - lam[q])
                    if passive[q] and lam[q] <= thresh * 1e-6:
                        passive[q] = False
                    if not passive[q]:
                        lam[q] = 0.0
                    total += lam[q]
                for q in range(m):
                    lam[q] /= total
            if failed:
                break
        if failed:
            status[r] = 1
            out[r, :] = np.nan
        else:
            out[r] = lam
    return out, status


def _simplex_batch_py(G, H, maxiter, tol):
    out = np.empty_like(H)
    status = np.zeros(H.shape[0], dtype=np.int64)
    for i in range(H.shape[0]):
        try:
            out[i] = simplex_ls_gram(G, H[i], maxiter, tol)
        except NumericalFailure:
            out[i] = np.nan
            status[i] = 1
    return out, status


_simplex_batch_jit = njit(cache=True)(_simplex_batch_kernel) if njit is not None else None


def simplex_batch(G: np.ndarray, H: np.ndarray, maxiter: int | None = None,
                  tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`simplex_ls_gram`; same return convention as :func:`nnls_batch`.

    A singular KKT system (e.g. repeated vertices) falls back to the
    pure-Python solver, which uses least squares.
    """
    G = np.ascontiguousarray(G, dtype=float)
    H = np.ascontiguousarray(H, dtype=float)
    maxiter = 50 * G.shape[0] if maxiter is None else int(maxiter)
    if _simplex_batch_jit is not None:
        try:
            return _simplex_batch_jit(G, H, maxiter, tol)
        except Exception:  # numba raises on a singular solve
            pass
    return _simplex_batch_py(G, H, maxiter, tol)
