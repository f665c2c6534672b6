import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gaussconvex.expsum_lab import (
    ExpSum,
    InvariantViolation,
    count_zeros,
    fit_two_zeros,
    positivity_violations,
    root_window,
    sign_pattern_check,
)


def polynomial_zeros(p, c):
    """Real zeros of sum c_i e^{p_i x} for nonnegative integer p via roots in u = e^x (mpmath)."""
    deg = int(max(p))
    coeffs = [0] * (deg + 1)
    for pi, ci in zip(p, c):
        coeffs[deg - int(pi)] += ci
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if len(coeffs) <= 1:
        return []
    mpmath.mp.dps = 50
    roots = mpmath.polyroots([mpmath.mpf(v) for v in coeffs], maxsteps=200, extraprec=200)
    xs = sorted(float(mpmath.log(r.real)) for r in roots
                if abs(r.imag) < mpmath.mpf(10) ** -20 and r.real > 0)
    out = []
    for x in xs:
        if not out or abs(x - out[-1]) > 1e-7:
            out.append(x)
    return out


def test_simple_and_tangential():
    zc = count_zeros(ExpSum([1.0, 2.0], [1.0, -1.0]), (-5.0, 5.0))
    assert zc.count == 1 and abs(zc.roots[0]) <= 1e-12 and zc.tangential == [False]
    zc = count_zeros(ExpSum([0.0, 1.0, 2.0], [1.0, -2.0, 1.0]), (-5.0, 5.0))
    assert zc.count == 1 and zc.tangential == [True] and abs(zc.roots[0]) <= 1e-6


@pytest.mark.parametrize("roots", [[-1.0, 0.5], [-2.0, -1.9, 3.0], [0.1, 0.2, 0.3, 0.4], [-4.0, 4.0]])
def test_constructed_roots_recovered(roots):
    # prod (u - e^{r}) expands to a sum of exponentials with integer exponents
    c = np.poly(np.exp(roots))[::-1]
    psi = ExpSum(np.arange(c.size, dtype=float), c)
    zc = count_zeros(psi)
    assert zc.count == len(roots)
    assert np.allclose(zc.roots, roots, atol=1e-9)
    sp = sign_pattern_check(psi, zc)
    assert sp.passes


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=2, max_size=5, unique=True),
       st.lists(st.floats(-1, 1).filter(lambda v: abs(v) > 0.05), min_size=5, max_size=5))
def test_count_matches_polynomial_oracle(exps, coefs):
    p = np.array(sorted(exps), dtype=float)
    c = np.array(coefs[: p.size])
    psi = ExpSum(p, c)
    ref = polynomial_zeros(p - p[0], c)
    # roots closer than the tangency resolution are legitimately merged
    assume(all(b - a > 1e-3 for a, b in zip(ref, ref[1:])))
    zc = count_zeros(psi)
    assert zc.count <= psi.n
    assert zc.count == len(ref)
    assert np.allclose(zc.roots, ref, atol=1e-7)


def test_root_window_contains_zeros():
    psi = ExpSum([-3.0, 0.5, 4.0], [2.0, -5.0, 1e-3])
    a, b = root_window(psi)
    zc = count_zeros(psi, (a - 50, b + 50), points=20000)
    assert all(a <= r <= b for r in zc.roots)


def test_no_overflow_far_out():
    psi = ExpSum([-50.0, 50.0], [1.0, -1.0])
    assert psi.relative(1000.0) == pytest.approx(-1.0)
    with pytest.raises(OverflowError):
        psi(1000.0)
    zc = count_zeros(psi)
    assert zc.count == 1


def test_rolle_derivative_interleaves():
    psi = ExpSum(np.arange(4.0), np.poly(np.exp([-1.0, 0.0, 1.0]))[::-1])
    d = psi.rolle_derivative()
    assert d.n == psi.n - 1
    r, rd = count_zeros(psi).roots, count_zeros(d).roots
    assert all(any(a < t < b for t in rd) for a, b in zip(r, r[1:]))


def test_symmetric_fit():
    fit = fit_two_zeros(-1.0, 0.0, 1.0, -1.0, 1.0)
    assert fit.c0 == pytest.approx(-1 / (math.e + 1 / math.e), rel=1e-12)
    assert fit.c1 == pytest.approx(fit.c0, rel=1e-12)
    assert positivity_violations(fit) == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-3, 3), min_size=2, max_size=2, unique=True))
def test_fit_signs(p, x):
    p, x = sorted(p), sorted(x)
    assume(p[1] - p[0] > 1e-3 and p[2] - p[1] > 1e-3 and x[1] - x[0] > 1e-3)
    fit = fit_two_zeros(*p, *x)
    assert fit.c0 < 0 and fit.c1 < 0
    assert fit.residual <= 1e-10
    assert positivity_violations(fit) == 0
    assert sign_pattern_check(fit.psi).passes


def test_validation():
    with pytest.raises(ValueError):
        ExpSum([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        ExpSum([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        fit_two_zeros(0.0, -1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        fit_two_zeros(-1.0, 0.0, 1.0, 0.5, 0.5)
    assert issubclass(InvariantViolation, AssertionError)
    with pytest.raises(ValueError):
        count_zeros(ExpSum([0.0, 1.0], [1.0, -1.0]), (1.0, -1.0))


def test_json_round_trip():
    psi = ExpSum([0.0, 1.5], [2.0, -1.0])
    q = ExpSum.from_json(psi.to_json())
    assert np.array_equal(psi.p, q.p) and np.array_equal(psi.c, q.c)


def test_skip_reasons():
    sp = sign_pattern_check(ExpSum([0.0, 1.0, 2.0], [1.0, -2.0, 1.0]))
    assert sp.skipped is not None and not sp.passes
    sp = sign_pattern_check(ExpSum([0.0, 1.0, 2.0], [1.0, 1.0, 1.0]))
    assert "need exactly" in sp.skipped
