import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussconvex.oracles import concave_quadratic, linear_form
from gaussconvex.renyi_div import (
    RelativeDensity,
    chain_check,
    chi_squared,
    comparison_check,
    equality_rigidity,
    hellinger,
    kl_divergence,
    renyi_divergence,
    reverse_divergence,
)


def gaussian_renyi(Q, b, alpha):
    """D_alpha(N(m, S) || N(0, I)) for the law with density proportional to exp(-x'Qx/2 + b'x) against gamma."""
    Q = np.atleast_2d(Q)
    n = Q.shape[0]
    S = np.linalg.inv(np.eye(n) + Q)
    m = S @ np.asarray(b, dtype=float)
    if alpha == 1.0:
        return 0.5 * (np.trace(S) + m @ m - n - math.log(np.linalg.det(S)))
    Sa = alpha * np.eye(n) + (1 - alpha) * S
    return (0.5 * alpha * m @ np.linalg.solve(Sa, m)
            - math.log(np.linalg.det(Sa) / np.linalg.det(S) ** (1 - alpha)) / (2 * (alpha - 1)))


def mp_renyi_1d(logdens, alpha):
    """Direct integration of the normalized relative density against gamma_1."""
    mpmath.mp.dps = 30
    g = lambda x: mpmath.exp(-x * x / 2) / mpmath.sqrt(2 * mpmath.pi)
    z = mpmath.quad(lambda x: mpmath.exp(logdens(x)) * g(x), [-mpmath.inf, 0, mpmath.inf])
    if alpha == 1.0:
        val = mpmath.quad(lambda x: mpmath.exp(logdens(x)) / z * (logdens(x) - mpmath.log(z)) * g(x),
                          [-mpmath.inf, 0, mpmath.inf])
        return float(val)
    val = mpmath.quad(lambda x: (mpmath.exp(logdens(x)) / z) ** alpha * g(x), [-mpmath.inf, 0, mpmath.inf])
    return float(mpmath.log(val) / (alpha - 1))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
@pytest.mark.parametrize("q,b", [(1.0, 0.0), (0.3, 0.7), (2.0, -1.0)])
def test_closed_form_oracle_agrees_with_mpmath(alpha, q, b):
    ref = mp_renyi_1d(lambda x: -q * x * x / 2 + b * x, alpha)
    assert gaussian_renyi([[q]], [b], alpha) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.5])
def test_quadrature_matches_oracle_1d(alpha):
    rd = RelativeDensity(concave_quadratic([[1.0]]))
    assert rd.method == "quadrature"
    assert renyi_divergence(rd, alpha).value == pytest.approx(gaussian_renyi([[1.0]], [0.0], alpha), abs=1e-8)


def test_kl_half_variance():
    rd = RelativeDensity(concave_quadratic([[1.0]]))
    assert kl_divergence(rd).value == pytest.approx(math.log(2) / 2 - 0.25, abs=1e-8)


def test_translation_divergences():
    rd = RelativeDensity(linear_form([1.0], -0.5))
    assert renyi_divergence(rd, 2.0).value == pytest.approx(1.0, abs=1e-6)
    assert kl_divergence(rd).value == pytest.approx(0.5, abs=1e-6)
    assert chi_squared(rd) == pytest.approx(math.e - 1, abs=1e-6)
    cmp = comparison_check(rd, 1.0, 2.0)
    assert abs(cmp.ratio_bound_slack) <= 1e-8


def test_normalization_is_applied():
    # unnormalized input: the constant is dropped and flagged
    rd = RelativeDensity(linear_form([1.0], 3.0))
    assert rd.renormalized
    assert renyi_divergence(rd, 2.0).value == pytest.approx(1.0, abs=1e-8)


def test_bridges():
    rd = RelativeDensity(concave_quadratic([[1.0]], [0.4]))
    d_half = renyi_divergence(rd, 0.5).value
    assert -2 * math.log1p(-hellinger(rd) / 2) == pytest.approx(d_half, abs=1e-9)
    assert math.log1p(chi_squared(rd)) == pytest.approx(renyi_divergence(rd, 2.0).value, abs=1e-9)


def test_two_dimensional_quadrature():
    Q = np.array([[0.8, 0.3], [0.3, 0.5]])
    b = np.array([0.2, -0.4])
    rd = RelativeDensity(concave_quadratic(Q, b))
    for a in (0.5, 1.0, 2.0):
        assert renyi_divergence(rd, a).value == pytest.approx(gaussian_renyi(Q, b, a), abs=1e-8)


def test_monte_carlo_in_five_dimensions():
    Q = np.diag([0.5, 0.25, 0.2, 0.1, 0.05])
    b = np.array([0.3, 0.0, -0.2, 0.0, 0.1])
    rd = RelativeDensity(concave_quadratic(Q, b), samples=400000, seed=1)
    assert rd.method == "mc"
    for a in (0.5, 1.0, 2.0):
        rep = renyi_divergence(rd, a)
        assert abs(rep.value - gaussian_renyi(Q, b, a)) <= 4 * rep.stderr
    assert chain_check(rd).holds
    assert comparison_check(rd, 1.0, 2.0).holds


def test_zero_density_is_degenerate_equality():
    rd = RelativeDensity(linear_form([0.0], 0.0))
    cmp = comparison_check(rd, 1.0, 2.0)
    assert abs(cmp.d_alpha) <= 1e-12 and abs(cmp.d_beta) <= 1e-12
    assert cmp.holds


def test_reverse_divergence_of_translation():
    rd = RelativeDensity(linear_form([1.5], 0.0))
    assert reverse_divergence(rd, 2.0) == pytest.approx(2 * 1.5**2 / 2, abs=1e-8)


def test_rejects_non_concave():
    from gaussconvex.oracles import BUILTIN_CONVEX_1D

    with pytest.raises(ValueError):
        RelativeDensity(BUILTIN_CONVEX_1D["square"]())
    with pytest.raises(ValueError):
        renyi_divergence(RelativeDensity(linear_form([1.0])), 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-2.0, 2.0), st.floats(0.2, 1.5), st.floats(1.1, 4.0))
def test_comparison_and_chain_properties(q, b, alpha, ratio):
    rd = RelativeDensity(concave_quadratic([[q]], [b]))
    assert comparison_check(rd, alpha, alpha * ratio).holds
    assert chain_check(rd).holds
    assert kl_divergence(rd).value >= -1e-9


def test_equality_rigidity():
    assert equality_rigidity(RelativeDensity(linear_form([0.8])), 1.0, 2.0)["consistent"]
    r = equality_rigidity(RelativeDensity(concave_quadratic([[1.0]])), 1.0, 2.0)
    assert r["consistent"] and not r["tight"] and not r["affine"]
