import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussconvex.distributions import ScalarDistribution
from gaussconvex.gauss_core import SeededStream, std_normal_cdf
from gaussconvex.mgf_convexity import (
    InsufficientDomainError,
    chernoff_lower_tail_check,
    gaussian_chord,
    lambda_profile,
    mgf_upper_bound_check,
    orientation_gap,
    strict_convexity_gap,
)
from gaussconvex.oracles import BUILTIN_CONVEX_1D

SQUARE = ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["square"]())
GRID = np.round(np.arange(-2.0, 0.4 + 1e-9, 0.05), 10)


def chi2_lambda(p):
    # E e^{p Z^2} = (1 - 2p)^{-1/2}
    return -math.log(1 - 2 * p) / (2 * p) if p != 0 else 1.0


def test_square_lambda_matches_closed_form():
    prof = lambda_profile(SQUARE, GRID)
    ref = np.array([chi2_lambda(p) for p in GRID])
    assert np.allclose(prof.values, ref, rtol=1e-12, atol=1e-12)
    assert prof.is_convex()
    assert np.nanmin(prof.second_differences) >= -1e-7


def test_gaussian_lambda_is_affine():
    prof = lambda_profile(ScalarDistribution.gaussian(0.0, 1.0), GRID)
    assert np.nanmax(np.abs(prof.second_differences)) <= 1e-9
    assert prof.is_convex() and prof.is_concave()


def test_poisson_lambda_is_convex():
    grid = np.linspace(-3, 3, 121)
    prof = lambda_profile(ScalarDistribution.poisson(1.0), grid)
    # fine-grid oracle for (e^p - 1)/p
    ref = np.where(grid == 0, 1.0, np.expm1(grid) / np.where(grid == 0, 1.0, grid))
    assert np.allclose(prof.values, ref, rtol=1e-10)
    assert prof.is_convex()


def test_divergent_points_are_excluded_not_errors():
    grid = np.linspace(-1.0, 1.5, 26)
    prof = lambda_profile(ScalarDistribution.exponential(1.0), grid)
    assert np.isinf(prof.values[grid >= 1.0]).all()
    assert prof.is_convex()


def test_chord_matches_endpoints():
    ch = gaussian_chord(SQUARE, -1.0, -0.5)
    assert ch.lambda_o(-1.0) == pytest.approx(chi2_lambda(-1.0), abs=1e-10)
    assert ch.lambda_o(-0.5) == pytest.approx(chi2_lambda(-0.5), abs=1e-10)
    e = ScalarDistribution.exponential(1.0)
    ch = gaussian_chord(e, -2.0, -1.0)
    assert ch.lambda_o(-2.0) == pytest.approx(math.log(3) / 2, abs=1e-10)
    assert ch.lambda_o(-1.0) == pytest.approx(math.log(2), abs=1e-10)


def test_strict_gap():
    gap = strict_convexity_gap(SQUARE, -1.5, -0.5, [-1.0])[0]
    chord = (chi2_lambda(-1.5) + chi2_lambda(-0.5)) / 2
    assert gap == pytest.approx(chord - chi2_lambda(-1.0), abs=1e-12)
    assert gap >= 1e-3
    g = strict_convexity_gap(ScalarDistribution.gaussian(0, 2), -1.5, -0.5, np.linspace(-1.4, -0.6, 9))
    assert np.max(np.abs(g)) <= 1e-9
    with pytest.raises(ValueError):
        strict_convexity_gap(SQUARE, -1.5, -0.5, [-0.2])


@pytest.mark.parametrize("dist", [SQUARE, ScalarDistribution.poisson(2.0), ScalarDistribution.exponential(1.0),
                                  ScalarDistribution.from_samples([0.1, 0.5, 3.0])])
def test_orientation_identity(dist):
    assert orientation_gap(dist, np.linspace(-0.9, 0.4, 14)) <= 1e-10


def test_mgf_upper_bound():
    b = mgf_upper_bound_check(ScalarDistribution.exponential(1.0), -0.5)
    assert b.lhs == pytest.approx(2 / 3)
    assert b.rhs == pytest.approx(math.exp(1 / 8 - 1 / 2))
    assert b.holds
    with pytest.raises(ValueError):
        mgf_upper_bound_check(SQUARE, 0.5)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3.0, 0.0))
def test_mgf_bound_holds_for_convex_images(lam):
    for name in ("square", "abs", "exp", "softplus"):
        assert mgf_upper_bound_check(ScalarDistribution.pushforward(BUILTIN_CONVEX_1D[name]()), lam).holds


def test_chernoff_rows():
    rows = chernoff_lower_tail_check(ScalarDistribution.gaussian(), [1.0], SeededStream(0, 5), 100000)
    assert rows[0].empirical == pytest.approx(std_normal_cdf(-1.0), abs=4 * rows[0].stderr)
    assert rows[0].bound == pytest.approx(math.exp(-0.5))
    rows = chernoff_lower_tail_check(SQUARE, [2.0], SeededStream(0, 5), 10000)
    assert rows[0].empirical == 0.0 and rows[0].holds
    with pytest.raises(InsufficientDomainError):
        chernoff_lower_tail_check(SQUARE, [1.0], SeededStream(), 10)


def test_profile_csv_has_header_and_rows():
    text = lambda_profile(SQUARE, GRID[:5]).to_csv(["seed: 0"])
    lines = text.splitlines()
    assert lines[0] == "# seed: 0"
    assert lines[1] == "p,lambda,second_diff"
    assert len(lines) == 2 + 5
