import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from gaussconvex.distributions import ScalarDistribution
from gaussconvex.gauss_core import SeededStream
from gaussconvex.oracles import (
    BUILTIN_CONVEX_1D,
    affine_deviation,
    concave_quadratic,
    linear_form,
    midpoint_violations,
)

LAWS = {
    "gaussian": (ScalarDistribution.gaussian(0.3, 2.0), stats.norm(0.3, math.sqrt(2.0))),
    "exponential": (ScalarDistribution.exponential(1.5), stats.expon(scale=1 / 1.5)),
    "square": (ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["square"]()), stats.chi2(1)),
    "abs": (ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["abs"]()), stats.halfnorm()),
    "exp": (ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["exp"]()), stats.lognorm(1.0)),
}


@pytest.mark.parametrize("name", LAWS)
def test_cdf_and_moments_against_scipy(name):
    d, ref = LAWS[name]
    for t in ref.ppf([0.01, 0.2, 0.5, 0.8, 0.99]):
        assert d.cdf(t) == pytest.approx(ref.cdf(t), abs=1e-10)
    mean, var = d.moments()
    assert mean == pytest.approx(ref.mean(), rel=1e-8)
    assert var == pytest.approx(ref.var(), rel=1e-8)


@pytest.mark.parametrize("name", ["gaussian", "exponential", "square", "abs"])
@pytest.mark.parametrize("p", [-2.0, -0.7, -0.1, 0.2])
def test_log_mgf_against_numerical_integral(name, p):
    d, ref = LAWS[name]
    lo, hi = ref.support()
    val = integrate.quad(lambda x: math.exp(p * x) * ref.pdf(x), max(lo, -60), min(hi, 200), limit=400,
                         points=None)[0]
    assert d.log_mgf(p) == pytest.approx(math.log(val), abs=1e-8)


def test_softplus_pushforward_by_quadrature():
    d = ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["softplus"]())
    f = lambda z: math.log1p(math.exp(z))
    val = integrate.quad(lambda z: math.exp(-0.5 * f(z) - z * z / 2) / math.sqrt(2 * math.pi), -40, 40)[0]
    assert d.log_mgf(-0.5) == pytest.approx(math.log(val), abs=1e-9)


def test_divergent_mgf_is_infinite():
    assert ScalarDistribution.exponential(1.0).log_mgf(1.0) == math.inf
    assert ScalarDistribution.pushforward(BUILTIN_CONVEX_1D["square"]()).log_mgf(0.6) == math.inf


def test_poisson_closed_forms():
    d = ScalarDistribution.poisson(1.3)
    assert d.log_mgf(0.4) == pytest.approx(1.3 * (math.exp(0.4) - 1), rel=1e-13)
    assert d.cdf(2.0) == pytest.approx(stats.poisson(1.3).cdf(2), rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.001, 0.999))
def test_quantile_round_trip_closed_forms(u):
    for name in ("gaussian", "exponential", "square"):
        d, _ = LAWS[name]
        x = d.quantile(u)
        assert d.cdf(x) == pytest.approx(u, abs=1e-8)


def test_density_grid_validation_and_cdf():
    x = np.linspace(-9, 9, 20001)
    rho = stats.norm.pdf(x)
    d = ScalarDistribution.from_density(x, rho)
    assert d.cdf(0.5) == pytest.approx(stats.norm.cdf(0.5), abs=1e-7)
    with pytest.raises(ValueError):
        ScalarDistribution.from_density(x, 2 * rho)
    with pytest.raises(ValueError):
        ScalarDistribution.from_density(x, -rho)


def test_sample_set_moments_and_negation():
    d = ScalarDistribution.from_samples([1.0, 2.0, 4.0])
    assert d.mean() == pytest.approx(7 / 3)
    assert d.negate().mean() == pytest.approx(-7 / 3)
    with pytest.raises(ValueError):
        ScalarDistribution.from_samples([])
    with pytest.raises(ValueError):
        ScalarDistribution.from_samples([1.0, math.nan])


def test_sampling_matches_law():
    d = ScalarDistribution.exponential(1.0)
    xs = d.sample(200000, SeededStream(1))
    assert stats.kstest(xs, "expon").pvalue > 1e-3


def test_oracle_shapes_hold_on_probes():
    s = SeededStream(2)
    for name, make in BUILTIN_CONVEX_1D.items():
        assert midpoint_violations(make(), s) == 0, name
    assert midpoint_violations(concave_quadratic(np.eye(2)), s) == 0
    assert affine_deviation(linear_form([1.0, -2.0], 0.5), s) <= 1e-12
    with pytest.raises(ValueError):
        concave_quadratic([[1.0, 0.0], [0.0, -1.0]])
