import math
import warnings

import numpy as np
import pytest

from gaussconvex.distributions import ScalarDistribution
from gaussconvex.gauss_core import SeededStream, std_normal_quantile
from gaussconvex.oracles import BUILTIN_CONVEX_1D, coordinate_max, coordinate_sum, sum_of_squares
from gaussconvex.transport_char import (
    ContractError,
    concavity_test,
    convex_pushforward,
    convexity_test,
    exponential_adaptation_check,
    gaussian_transport_map,
    pushforward_normality_screen,
)


def test_exponential_map_closed_form_and_concave():
    grid = np.linspace(0.01, 10.0, 1000)
    m = gaussian_transport_map(ScalarDistribution.exponential(1.0), grid)
    ref = np.array([std_normal_quantile(-math.expm1(-t)) for t in grid])
    assert np.allclose(m.values, ref, atol=1e-12)
    res = concavity_test(m)
    assert res.is_concave and res.witness is None


def test_poisson_samples_fail_with_witness():
    xs = ScalarDistribution.poisson(1.0).sample(100000, SeededStream(0, 2))
    d = ScalarDistribution.from_samples(xs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = gaussian_transport_map(d, np.arange(0.0, 3.0 + 1e-9, 0.02))
    res = concavity_test(m)
    assert not res.is_concave
    a, b, c = res.witness
    assert a < b < c
    # the witness straddles a jump of the step function
    assert math.floor(a) != math.floor(c)


def test_gaussian_map_is_affine():
    m = gaussian_transport_map(ScalarDistribution.gaussian(1.0, 4.0), np.linspace(-5, 7, 200))
    assert np.allclose(m.values, (m.grid - 1.0) / 2.0, atol=1e-12)
    assert concavity_test(m).is_concave and convexity_test(m).is_concave


def test_excluded_points_warn():
    with pytest.warns(RuntimeWarning):
        m = gaussian_transport_map(ScalarDistribution.exponential(1.0), np.linspace(-1, 3, 41))
    assert m.excluded == 11  # t in [-1, 0]


def test_convex_pushforward_round_trip():
    d = convex_pushforward(BUILTIN_CONVEX_1D["square"](), 200000, SeededStream(3))
    for t in (0.1, 0.5, 1.0, 2.0):
        assert d.cdf(t) == pytest.approx(math.erf(math.sqrt(t / 2)), abs=4 * math.sqrt(0.25 / 200000))
    assert concavity_test(gaussian_transport_map(d, np.linspace(0.05, 4.0, 60))).is_concave
    with pytest.raises(ContractError):
        convex_pushforward(BUILTIN_CONVEX_1D["square"]().negated(), 1000, SeededStream())


def test_normality_screen():
    assert pushforward_normality_screen(ScalarDistribution.exponential(1.0), 20000, SeededStream(4))["passes"]


@pytest.mark.parametrize("f", [coordinate_sum(3), coordinate_max(2), sum_of_squares(2)])
def test_exponential_adaptation(f):
    rows = exponential_adaptation_check(f, [0.5, 1.0, 2.0], 100000, SeededStream(6))
    assert all(r.holds for r in rows)
