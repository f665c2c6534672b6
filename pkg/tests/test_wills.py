import math

import numpy as np
import pytest
from scipy import integrate

from gaussconvex.gauss_core import SeededStream
from reference_oracles import grid_sup_polygon
from gaussconvex.wills_functional import (
    SCALE,
    ConvexBody,
    f_K,
    intrinsic_volumes_closed,
    mcmullen_check,
    polygon_f_exact,
    reversal_check,
    unit_ball_volume,
    v1_mc,
    wills_mc,
)


def test_ball_f_closed_form_and_radial_sup():
    body = ConvexBody.ball(1.0, 2)
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((500, 2)) * 2
    r = np.linalg.norm(Z, axis=1)
    closed = np.where(r >= SCALE, SCALE * r - math.pi, r**2 / 2)
    assert np.allclose(f_K(body, Z), closed, atol=1e-12)
    # direct sup over a radial grid along the direction of z
    rho = np.linspace(0, SCALE, 200001)
    sup = np.array([np.max(rho * ri - rho**2 / 2) for ri in r[:50]])
    assert np.allclose(closed[:50], sup, atol=1e-9)


def test_polygon_f_against_exact_and_grid_sup():
    rng = np.random.default_rng(5)
    V = rng.standard_normal((6, 2)) * 0.5
    body = ConvexBody.polytope(V)
    Z = rng.standard_normal((60, 2)) * 1.5
    f = f_K(body, Z)
    assert np.allclose(f, [polygon_f_exact(V, z) for z in Z], atol=1e-10)
    assert np.allclose(f, [grid_sup_polygon(V, z) for z in Z], atol=1e-6)


def test_projection_and_support_consistency():
    for body in (ConvexBody.ball(0.7, 3, center=[0.1, 0, 0.2]), ConvexBody.box([1, 2], offset=[-0.5, 0]),
                 ConvexBody.polytope(np.random.default_rng(1).standard_normal((7, 3)))):
        assert body.check_radius(SeededStream(1))
    assert not ConvexBody.box([1, 1], r=0.5).check_radius(SeededStream(1))


def test_closed_intrinsic_volumes():
    assert np.allclose(intrinsic_volumes_closed(ConvexBody.ball(1.0, 3)), [1, 4, 2 * math.pi, 4 * math.pi / 3])
    assert np.allclose(intrinsic_volumes_closed(ConvexBody.ball(1.0, 2)), [1, math.pi, math.pi])
    assert np.allclose(intrinsic_volumes_closed(ConvexBody.box([1, 2, 3])), [1, 6, 11, 6])
    assert unit_ball_volume(4) == pytest.approx(math.pi**2 / 2)


def _segment_f(z):
    # K = [0, 1]: the nearest point of [0, s] to z
    y = np.clip(z, 0.0, SCALE)
    return z * y - y * y / 2


def _gauss(z):
    return math.exp(-z * z / 2) / math.sqrt(2 * math.pi)


def test_segment_against_quadrature():
    quad = lambda g: integrate.quad(lambda z: g(z) * _gauss(z), -40, 40, points=[0.0, SCALE], limit=200)[0]
    ef = quad(_segment_f)
    ef2 = quad(lambda z: _segment_f(z) ** 2)
    W = quad(lambda z: math.exp(_segment_f(z)))
    assert W == pytest.approx(2.0, abs=1e-8)
    rep = wills_mc(ConvexBody.segment(), 200000, SeededStream(3))
    assert abs(rep.W_estimate - 2.0) <= 4 * rep.W_stderr
    assert abs(rep.mean_f - ef) <= 0.01
    assert abs(rep.var_f - (ef2 - ef**2)) <= 0.02
    var = ef2 - ef**2
    assert math.log(2) >= var / 2 + ef
    # the r^2/2 form of the last step fails here too; the pi r^2 form holds
    assert ef < 1 - 0.5
    assert ef >= 1 - math.pi


def test_ball_corollary_as_stated_fails_by_quadrature():
    """Radial quadrature: for the unit disk, E f < V_1 - r^2/2, so the literal chain breaks."""
    def radial(g):
        return integrate.quad(lambda r: g(r) * r * math.exp(-r * r / 2), 0, np.inf)[0]

    f = lambda r: SCALE * r - math.pi if r >= SCALE else r * r / 2
    ef = radial(f)
    var = radial(lambda r: f(r) ** 2) - ef**2
    log_w = math.log(1 + 2 * math.pi)
    assert log_w >= var / 2 + ef
    assert ef < math.pi - 0.5
    assert ef >= math.pi - math.pi * 1.0**2


@pytest.mark.parametrize("body,W", [(ConvexBody.ball(1.0, 2), 1 + 2 * math.pi),
                                    (ConvexBody.box([1.0, 1.0]), 4.0),
                                    (ConvexBody.ball(0.5, 3), None),
                                    (ConvexBody.ball(2.0, 2), None),
                                    (ConvexBody.box([1.0, 2.0, 1.0], offset=[0.5, -1.0, 0.0]), None)])
def test_wills_estimates(body, W):
    rep = wills_mc(body, 200000, SeededStream(4))
    ref = W if W is not None else float(intrinsic_volumes_closed(body).sum())
    assert abs(rep.W_estimate - ref) <= 4 * rep.W_stderr
    assert abs(rep.V1_estimate - intrinsic_volumes_closed(body)[1]) <= 4 * rep.V1_stderr
    assert rep.mcmullen_holds and rep.main_holds and rep.corollary_scaled_holds
    assert rep.W_estimate >= 1 - 3 * rep.W_stderr


def test_point_body_equalities():
    rep = wills_mc(ConvexBody.point([0.0, 0.0]), 10000, SeededStream(1))
    assert abs(rep.mean_f) <= 1e-12 and rep.var_f <= 1e-24 and rep.V1_estimate == 0.0
    assert rep.W_estimate == pytest.approx(1.0, abs=1e-12)
    assert rep.main_holds and rep.corollary_holds and rep.mcmullen_holds


def test_translation_invariance():
    body = ConvexBody.box([1.0, 0.5])
    a = wills_mc(body, 100000, SeededStream(2))
    b = wills_mc(body.translate([0.3, -0.2]), 100000, SeededStream(3))
    assert abs(a.W_estimate - b.W_estimate) <= 3 * math.hypot(a.W_stderr, b.W_stderr)
    assert abs(a.V1_estimate - b.V1_estimate) <= 3 * math.hypot(a.V1_stderr, b.V1_stderr)


def test_monotonicity_on_nested_pair():
    small, big = ConvexBody.ball(0.5, 2), ConvexBody.ball(1.0, 2)
    a = wills_mc(small, 100000, SeededStream(5))
    b = wills_mc(big, 100000, SeededStream(6))
    assert a.W_estimate <= b.W_estimate + 3 * math.hypot(a.W_stderr, b.W_stderr)
    assert a.V1_estimate <= b.V1_estimate + 3 * math.hypot(a.V1_stderr, b.V1_stderr)


def test_helpers_and_errors():
    body = ConvexBody.box([1.0, 1.0])
    v1, se = v1_mc(body, 50000, SeededStream(1))
    assert abs(v1 - 2.0) <= 4 * se
    assert mcmullen_check(body, 20000, SeededStream(1))["holds"]
    assert reversal_check(body, 20000, SeededStream(1))["main_holds"]
    with pytest.raises(ValueError):
        wills_mc(body, 10, SeededStream())
    with pytest.warns(RuntimeWarning):
        # a long needle: its enclosing ball is a poor proposal scale
        wills_mc(ConvexBody.box([1e-4, 1e-4, 1e-4, 1e-4, 30.0]), 5000, SeededStream())
    with pytest.raises(ValueError):
        ConvexBody.from_json({"n": 2, "kind": "ball", "r": -1})
    with pytest.raises(ValueError):
        ConvexBody.from_json({"n": 3, "kind": "box", "r": 2, "sides": [1, 1]})
