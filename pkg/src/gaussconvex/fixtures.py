"""Built-in fixtures: inputs for every subcommand with their reference values.

Each fixture is a JSON-ready input (validated by the same schema as user
files) plus the reference it is checked against and where that reference
comes from. ``provenance`` is one of ``closed_form`` (a classical formula),
``derived`` (an independent computation), or ``trivial``.
"""

from __future__ import annotations

import math

import numpy as np

from .conic_volumes import PolyhedralCone, binomial_profile
from .gauss_core import SeededStream
from .wills_functional import ConvexBody, intrinsic_volumes_closed

__all__ = ["FIXTURES", "fixtures_for", "list_fixtures"]

_SQUARE_GRID = {"start": -2.0, "stop": 0.4, "step": 0.05}


def _gauss_half_kl() -> float:
    return 0.5 * (0.5 - 1.0 - math.log(0.5))


def _random_cone_json(n: int, m: int, seed: int) -> dict:
    return PolyhedralCone.random(n, m, SeededStream(seed)).to_json()


def _random_polygon(seed: int, m: int = 5) -> list:
    """``m`` points at sorted random angles on a circle of radius 0.8, so all are vertices."""
    theta = np.sort(SeededStream(seed).generator().uniform(0.0, 2.0 * math.pi, m))
    return np.round(0.8 * np.column_stack([np.cos(theta), np.sin(theta)]), 6).tolist()


FIXTURES = [
    # mgf
    {"name": "square", "module": "mgf",
     "input": {"name": "square", "distribution": {"family": "pushforward", "oracle": "square"},
               "p_grid": _SQUARE_GRID, "chord": {"p0": -1.5, "p1": -0.5, "p": -1.0, "min_gap": 1e-3},
               "lambda_bound": [-2.0, -1.0, -0.5], "tail_t": [0.5, 1.0, 1.5]},
     "reference": "Lambda(p) = -log(1 - 2p) / (2p); var = 2", "provenance": "closed_form",
     "justification": "chi-square(1) moment generating function"},
    {"name": "abs", "module": "mgf",
     "input": {"name": "abs", "distribution": {"family": "pushforward", "oracle": "abs"},
               "p_grid": {"start": -2.0, "stop": 2.0, "step": 0.1},
               "chord": {"p0": -1.5, "p1": -0.5, "p": -1.0}, "lambda_bound": [-1.0], "tail_t": [0.25, 0.5]},
     "reference": "log E e^{p|Z|} = p^2/2 + log(2 Phi(p))", "provenance": "closed_form",
     "justification": "half-normal moment generating function"},
    {"name": "gaussian", "module": "mgf",
     "input": {"name": "gaussian", "distribution": {"family": "gaussian", "mu": 0.0, "var": 1.0},
               "p_grid": _SQUARE_GRID, "expect_affine": True, "lambda_bound": [-1.0], "tail_t": [1.0]},
     "reference": "Lambda(p) = p / 2 (affine)", "provenance": "closed_form",
     "justification": "Gaussian cumulant generating function"},
    # transport
    {"name": "exponential", "module": "transport",
     "input": {"name": "exponential", "distribution": {"family": "exponential", "rate": 1.0},
               "grid": {"start": 0.01, "stop": 10.0, "num": 1000}, "expect_concave": True},
     "reference": "T concave (exponential is a convex image of a Gaussian)", "provenance": "derived",
     "justification": "(x^2 + y^2) / 2 of two Gaussians is standard exponential"},
    {"name": "poisson_samples", "module": "transport",
     "input": {"name": "poisson_samples", "distribution": {"family": "poisson_samples", "rate": 1.0, "count": 100000},
               "grid": {"start": 0.0, "stop": 3.0, "step": 0.02}, "expect_concave": False},
     "reference": "T is a step function: concavity fails with a witness", "provenance": "derived",
     "justification": "discrete law; the distribution function is piecewise constant"},
    {"name": "square", "module": "transport",
     "input": {"name": "square", "distribution": {"family": "pushforward", "oracle": "square"},
               "grid": {"start": 0.01, "stop": 8.0, "num": 400}, "expect_concave": True},
     "reference": "T concave", "provenance": "derived", "justification": "z^2 is convex"},
    # renyi
    {"name": "translation", "module": "renyi",
     "input": {"name": "translation", "f": {"kind": "linear", "a": [1.0], "b": -0.5},
               "pairs": [[1.0, 2.0], [0.5, 2.0]], "expect_equality": True},
     "reference": "D_alpha = alpha |a|^2 / 2: D_2 = 1, KL = 1/2", "provenance": "closed_form",
     "justification": "Renyi divergence between Gaussians with equal covariance"},
    {"name": "gaussian_half", "module": "renyi",
     "input": {"name": "gaussian_half", "f": {"kind": "quadratic", "Q": [[1.0]]},
               "pairs": [[1.0, 2.0], [0.5, 2.0]], "expect_equality": False},
     "reference": f"N(0, 1/2) vs N(0, 1): KL = {_gauss_half_kl():.17g}", "provenance": "closed_form",
     "justification": "Gaussian Renyi divergence formula"},
    {"name": "quadratic_5d", "module": "renyi",
     "input": {"name": "quadratic_5d", "f": {"kind": "quadratic", "Q": np.diag([0.5, 0.25, 0.2, 0.1, 0.05]).tolist(),
                                              "b": [0.3, 0.0, -0.2, 0.0, 0.1]},
               "pairs": [[1.0, 2.0]], "expect_equality": False},
     "reference": "comparison and chain inequalities (Monte Carlo)", "provenance": "derived",
     "justification": "inequalities only; five dimensions exercises the sampling path"},
    # conic
    {"name": "orthant10", "module": "conic",
     "input": {"name": "orthant10", **PolyhedralCone.orthant(10).to_json(), "reference": "binomial",
               "t_grid": [1.0, 2.0, 3.0]},
     "reference": "v_k = Binomial(10, 1/2) pmf; delta = 5; sigma^2 = 5n/4 = 12.5", "provenance": "closed_form",
     "justification": "orthant faces are coordinate subspaces, each coordinate positive w.p. 1/2"},
    {"name": "orthant6_mgf", "module": "conic",
     "input": {"name": "orthant6_mgf", **PolyhedralCone.orthant(6).to_json(), "reference": "binomial",
               "eta_grid": [-1.0, -0.5, 0.5]},
     "reference": "E e^{eta V} = ((1 + e^eta) / 2)^6", "provenance": "closed_form",
     "justification": "Binomial moment generating function"},
    {"name": "subspace2_in_4", "module": "conic",
     "input": {"name": "subspace2_in_4", **PolyhedralCone.subspace([[1, 0, 0, 0], [0, 1, 1, 0]]).to_json(),
               "reference": "subspace", "eta_grid": [-0.5, 0.5]},
     "reference": "v_2 = 1, delta = 2, var V = 0", "provenance": "trivial",
     "justification": "projection onto a subspace always lies in its single face"},
    {"name": "random_4x6", "module": "conic",
     "input": {"name": "random_4x6", **_random_cone_json(4, 6, 11), "duality": True, "t_grid": [1.0, 2.0]},
     "reference": "v_k(C polar) = v_{4-k}(C); delta(C) + delta(C polar) = 4", "provenance": "derived",
     "justification": "polar duality of intrinsic volumes, checked on independent samples"},
    # wills
    {"name": "point", "module": "wills", "input": {"name": "point", "n": 2, "kind": "point", "r": 0.0},
     "reference": "W = 1, V_1 = 0", "provenance": "trivial", "justification": "K = {0}"},
    {"name": "segment", "module": "wills",
     "input": {"name": "segment", "n": 1, "kind": "box", "r": 1.0, "sides": [1.0]},
     "reference": "W = 2, V_1 = 1", "provenance": "closed_form", "justification": "1-D Steiner formula"},
    {"name": "ball_r1_n2", "module": "wills",
     "input": {"name": "ball_r1_n2", "n": 2, "kind": "ball", "r": 1.0, "radius": 1.0},
     "reference": f"W = 1 + 2 pi = {float(intrinsic_volumes_closed(ConvexBody.ball(1.0, 2)).sum()):.17g}; V_1 = pi",
     "provenance": "closed_form", "justification": "V_j(rB_n) = C(n,j) omega_n r^j / omega_{n-j}"},
    {"name": "box_1x1", "module": "wills",
     "input": {"name": "box_1x1", "n": 2, "kind": "box", "r": math.sqrt(2.0), "sides": [1.0, 1.0]},
     "reference": "V = (1, 2, 1); W = 4", "provenance": "closed_form",
     "justification": "box intrinsic volumes are elementary symmetric polynomials of the sides"},
    {"name": "polygon5", "module": "wills",
     "input": {"name": "polygon5", "n": 2, "kind": "polytope",
               "r": float(np.max(np.linalg.norm(np.array(_random_polygon(5)), axis=1))),
               "vertices": _random_polygon(5)},
     "reference": "f_K agrees with exact face enumeration; McMullen and reversal inequalities",
     "provenance": "derived", "justification": "independent planar polygon oracle"},
    # expsum
    {"name": "simple_pair", "module": "expsum",
     "input": {"name": "simple_pair", "sums": [{"p": [1.0, 2.0], "c": [1.0, -1.0], "interval": [-5.0, 5.0]}]},
     "reference": "one simple zero at 0", "provenance": "trivial", "justification": "e^x (1 - e^x)"},
    {"name": "perfect_square", "module": "expsum",
     "input": {"name": "perfect_square", "sums": [{"p": [0.0, 1.0, 2.0], "c": [1.0, -2.0, 1.0], "interval": [-5.0, 5.0]}]},
     "reference": "one tangential zero at 0", "provenance": "derived", "justification": "(e^x - 1)^2"},
    {"name": "fits", "module": "expsum",
     "input": {"name": "fits", "fits": [{"p": [-1.0, 0.0, 1.0], "x": [-1.0, 1.0]},
                                         {"p": [0.0, 1.0, 2.0], "x": [0.0, 1.0]},
                                         {"p": [-1.0, 0.0, 1.0], "x": [0.3, 0.301]}]},
     "reference": "c0 = c1 = -1/(e + 1/e) for the symmetric case; c0, c1 < 0 always", "provenance": "derived",
     "justification": "direct 2x2 solve"},
    {"name": "random", "module": "expsum",
     "input": {"name": "random", "random": {"sums": 1000, "terms": 4, "fits": 500}},
     "reference": "at most 3 zeros for 4 terms; fitted sums are (-, +, -)", "provenance": "derived",
     "justification": "randomized property check"},
]


def fixtures_for(module: str) -> list[dict]:
    return [f for f in FIXTURES if f["module"] == module]


def list_fixtures() -> list[dict]:
    """Stable, JSON-ready inventory of built-in fixtures and generic families."""
    families = [
        {"name": "orthant(n)", "module": "conic", "reference": "Binomial(n, 1/2)",
         "provenance": "closed_form", "justification": "orthant intrinsic volumes",
         "example": {"n": 4, "v": binomial_profile(4).tolist()}},
        {"name": "subspace(d, n)", "module": "conic", "reference": "v_d = 1, delta = d",
         "provenance": "trivial", "justification": "single face"},
        {"name": "ball(r, n)", "module": "wills", "reference": "V_j = C(n,j) omega_n r^j / omega_{n-j}",
         "provenance": "closed_form", "justification": "Steiner expansion of omega_n (r + t)^n",
         "example": {"r": 1.0, "n": 3, "V": intrinsic_volumes_closed(ConvexBody.ball(1.0, 3)).tolist()}},
        {"name": "box(a_1..a_n)", "module": "wills", "reference": "V_i = e_i(a_1..a_n)",
         "provenance": "closed_form", "justification": "elementary symmetric polynomials"},
    ]
    builtins = [{k: f[k] for k in ("name", "module", "reference", "provenance", "justification")}
                for f in FIXTURES]
    return families + builtins
