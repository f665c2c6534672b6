"""Function oracles: convex/concave evaluators with optional closed forms.

An oracle wraps a vectorized evaluator. One-dimensional oracles act
elementwise on arrays of any shape; ``n``-dimensional oracles take arrays
whose last axis has length ``n``.

Closed-form side information (``log_mgf``, ``cdf``, ``sf``, ``moments``)
always refers to the law of ``f(Z)`` with ``Z`` standard Gaussian in the
oracle's dimension. It is optional; consumers fall back to quadrature or
root finding when it is absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gauss_core import SeededStream, std_normal_cdf

SHAPES = ("convex", "concave", "affine", "unknown")


@dataclass(frozen=True)
class ConvexFunctionOracle:
    evaluator: Callable[[np.ndarray], np.ndarray]
    shape: str = "unknown"
    dim: int = 1
    name: str = "custom"
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    log_mgf: Optional[Callable[[float], float]] = None
    cdf: Optional[Callable[[float], float]] = None
    sf: Optional[Callable[[float], float]] = None
    moments: Optional[tuple[float, float]] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if int(self.dim) < 1:
            raise ValueError("dim must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim > 1 and x.shape[-1] != self.dim:
            raise ValueError(f"expected last axis of length {self.dim}, got shape {x.shape}")
        return self.evaluator(x)

    @property
    def is_convex(self) -> bool:
        return self.shape in ("convex", "affine")

    @property
    def is_concave(self) -> bool:
        return self.shape in ("concave", "affine")

    def negated(self) -> "ConvexFunctionOracle":
        flip = {"convex": "concave", "concave": "convex"}.get(self.shape, self.shape)
        f = self.evaluator
        return ConvexFunctionOracle(lambda x: -f(x), flip, self.dim, f"-{self.name}")


def midpoint_violations(oracle: ConvexFunctionOracle, stream: SeededStream,
                        probes: int = 1000, scale: float = 3.0,
                        tol: float = 1e-9) -> int:
    """Count randomized midpoint-inequality violations for the declared shape.

    Affine oracles are checked in both directions. Oracles declared
    ``unknown`` report zero.
    """
    if oracle.shape == "unknown":
        return 0
    rng = stream.generator()
    shape = (probes,) if oracle.dim == 1 else (probes, oracle.dim)
    x = scale * rng.standard_normal(shape)
    y = scale * rng.standard_normal(shape)
    fx, fy, fm = oracle(x), oracle(y), oracle(0.5 * (x + y))
    chord = 0.5 * (fx + fy)
    bad = np.zeros(probes, dtype=bool)
    if oracle.is_convex:
        bad |= fm > chord + tol * (1.0 + np.abs(chord))
    if oracle.is_concave:
        bad |= fm < chord - tol * (1.0 + np.abs(chord))
    return int(bad.sum())


def affine_deviation(oracle: ConvexFunctionOracle, stream: SeededStream,
                     probes: int = 256, scale: float = 2.0) -> float:
    """Max residual of a least-squares affine fit to ``f`` on random probes."""
    rng = stream.generator()
    x = scale * rng.standard_normal((probes, oracle.dim))
    fx = oracle(x[:, 0] if oracle.dim == 1 else x)
    design = np.hstack([x, np.ones((probes, 1))])
    coef, *_ = np.linalg.lstsq(design, fx, rcond=None)
    return float(np.max(np.abs(design @ coef - fx)))


# ---------------------------------------------------------------------------
# one-dimensional built-ins (laws of f(Z), Z ~ N(0, 1))

def affine(slope: float, intercept: float = 0.0) -> ConvexFunctionOracle:
    a, b = float(slope), float(intercept)
    if a == 0.0:
        raise ValueError("slope must be nonzero")

    def cdf(t):
        u = (t - b) / a
        return std_normal_cdf(u) if a > 0 else 1.0 - std_normal_cdf(u)

    def sf(t):
        u = (t - b) / a
        return std_normal_cdf(-u) if a > 0 else std_normal_cdf(u)

    return ConvexFunctionOracle(
        lambda z: a * z + b, "affine", 1, f"affine({a:g},{b:g})",
        gradient=lambda z: np.full_like(np.asarray(z, dtype=float), a),
        log_mgf=lambda p: p * b + 0.5 * p * p * a * a,
        cdf=cdf, sf=sf, moments=(b, a * a),
        params={"slope": a, "intercept": b},
    )


def square() -> ConvexFunctionOracle:
    """``z -> z**2``; the pushforward is chi-squared with one degree of freedom."""

    def log_mgf(p):
        return -0.5 * math.log1p(-2.0 * p) if p < 0.5 else math.inf

    def cdf(t):
        return 0.0 if t <= 0 else 1.0 - 2.0 * std_normal_cdf(-math.sqrt(t))

    def sf(t):
        return 1.0 if t <= 0 else 2.0 * std_normal_cdf(-math.sqrt(t))

    return ConvexFunctionOracle(
        lambda z: z * z, "convex", 1, "square",
        gradient=lambda z: 2.0 * np.asarray(z, dtype=float),
        log_mgf=log_mgf, cdf=cdf, sf=sf, moments=(1.0, 2.0),
    )


def absolute() -> ConvexFunctionOracle:
    def log_mgf(p):
        # E exp(p|Z|) = 2 exp(p^2/2) Phi(p)
        return 0.5 * p * p + math.log(2.0 * std_normal_cdf(p))

    def cdf(t):
        return 0.0 if t <= 0 else 1.0 - 2.0 * std_normal_cdf(-t)

    def sf(t):
        return 1.0 if t <= 0 else 2.0 * std_normal_cdf(-t)

    return ConvexFunctionOracle(
        np.abs, "convex", 1, "abs",
        gradient=np.sign, log_mgf=log_mgf, cdf=cdf, sf=sf,
        moments=(math.sqrt(2.0 / math.pi), 1.0 - 2.0 / math.pi),
    )


def exponential_map() -> ConvexFunctionOracle:
    """``z -> e^z``; the pushforward is standard lognormal."""

    def cdf(t):
        return 0.0 if t <= 0 else std_normal_cdf(math.log(t))

    def sf(t):
        return 1.0 if t <= 0 else std_normal_cdf(-math.log(t))

    def log_mgf(p):
        if p > 0:
            return math.inf
        if p == 0:
            return 0.0
        return None  # no closed form; caller falls back to quadrature

    return ConvexFunctionOracle(
        np.exp, "convex", 1, "exp", gradient=np.exp, log_mgf=log_mgf,
        cdf=cdf, sf=sf, moments=(math.exp(0.5), math.exp(2.0) - math.exp(1.0)),
    )


def softplus() -> ConvexFunctionOracle:
    def cdf(t):
        return 0.0 if t <= 0 else std_normal_cdf(math.log(math.expm1(t)))

    def sf(t):
        return 1.0 if t <= 0 else std_normal_cdf(-math.log(math.expm1(t)))

    return ConvexFunctionOracle(
        lambda z: np.logaddexp(0.0, z), "convex", 1, "softplus",
        gradient=lambda z: 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=float))),
        cdf=cdf, sf=sf,
    )


# ---------------------------------------------------------------------------
# n-dimensional built-ins

def coordinate_sum(n: int) -> ConvexFunctionOracle:
    return ConvexFunctionOracle(lambda x: np.sum(x, axis=-1), "affine", n, f"sum{n}",
                                params={"coordinate_increasing": True})


def coordinate_max(n: int) -> ConvexFunctionOracle:
    return ConvexFunctionOracle(lambda x: np.max(x, axis=-1), "convex", n, f"max{n}",
                                params={"coordinate_increasing": True})


def sum_of_squares(n: int) -> ConvexFunctionOracle:
    return ConvexFunctionOracle(lambda x: np.sum(x * x, axis=-1), "convex", n, f"sumsq{n}",
                                params={"coordinate_increasing": True})


def linear_form(a, b: float = 0.0) -> ConvexFunctionOracle:
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    if n == 1:
        return ConvexFunctionOracle(lambda x: a[0] * x + b, "affine", 1, "linear",
                                    params={"a": a.tolist(), "b": float(b)})
    return ConvexFunctionOracle(lambda x: x @ a + b, "affine", n, "linear",
                                params={"a": a.tolist(), "b": float(b)})


def concave_quadratic(Q, b=None, c: float = 0.0) -> ConvexFunctionOracle:
    """``x -> -x^T Q x / 2 + <b, x> + c`` with ``Q`` positive semidefinite."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[0]
    if Q.shape != (n, n) or not np.allclose(Q, Q.T):
        raise ValueError("Q must be a symmetric square matrix")
    if np.min(np.linalg.eigvalsh(Q)) < -1e-12:
        raise ValueError("Q must be positive semidefinite for a concave quadratic")
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float).ravel()
    shape = "affine" if np.allclose(Q, 0.0) else "concave"
    if n == 1:
        q, bb = Q[0, 0], b[0]
        ev = lambda x: -0.5 * q * x * x + bb * x + c  # noqa: E731
    else:
        ev = lambda x: -0.5 * np.einsum("...i,ij,...j->...", x, Q, x) + x @ b + c  # noqa: E731
    return ConvexFunctionOracle(ev, shape, n, "concave_quadratic",
                                params={"Q": Q.tolist(), "b": b.tolist(), "c": float(c)})


BUILTIN_CONVEX_1D = {
    "affine": lambda: affine(2.0, 1.0),
    "square": square,
    "abs": absolute,
    "exp": exponential_map,
    "softplus": softplus,
}
