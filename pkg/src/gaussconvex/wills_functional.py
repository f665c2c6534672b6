"""Wills functional and first intrinsic volume of convex bodies by Gaussian sampling.

With ``s = sqrt(2 pi)`` and ``f_K(z) = |z|^2 / 2 - d(z, sK)^2 / 2``,

    W(K) = sum_i V_i(K) = E exp(f_K(Z)),      V_1(K) = s E h_K(Z).

``E f_K(Z)``, ``var f_K(Z)`` and ``V_1`` are plain Monte Carlo. ``e^{f_K}``
grows like ``e^{c |z|}``, so the plain estimate of ``W`` is heavy-tailed and
its sample stderr is unreliable. ``W`` is importance-sampled instead from
``N(s c, (1 + 2 pi rho^2 / n) I)``, where ``K`` lies in the ball of radius
``rho`` about ``c``; this roughly matches the spread of
``exp(-d(z, sK)^2 / 2)``. The plain estimate is still reported as ``W_plain``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gauss_core import SeededStream, gaussian_chunks
from .nnls import NumericalFailure, simplex_batch

__all__ = [
    "ConvexBody",
    "WillsReport",
    "f_K",
    "intrinsic_volumes_closed",
    "mcmullen_check",
    "polygon_f_exact",
    "reversal_check",
    "unit_ball_volume",
    "v1_mc",
    "wills_mc",
]

SCALE = math.sqrt(2.0 * math.pi)
MIN_SAMPLES = 1000
EXP_LIMIT = 700.0
MC_SIGMAS = 3.0
ABS_TOL = 1e-12
MIN_ESS_FRACTION = 0.01
KINDS = ("point", "ball", "box", "polytope")


def unit_ball_volume(n: int) -> float:
    """``omega_n = pi^{n/2} / Gamma(n/2 + 1)``."""
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """A convex body with projection and support oracles.

    ``params`` by kind: ``point``: center; ``ball``: radius, center;
    ``box``: sides ``a`` and ``offset`` (the body is ``offset + prod [0, a_i]``);
    ``polytope``: ``vertices`` (``m x n``). ``r`` is the declared radius of a
    centered ball containing the body.
    """

    n: int
    kind: str
    r: float
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown body kind {self.kind!r}")
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise ValueError("bounding radius must be finite and nonnegative")

    # constructors

    @classmethod
    def point(cls, center) -> "ConvexBody":
        c = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(c.size, "point", float(np.linalg.norm(c)), {"center": c}, "point")

    @classmethod
    def ball(cls, radius: float, n: int, center=None, r: Optional[float] = None) -> "ConvexBody":
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        rr = float(np.linalg.norm(c)) + radius if r is None else float(r)
        return cls(n, "ball", rr, {"radius": float(radius), "center": c}, f"ball({radius:g}, n={n})")

    @classmethod
    def box(cls, sides, offset=None, r: Optional[float] = None) -> "ConvexBody":
        a = np.atleast_1d(np.asarray(sides, dtype=float))
        if np.any(a < 0):
            raise ValueError("box sides must be nonnegative")
        o = np.zeros_like(a) if offset is None else np.asarray(offset, dtype=float)
        far = np.maximum(np.abs(o), np.abs(o + a))
        rr = float(np.linalg.norm(far)) if r is None else float(r)
        return cls(a.size, "box", rr, {"sides": a, "offset": o}, f"box({', '.join(f'{x:g}' for x in a)})")

    @classmethod
    def segment(cls, length: float = 1.0) -> "ConvexBody":
        b = cls.box([length])
        return cls(1, "box", b.r, b.params, f"segment[0, {length:g}]")

    @classmethod
    def polytope(cls, vertices, r: Optional[float] = None) -> "ConvexBody":
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        rr = float(np.max(np.linalg.norm(V, axis=1))) if r is None else float(r)
        return cls(V.shape[1], "polytope", rr, {"vertices": V}, f"polytope({V.shape[0]} vertices)")

    @classmethod
    def from_json(cls, obj: dict) -> "ConvexBody":
        """``{"n", "kind", "r", ...}`` with ``radius``/``center``, ``sides``/``offset`` or ``vertices``."""
        kind, n, r = obj["kind"], int(obj["n"]), float(obj["r"])
        if kind == "ball":
            body = cls.ball(float(obj.get("radius", r)), n, obj.get("center"), r)
        elif kind == "box":
            body = cls.box(obj["sides"], obj.get("offset"), r)
        elif kind == "polytope":
            body = cls.polytope(obj["vertices"], r)
        elif kind == "point":
            c = obj.get("center", [0.0] * n)
            body = cls(n, "point", r, {"center": np.asarray(c, dtype=float)}, "point")
        else:
            raise ValueError(f"unknown body kind {kind!r}")
        if body.n != n:
            raise ValueError(f"declared n = {n} but parameters give {body.n}")
        return body

    def to_json(self) -> dict:
        out = {"n": self.n, "kind": self.kind, "r": self.r}
        for k, v in self.params.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out

    def translate(self, c) -> "ConvexBody":
        c = np.asarray(c, dtype=float)
        extra = float(np.linalg.norm(c))
        if self.kind == "ball":
            return ConvexBody.ball(self.params["radius"], self.n, self.params["center"] + c, self.r + extra)
        if self.kind == "box":
            return ConvexBody.box(self.params["sides"], self.params["offset"] + c, self.r + extra)
        if self.kind == "polytope":
            return ConvexBody.polytope(self.params["vertices"] + c, self.r + extra)
        return ConvexBody(self.n, "point", self.r + extra, {"center": self.params["center"] + c}, "point")

    # oracles

    def project(self, X) -> np.ndarray:
        """Nearest point of ``K`` for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        p = self.params
        if self.kind == "point":
            return np.broadcast_to(p["center"], X.shape).copy()
        if self.kind == "ball":
            d = X - p["center"]
            nrm = np.linalg.norm(d, axis=1)
            shrink = np.where(nrm > p["radius"], p["radius"] / np.where(nrm > 0, nrm, 1.0), 1.0)
            return p["center"] + d * shrink[:, None]
        if self.kind == "box":
            return np.clip(X, p["offset"], p["offset"] + p["sides"])
        V = p["vertices"]
        lam, status = simplex_batch(V @ V.T, X @ V.T)
        if np.any(status):
            raise NumericalFailure(f"polytope projection failed on {int(status.sum())} point(s)")
        return lam @ V

    def support(self, Theta) -> np.ndarray:
        """``h_K(theta) = sup_{y in K} <theta, y>`` for each row."""
        T = np.atleast_2d(np.asarray(Theta, dtype=float))
        p = self.params
        if self.kind == "point":
            return T @ p["center"]
        if self.kind == "ball":
            return T @ p["center"] + p["radius"] * np.linalg.norm(T, axis=1)
        if self.kind == "box":
            return T @ p["offset"] + np.maximum(T, 0.0) @ p["sides"]
        return np.max(T @ p["vertices"].T, axis=1)

    def enclosing_ball(self) -> tuple[np.ndarray, float]:
        """A center ``c`` and radius ``rho`` with ``K`` inside ``B(c, rho)``."""
        p = self.params
        if self.kind == "point":
            return np.asarray(p["center"], dtype=float), 0.0
        if self.kind == "ball":
            return np.asarray(p["center"], dtype=float), float(p["radius"])
        if self.kind == "box":
            return p["offset"] + 0.5 * p["sides"], 0.5 * float(np.linalg.norm(p["sides"]))
        V = p["vertices"]
        c = V.mean(axis=0)
        return c, float(np.max(np.linalg.norm(V - c, axis=1)))

    def check_radius(self, stream: SeededStream, probes: int = 1000, tol: float = 1e-9) -> bool:
        """Probe ``|Pi_K(x)| <= r`` and ``<theta, Pi_K(x)> <= h_K(theta)``."""
        rng = stream.generator()
        X = rng.standard_normal((probes, self.n)) * max(1.0, 3.0 * self.r)
        P = self.project(X)
        T = rng.standard_normal((probes, self.n))
        return bool(np.all(np.linalg.norm(P, axis=1) <= self.r + tol)
                    and np.all(np.einsum("ij,ij->i", T, P) <= self.support(T) + tol))


def f_K(body: ConvexBody, z):
    """``|z|^2 / 2 - d(z, sqrt(2 pi) K)^2 / 2``.

    In one dimension ``z`` is evaluated elementwise; otherwise its last axis
    holds coordinates. A single point gives a float.
    """
    Z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(Z)):
        raise ValueError("z must be finite")
    lead = Z.shape if body.n == 1 else Z.shape[:-1]
    Z2 = Z.reshape(-1, body.n)
    U = Z2 / SCALE
    D = U - body.project(U)
    out = 0.5 * np.einsum("ij,ij->i", Z2, Z2) - math.pi * np.einsum("ij,ij->i", D, D)
    return float(out[0]) if lead == () else out.reshape(lead)


def polygon_f_exact(vertices, z) -> float:
    """``sup_{y in sK} <z, y> - |y|^2 / 2`` for a planar polygon by face enumeration.

    The concave objective attains its maximum at ``z`` itself when
    ``z in sK``, otherwise on the boundary, where each edge is a 1-D
    concave problem solved in closed form. Independent of projection.
    """
    V = SCALE * np.asarray(vertices, dtype=float)
    z = np.asarray(z, dtype=float)
    from scipy.spatial import ConvexHull  # hull ordering only

    hull = ConvexHull(V)
    H = V[hull.vertices]
    eq = hull.equations
    if np.all(eq[:, :2] @ z + eq[:, 2] <= 0):
        return float(0.5 * z @ z)
    best = -math.inf
    for i in range(H.shape[0]):
        a, b = H[i], H[(i + 1) % H.shape[0]]
        d = b - a
        t = float(np.clip((z - a) @ d / (d @ d), 0.0, 1.0))
        y = a + t * d
        best = max(best, float(z @ y - 0.5 * y @ y))
    return best


# closed forms -------------------------------------------------------------

def _elementary_symmetric(a: np.ndarray) -> np.ndarray:
    e = np.zeros(a.size + 1)
    e[0] = 1.0
    for x in a:
        e[1:] = e[1:] + x * e[:-1]
    return e


def intrinsic_volumes_closed(body: ConvexBody) -> np.ndarray:
    """``V_0 .. V_n`` for boxes (elementary symmetric) and balls (Steiner)."""
    n = body.n
    if body.kind == "box":
        return _elementary_symmetric(body.params["sides"])
    if body.kind == "ball":
        r = body.params["radius"]
        return np.array([math.comb(n, j) * unit_ball_volume(n) * r**j / unit_ball_volume(n - j)
                         for j in range(n + 1)])
    if body.kind == "point":
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    raise ValueError(f"no closed-form intrinsic volumes for kind {body.kind!r}")


# Monte Carlo ---------------------------------------------------------------

@dataclass(frozen=True)
class WillsReport:
    body: str
    W_estimate: float
    W_stderr: float
    V1_estimate: float
    V1_stderr: float
    mean_f: float
    var_f: float
    mcmullen_slack: float
    mcmullen_stderr: float
    log_W: float
    rhs_main: float
    rhs_cor: float
    rhs_cor_scaled: float
    main_slack_stderr: float
    cor_slack_stderr: float
    r: float
    N: int
    seed: int
    W_closed: Optional[float] = None
    V1_closed: Optional[float] = None
    W_effective_samples: Optional[float] = None
    W_plain: Optional[float] = None
    W_plain_stderr: Optional[float] = None

    @property
    def reversal_slack(self) -> float:
        return self.log_W - self.rhs_main

    @property
    def mcmullen_holds(self) -> bool:
        return self.mcmullen_slack >= -MC_SIGMAS * self.mcmullen_stderr - ABS_TOL

    @property
    def main_holds(self) -> bool:
        return self.reversal_slack >= -MC_SIGMAS * self.main_slack_stderr - ABS_TOL

    @property
    def corollary_holds(self) -> bool:
        """``E f >= V_1 - r^2 / 2`` (so ``rhs_main >= rhs_cor``) within tolerance."""
        return self.rhs_main - self.rhs_cor >= -MC_SIGMAS * self.cor_slack_stderr - ABS_TOL

    @property
    def corollary_scaled_holds(self) -> bool:
        """Same chain with ``pi r^2``, the squared radius of ``sqrt(2 pi) K`` over two."""
        return self.rhs_main - self.rhs_cor_scaled >= -MC_SIGMAS * self.cor_slack_stderr - ABS_TOL

    def closed_form_agreement(self) -> dict:
        out = {}
        if self.W_closed is not None:
            out["W"] = abs(self.W_estimate - self.W_closed) <= max(0.02 * self.W_closed, MC_SIGMAS * self.W_stderr)
        if self.V1_closed is not None:
            out["V1"] = abs(self.V1_estimate - self.V1_closed) <= max(0.02 * abs(self.V1_closed),
                                                                       MC_SIGMAS * self.V1_stderr)
        return out

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(reversal_slack=self.reversal_slack, mcmullen_holds=self.mcmullen_holds,
                 main_holds=self.main_holds, corollary_holds=self.corollary_holds,
                 corollary_scaled_holds=self.corollary_scaled_holds,
                 closed_form_agreement=self.closed_form_agreement())
        return d


def _se(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


def _sample_f_h(body: ConvexBody, N: int, stream: SeededStream) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``f_K(Z)``, ``h_K(Z)`` and ``log(e^{f_K(X)} gamma(X) / q(X))`` at the proposal draws ``X``."""
    N = int(N)
    if N < MIN_SAMPLES:
        raise ValueError(f"need N >= {MIN_SAMPLES}")
    c, rho = body.enclosing_ball()
    shift = SCALE * c
    sigma = math.sqrt(1.0 + 2.0 * math.pi * rho**2 / body.n)
    fs, hs, ls = [], [], []
    for Z in gaussian_chunks(body.n, N, stream):
        fs.append(np.reshape(f_K(body, Z), -1))
        hs.append(body.support(Z))
        X = shift + sigma * Z
        log_ratio = 0.5 * (np.einsum("ij,ij->i", Z, Z) - np.einsum("ij,ij->i", X, X)) + body.n * math.log(sigma)
        ls.append(np.reshape(f_K(body, X), -1) + log_ratio)
    return np.concatenate(fs), np.concatenate(hs), np.concatenate(ls)


def v1_mc(body: ConvexBody, N: int, stream: SeededStream) -> tuple[float, float]:
    """``(V_1, stderr)`` from ``sqrt(2 pi) E h_K(Z)``."""
    h = np.concatenate([body.support(Z) for Z in gaussian_chunks(body.n, int(N), stream)])
    return SCALE * float(h.mean()), SCALE * _se(h)


def wills_mc(body: ConvexBody, N: int, stream: SeededStream) -> WillsReport:
    """Estimate ``W``, ``V_1`` and the moments of ``f_K(Z)`` from one sample.

    Raises ``OverflowError`` when an exponent exceeds 700 somewhere; the
    variance of the ``W`` estimate grows like ``e^{c r^2}``, so use a smaller body.
    """
    f, h, logw = _sample_f_h(body, N, stream)
    top = float(max(np.max(f), np.max(logw)))
    if top > EXP_LIMIT:
        raise OverflowError(f"f_K reached {top:.1f}; e^f overflows. Use a body with smaller r")
    e = np.exp(logw)
    plain = np.exp(f)
    ess = float(e.sum() ** 2 / np.dot(e, e))
    if ess < MIN_ESS_FRACTION * e.size:
        warnings.warn(f"{body.name}: importance sampling for W kept {ess:.0f} effective samples of {e.size}; "
                      "the W estimate and its stderr are unreliable", RuntimeWarning, stacklevel=2)
    W, W_se = float(e.mean()), _se(e)
    sh = SCALE * h
    V1, V1_se = float(sh.mean()), _se(sh)
    mean_f, var_f = float(f.mean()), float(f.var(ddof=1))
    mc_slack = math.exp(V1) - W
    mc_se = math.hypot(math.exp(V1) * V1_se, W_se)
    rhs_main = 0.5 * var_f + mean_f
    rhs_cor = 0.5 * var_f + V1 - 0.5 * body.r**2
    rhs_scaled = 0.5 * var_f + V1 - math.pi * body.r**2
    # paired influence functions: log W - rhs_main and E f - s E h
    infl_main = e / W - (0.5 * (f - mean_f) ** 2 + f)
    W_closed = V1_closed = None
    if body.kind in ("box", "ball", "point"):
        vols = intrinsic_volumes_closed(body)
        W_closed = float(vols.sum())
        V1_closed = float(vols[1]) if vols.size > 1 else 0.0
    return WillsReport(body.name, W, W_se, V1, V1_se, mean_f, var_f, mc_slack, mc_se,
                       math.log(W), rhs_main, rhs_cor, rhs_scaled, _se(infl_main), _se(f - sh),
                       body.r, f.size, stream.seed, W_closed, V1_closed, ess,
                       float(plain.mean()), _se(plain))


def mcmullen_check(body: ConvexBody, N: int, stream: SeededStream) -> dict:
    """``e^{V_1} - W >= -3 stderr``."""
    rep = wills_mc(body, N, stream)
    return {"slack": rep.mcmullen_slack, "stderr": rep.mcmullen_stderr, "holds": rep.mcmullen_holds}


def reversal_check(body: ConvexBody, N: int, stream: SeededStream) -> dict:
    """``log W >= var f / 2 + E f >= var f / 2 + V_1 - r^2 / 2``, each within 3 stderr.

    ``rhs_cor_scaled`` replaces ``r^2 / 2`` by ``pi r^2``, the bound that
    follows from ``|y| <= sqrt(2 pi) r`` on the scaled body.
    """
    rep = wills_mc(body, N, stream)
    return {"lhs": rep.log_W, "rhs_main": rep.rhs_main, "rhs_cor": rep.rhs_cor,
            "rhs_cor_scaled": rep.rhs_cor_scaled, "main_holds": rep.main_holds,
            "corollary_holds": rep.corollary_holds,
            "corollary_scaled_holds": rep.corollary_scaled_holds}
