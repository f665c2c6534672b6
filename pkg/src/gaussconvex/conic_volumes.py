"""Conic intrinsic volumes of polyhedral cones by Gaussian projection.

A cone is held in generator form ``{V lam : lam >= 0}``, halfspace form
``{x : A x <= 0}``, or both. Projection onto the generator form is an
active-set nonnegative least squares problem; a halfspace-only cone is
projected through its polar, ``Pi_C(x) = x - Pi_{cone(A^T)}(x)``.

The face of ``C`` whose relative interior contains ``Pi_C(z)`` has
dimension equal to the rank of the generators carrying positive weight
(plus the lineality space), or ``n - rank(A_active)`` in halfspace form.
Its law over ``z ~ N(0, I_n)`` is the intrinsic volume sequence ``v_k``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._util import to_csv
from .gauss_core import SeededStream, gaussian_chunks
from .nnls import NumericalFailure, nnls_batch

__all__ = [
    "ConicProfile",
    "MGFRow",
    "PolyhedralCone",
    "TailBoundRow",
    "UnsupportedOperation",
    "VarianceIdentity",
    "binomial_profile",
    "convexity_probe",
    "dual_cone",
    "estimate_profile",
    "face_dimension",
    "mgf_identity_check",
    "moreau_probe",
    "project_cone",
    "project_many",
    "project_polar_by_enumeration",
    "tail_bound_check",
    "variance_identity_check",
]

TAU_ACT = 1e-8
TAU_RANK = 1e-8
MEMBERSHIP_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
MIN_SAMPLES = 1000
FLAG_WARN_FRACTION = 0.01
MC_SIGMAS = 3.0
MAX_ENUM_CONSTRAINTS = 14


class UnsupportedOperation(ValueError):
    """The requested operation needs a representation the cone lacks."""


def _as_matrix(a, cols: Optional[int] = None) -> Optional[np.ndarray]:
    if a is None:
        return None
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.size == 0:
        return None
    if cols is not None and m.shape[1] != cols:
        raise ValueError(f"expected {cols} columns, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    """A polyhedral cone in ``R^n``.

    ``generators`` is ``n x m`` (columns generate the cone); ``halfspaces``
    is ``k x n`` (rows ``a_i`` with ``a_i . x <= 0``).
    """

    n: int
    generators: Optional[np.ndarray] = None
    halfspaces: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "n", n)
        V = _as_matrix(self.generators)
        if V is not None:
            if V.shape[0] != n:
                raise ValueError(f"generators must have {n} rows, got {V.shape}")
        A = _as_matrix(self.halfspaces, n)
        if V is None and A is None:
            raise ValueError("a cone needs generators or halfspaces")
        if V is not None:
            norms = np.linalg.norm(V, axis=0)
            if np.any(norms == 0) or not np.all(np.isfinite(V)):
                raise ValueError("generators must be finite and nonzero")
        if A is not None:
            if not np.all(np.isfinite(A)) or np.any(np.linalg.norm(A, axis=1) == 0):
                raise ValueError("halfspace normals must be finite and nonzero")
        if V is not None and A is not None:
            worst = float(np.max(A @ (V / np.linalg.norm(V, axis=0))))
            if worst > MEMBERSHIP_TOL:
                raise ValueError(f"a generator violates the halfspaces by {worst:.3g}")
        object.__setattr__(self, "generators", V)
        object.__setattr__(self, "halfspaces", A)

    # constructors ---------------------------------------------------------

    @classmethod
    def orthant(cls, n: int) -> "PolyhedralCone":
        return cls(n, np.eye(n), -np.eye(n), f"orthant({n})")

    @classmethod
    def subspace(cls, basis) -> "PolyhedralCone":
        """Linear span of the rows of ``basis`` (``d x n``) as the cone of ``+-`` rows."""
        B = np.atleast_2d(np.asarray(basis, dtype=float))
        return cls(B.shape[1], np.hstack([B.T, -B.T]), name=f"subspace(d={B.shape[0]}, n={B.shape[1]})")

    @classmethod
    def full_space(cls, n: int) -> "PolyhedralCone":
        c = cls.subspace(np.eye(n))
        return cls(n, c.generators, name=f"full_space({n})")

    @classmethod
    def random(cls, n: int, m: int, stream: SeededStream, tilt: float = 1.5) -> "PolyhedralCone":
        """``m`` unit generators ``normalize(g + tilt e_n)``, ``g`` standard Gaussian.

        The tilt keeps the cone pointed with high probability.
        """
        g = stream.generator().standard_normal((n, m))
        g[-1] += tilt
        return cls(n, g / np.linalg.norm(g, axis=0), name=f"random(n={n}, m={m}, seed={stream.seed})")

    @classmethod
    def product(cls, first: "PolyhedralCone", second: "PolyhedralCone") -> "PolyhedralCone":
        n = first.n + second.n

        def block(a, b, rows_a, rows_b):
            out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
            out[: a.shape[0], : a.shape[1]] = a
            out[a.shape[0]:, a.shape[1]:] = b
            return out

        V = A = None
        if first.generators is not None and second.generators is not None:
            V = block(first.generators, second.generators, None, None)
        if first.halfspaces is not None and second.halfspaces is not None:
            A = block(first.halfspaces, second.halfspaces, None, None)
        if V is None and A is None:
            raise UnsupportedOperation("factors share no common representation")
        return cls(n, V, A, f"{first.name or 'C1'} x {second.name or 'C2'}")

    @classmethod
    def from_json(cls, obj: dict) -> "PolyhedralCone":
        """``{"n": int, "generators": [[...], ...], "halfspaces": [[...], ...]}``.

        Each entry of ``generators`` is one generator vector of length ``n``;
        each entry of ``halfspaces`` is one row ``a_i``.
        """
        n = int(obj["n"])
        gens = obj.get("generators")
        V = None if not gens else np.asarray(gens, dtype=float).T
        A = obj.get("halfspaces") or None
        return cls(n, V, A, obj.get("name", ""))

    def to_json(self) -> dict:
        out = {"n": self.n}
        if self.name:
            out["name"] = self.name
        if self.generators is not None:
            out["generators"] = self.generators.T.tolist()
        if self.halfspaces is not None:
            out["halfspaces"] = self.halfspaces.tolist()
        return out

    # derived data ---------------------------------------------------------

    @property
    def unit_generators(self) -> Optional[np.ndarray]:
        if self.generators is None:
            return None
        return self.generators / np.linalg.norm(self.generators, axis=0)

    @property
    def lineality_generators(self) -> np.ndarray:
        """Generators that appear together with their negatives (``n x l``)."""
        U = self.unit_generators
        if U is None:
            return np.zeros((self.n, 0))
        G = U.T @ U
        paired = np.any(G + 1.0 <= MEMBERSHIP_TOL, axis=1)
        return U[:, paired]

    @property
    def lineality_dim(self) -> int:
        L = self.lineality_generators
        if L.shape[1] == 0:
            return 0
        s = np.linalg.svd(L, compute_uv=False)
        return int(np.sum(s > TAU_RANK * s[0]))

    def contains(self, x, tol: float = FEASIBILITY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if self.halfspaces is not None:
            A = self.halfspaces / np.linalg.norm(self.halfspaces, axis=1, keepdims=True)
            return bool(np.all(A @ x <= tol * max(1.0, np.linalg.norm(x))))
        p, _ = project_cone(self, x)
        return bool(np.linalg.norm(p - x) <= tol * max(1.0, np.linalg.norm(x)))


def dual_cone(C: PolyhedralCone) -> PolyhedralCone:
    """``C° = {x : <x, y> <= 0 for all y in C}`` in halfspace form ``A = V^T``.

    When ``C`` also has halfspaces ``A``, the polar's generators ``A^T``
    are attached as well.
    """
    if C.generators is None:
        raise UnsupportedOperation("the polar of a halfspace-only cone needs generator enumeration")
    gens = None if C.halfspaces is None else C.halfspaces.T
    return PolyhedralCone(C.n, gens, C.generators.T, f"polar({C.name})" if C.name else "polar")


# projection ---------------------------------------------------------------

@dataclass(frozen=True)
class _Projection:
    """Batch projection of unit-normalized rows; ``scale`` restores the input norms."""

    points: np.ndarray        # Pi_C(x), original scale
    coefficients: np.ndarray  # lam for unit x (generator form) or polar multipliers
    form: str                 # "generators" | "halfspaces"
    scale: np.ndarray


def _nnls_unit(U: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """NNLS coefficients of each row of ``X`` (rows assumed unit or zero) on columns of ``U``."""
    G = U.T @ U
    H = X @ U
    off = G - np.diag(np.diag(G))
    if np.max(np.abs(off)) <= 1e-15:
        return np.maximum(H, 0.0) / np.diag(G), np.zeros(X.shape[0], dtype=np.int64)
    return nnls_batch(G, H)


def _raise_failure(U: np.ndarray, status: np.ndarray):
    bad = int(np.sum(status))
    cond = float(np.linalg.cond(U.T @ U))
    raise NumericalFailure(f"NNLS hit the iteration cap on {bad} point(s); "
                           f"cond(V^T V) = {cond:.3g}, m = {U.shape[1]}")


def project_many(C: PolyhedralCone, X) -> _Projection:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != C.n:
        raise ValueError(f"points must have {C.n} coordinates")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    scale = np.linalg.norm(X, axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    Xu = X / safe[:, None]
    if C.generators is not None:
        U = C.unit_generators
        lam, status = _nnls_unit(U, Xu)
        if np.any(status):
            _raise_failure(U, status)
        P = (lam @ U.T) * safe[:, None]
        return _Projection(P, lam, "generators", scale)
    A = C.halfspaces / np.linalg.norm(C.halfspaces, axis=1, keepdims=True)
    mu, status = _nnls_unit(A.T, Xu)
    if np.any(status):
        _raise_failure(A.T, status)
    P = (Xu - mu @ A) * safe[:, None]
    return _Projection(P, mu, "halfspaces", scale)


def project_cone(C: PolyhedralCone, x) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean projection of one point; returns ``(Pi_C(x), coefficients)``.

    Coefficients weight the unit-normalized generators (scaled back to
    ``x``); for a halfspace-only cone they are the multipliers on the
    unit halfspace normals.
    """
    x = np.asarray(x, dtype=float)
    pr = project_many(C, x[None, :])
    return pr.points[0], pr.coefficients[0] * (pr.scale[0] if pr.scale[0] > 0 else 0.0)


# face dimension -------------------------------------------------------------

def _pattern_ranks(masks: np.ndarray, columns: np.ndarray, extra: np.ndarray,
                   complement: bool, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank per boolean support pattern, computed once per distinct pattern.

    Returns ``(dims, ambiguous)`` per row. ``complement`` gives ``n - rank``.
    """
    packed = np.packbits(masks, axis=1)
    uniq, inverse = np.unique(packed, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    dims = np.empty(uniq.shape[0], dtype=np.int64)
    amb = np.zeros(uniq.shape[0], dtype=bool)
    m = masks.shape[1]
    for u in range(uniq.shape[0]):
        sel = np.unpackbits(uniq[u], count=m).astype(bool)
        M = np.hstack([columns[:, sel], extra]) if extra.size else columns[:, sel]
        if M.shape[1] == 0:
            r = 0
        else:
            s = np.linalg.svd(M, compute_uv=False)
            cut = TAU_RANK * s[0]
            r = int(np.sum(s > cut))
            amb[u] = bool(np.any((s >= cut / 10) & (s <= cut * 10)))
        dims[u] = n - r if complement else r
    return dims[inverse], amb[inverse]


def _classify(C: PolyhedralCone, pr: _Projection) -> tuple[np.ndarray, np.ndarray]:
    """Face dimensions and ambiguity flags for a batch projection."""
    coef = pr.coefficients
    band = np.any((coef >= TAU_ACT / 10) & (coef <= TAU_ACT * 10), axis=1)
    if pr.form == "generators":
        masks = coef > TAU_ACT
        dims, amb = _pattern_ranks(masks, C.unit_generators, C.lineality_generators, False, C.n)
    else:
        A = C.halfspaces / np.linalg.norm(C.halfspaces, axis=1, keepdims=True)
        safe = np.where(pr.scale > 0, pr.scale, 1.0)
        slack = (pr.points / safe[:, None]) @ A.T
        masks = slack >= -TAU_ACT
        band |= np.any((slack <= -TAU_ACT / 10) & (slack >= -TAU_ACT * 10), axis=1)
        dims, amb = _pattern_ranks(masks, A.T, np.zeros((C.n, 0)), True, C.n)
    return dims, amb | band


def face_dimension(C: PolyhedralCone, x) -> int:
    """Dimension of the face whose relative interior contains ``Pi_C(x)``.

    Warns when the rank decision falls in the ambiguity band.
    """
    pr = project_many(C, np.asarray(x, dtype=float)[None, :])
    dims, amb = _classify(C, pr)
    if amb[0]:
        warnings.warn("face dimension is within the rank ambiguity band", RuntimeWarning, stacklevel=2)
    return int(dims[0])


# Monte Carlo profile ---------------------------------------------------------

def binomial_profile(n: int) -> np.ndarray:
    """Intrinsic volumes of the nonnegative orthant in ``R^n``: Binomial(n, 1/2)."""
    return np.array([math.comb(n, k) for k in range(n + 1)], dtype=float) / 2.0**n


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True, eq=False)
class ConicProfile:
    n: int
    v: np.ndarray
    v_stderr: np.ndarray
    delta: float
    delta_stderr: float
    delta_proj: float
    delta_proj_stderr: float
    delta_gap_stderr: float
    var_V: float
    var_V_stderr: float
    var_proj: float
    N: int
    seed: int
    flagged: int
    cone_name: str = ""
    dims: np.ndarray = field(default=None, repr=False)        # -1 for flagged samples
    sq_norms: np.ndarray = field(default=None, repr=False)    # |Pi_C(Z)|^2
    z_sq_norms: np.ndarray = field(default=None, repr=False)  # |Z|^2

    @property
    def flagged_fraction(self) -> float:
        return self.flagged / self.N

    @property
    def sums_to_one(self) -> bool:
        return abs(float(self.v.sum()) - 1.0) <= MC_SIGMAS * math.sqrt(float(np.sum(self.v_stderr**2))) + 1e-12

    @property
    def deltas_agree(self) -> bool:
        return abs(self.delta - self.delta_proj) <= MC_SIGMAS * self.delta_gap_stderr + 1e-12

    @property
    def sigma2_lower(self) -> float:
        return self.var_V + 2.0 * self.delta

    @property
    def sigma2_upper(self) -> float:
        return self.var_V + 2.0 * (self.n - self.delta)

    @property
    def sigma2_two_sided(self) -> float:
        return self.var_V + 2.0 * max(self.delta, self.n - self.delta)

    def log_concavity_observation(self) -> dict:
        """Observed ``v_k^2 >= v_{k-1} v_{k+1}`` on the support; reported, never asserted."""
        v = self.v
        idx = [k for k in range(1, self.n) if v[k - 1] > 0 and v[k + 1] > 0]
        margins = [float(v[k] ** 2 - v[k - 1] * v[k + 1]) for k in idx]
        return {"checked": len(idx), "min_margin": min(margins) if margins else None,
                "observed_log_concave": all(m >= 0 for m in margins)}

    def to_csv(self, header_lines=()) -> str:
        rows = [(k, self.v[k], self.v_stderr[k]) for k in range(self.n + 1)]
        return to_csv(("k", "v_k", "stderr"), rows, header_lines)

    def summary(self) -> dict:
        return {
            "cone": self.cone_name, "n": self.n, "N": self.N, "seed": self.seed,
            "delta": self.delta, "delta_stderr": self.delta_stderr,
            "delta_proj": self.delta_proj, "delta_proj_stderr": self.delta_proj_stderr,
            "deltas_agree": self.deltas_agree,
            "var_V": self.var_V, "var_V_stderr": self.var_V_stderr,
            "sigma2_lower": self.sigma2_lower, "sigma2_upper": self.sigma2_upper,
            "sigma2_two_sided": self.sigma2_two_sided,
            "flagged": self.flagged, "flagged_fraction": self.flagged_fraction,
            "sums_to_one": self.sums_to_one,
            "log_concavity": self.log_concavity_observation(),
        }


def estimate_profile(C: PolyhedralCone, N: int, stream: SeededStream) -> ConicProfile:
    """Histogram of face dimensions of ``Pi_C(Z)`` over ``N`` Gaussian samples.

    Samples whose rank decision is ambiguous are excluded from ``v`` and
    from the face-count mean, but counted in ``flagged``.
    """
    N = int(N)
    if N < MIN_SAMPLES:
        raise ValueError(f"need N >= {MIN_SAMPLES}")
    dims, sq, zsq = [], [], []
    for Z in gaussian_chunks(C.n, N, stream):
        pr = project_many(C, Z)
        d, amb = _classify(C, pr)
        dims.append(np.where(amb, -1, d))
        sq.append(np.einsum("ij,ij->i", pr.points, pr.points))
        zsq.append(np.einsum("ij,ij->i", Z, Z))
    dims, sq, zsq = np.concatenate(dims), np.concatenate(sq), np.concatenate(zsq)
    ok = dims >= 0
    flagged = int(N - ok.sum())
    if flagged > FLAG_WARN_FRACTION * N:
        warnings.warn(f"{flagged} of {N} samples have ambiguous face dimension", RuntimeWarning, stacklevel=2)
    k = dims[ok].astype(float)
    counts = np.bincount(dims[ok], minlength=C.n + 1).astype(float)
    v = counts / k.size
    v_se = np.sqrt(v * (1.0 - v) / k.size)
    delta, delta_se = _mean_se(k)
    dproj, dproj_se = _mean_se(sq)
    gap_se = float(np.std(k - sq[ok], ddof=1) / math.sqrt(k.size))
    var_V = float(k.var(ddof=1))
    var_se = float(np.std((k - delta) ** 2, ddof=1) / math.sqrt(k.size))
    return ConicProfile(C.n, v, v_se, delta, delta_se, dproj, dproj_se, gap_se, var_V, var_se,
                        float(sq.var(ddof=1)), N, stream.seed, flagged, C.name, dims, sq, zsq)


@dataclass(frozen=True)
class VarianceIdentity:
    var_V: float
    rhs: float
    stderr: float

    @property
    def agree(self) -> bool:
        return abs(self.var_V - self.rhs) <= MC_SIGMAS * self.stderr + 1e-12

    def to_dict(self) -> dict:
        return {"var_V": self.var_V, "var_proj_minus_2delta": self.rhs,
                "stderr": self.stderr, "agree": self.agree}


def variance_identity_check(C: PolyhedralCone, N: int, stream: SeededStream,
                            profile: Optional[ConicProfile] = None) -> VarianceIdentity:
    """``var(V_C)`` against ``var(|Pi_C(Z)|^2) - 2 delta`` on a shared sample."""
    prof = profile or estimate_profile(C, N, stream)
    ok = prof.dims >= 0
    k = prof.dims[ok].astype(float)
    s = prof.sq_norms[ok]
    rhs = float(s.var(ddof=1) - 2.0 * s.mean())
    infl = (k - k.mean()) ** 2 - (s - s.mean()) ** 2 + 2.0 * s
    se = float(infl.std(ddof=1) / math.sqrt(k.size))
    return VarianceIdentity(float(k.var(ddof=1)), rhs, se)


@dataclass(frozen=True)
class MGFRow:
    eta: float
    xi: float
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    rel_err: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.rel_err <= self.tol

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("eta", "xi", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "rel_err", "tol")} | {"holds": self.holds}


def mgf_identity_check(C: PolyhedralCone, eta_grid: Sequence[float], N: int, stream: SeededStream,
                       reference: Optional[np.ndarray] = None,
                       profile: Optional[ConicProfile] = None) -> list[MGFRow]:
    """Compare ``E e^{eta V_C}`` with ``E e^{xi |Pi_C(Z)|^2}``, ``xi = (1 - e^{-2 eta}) / 2``.

    The left side is exact when a ``reference`` profile is given and
    sampled otherwise. For ``xi > 0`` the right side is estimated by
    importance sampling: with ``s^2 = 1 / (1 - 2 xi)``,
    ``E e^{xi |Pi_C(Z)|^2} = s^n E exp(-xi s^2 |Pi_{C°}(Z)|^2)``,
    which is bounded (plain sampling has infinite variance once
    ``xi >= 1/4``). ``|Pi_{C°}(Z)|^2 = |Z|^2 - |Pi_C(Z)|^2`` by Moreau.
    """
    prof = profile or estimate_profile(C, N, stream)
    ok = prof.dims >= 0
    k = prof.dims[ok].astype(float)
    s_all = prof.sq_norms
    polar_sq = np.maximum(prof.z_sq_norms - s_all, 0.0)
    rows = []
    for eta in eta_grid:
        eta = float(eta)
        xi = 0.5 * (-math.expm1(-2.0 * eta))
        if reference is not None:
            ref = np.asarray(reference, dtype=float)
            lhs, lhs_se = float(np.dot(ref, np.exp(eta * np.arange(ref.size)))), 0.0
        else:
            lhs, lhs_se = _mean_se(np.exp(eta * k))
        if xi <= 0:
            rhs, rhs_se = _mean_se(np.exp(xi * s_all))
        else:
            s2 = 1.0 / (1.0 - 2.0 * xi)
            m, se = _mean_se(np.exp(-xi * s2 * polar_sq))
            f = s2 ** (C.n / 2.0)
            rhs, rhs_se = f * m, f * se
        rel = abs(rhs - lhs) / abs(lhs)
        comb = math.hypot(lhs_se, rhs_se) / abs(lhs)
        rows.append(MGFRow(eta, xi, lhs, lhs_se, rhs, rhs_se, rel, max(0.01, MC_SIGMAS * comb)))
    return rows


@dataclass(frozen=True)
class TailBoundRow:
    t: float
    side: str
    empirical: float
    sigma2: float
    bound: float
    stderr: float

    @property
    def holds(self) -> bool:
        return self.empirical <= self.bound + MC_SIGMAS * self.stderr

    def to_dict(self) -> dict:
        return {"t": self.t, "side": self.side, "empirical": self.empirical, "sigma2": self.sigma2,
                "bound": self.bound, "stderr": self.stderr, "holds": self.holds}


def tail_bound_check(C: PolyhedralCone, t_grid: Sequence[float], N: int, stream: SeededStream,
                     profile: Optional[ConicProfile] = None) -> list[TailBoundRow]:
    """Empirical tails of ``V_C - delta`` against the three sub-Gaussian bounds.

    lower: ``P(V - delta <= -t) <= exp(-t^2 / 2(var V + 2 delta))``;
    upper: ``P(V - delta >= t) <= exp(-t^2 / 2(var V + 2(n - delta)))``;
    two-sided: ``P(|V - delta| >= t) <= 2 exp(-t^2 / 2 sigma^2)`` with the larger proxy.
    """
    prof = profile or estimate_profile(C, N, stream)
    k = prof.dims[prof.dims >= 0].astype(float)
    dev = k - prof.delta
    rows = []
    for t in t_grid:
        t = float(t)
        for side, hits, s2, mult in (
            ("lower", dev <= -t, prof.sigma2_lower, 1.0),
            ("upper", dev >= t, prof.sigma2_upper, 1.0),
            ("two_sided", np.abs(dev) >= t, prof.sigma2_two_sided, 2.0),
        ):
            p = float(hits.mean())
            bound = mult * math.exp(-t * t / (2.0 * s2)) if s2 > 0 else (mult if t == 0 else 0.0)
            rows.append(TailBoundRow(t, side, p, s2, bound, math.sqrt(p * (1.0 - p) / k.size)))
    return rows


# independent probes -------------------------------------------------------------

def project_polar_by_enumeration(C: PolyhedralCone, x) -> np.ndarray:
    """Projection onto ``C° = {y : V^T y <= 0}`` by enumerating active sets.

    Independent of the NNLS solver: each subset ``I`` of the unit generators
    gives ``y = x - V_I mu`` with ``V_I^T y = 0``; the answer is the closest
    candidate with ``mu >= 0`` that is feasible. Limited to
    ``m <= 14`` generators.
    """
    if C.generators is None:
        raise UnsupportedOperation("needs generator form")
    U = C.unit_generators
    m = U.shape[1]
    if m > MAX_ENUM_CONSTRAINTS:
        raise UnsupportedOperation(f"enumeration limited to {MAX_ENUM_CONSTRAINTS} generators")
    x = np.asarray(x, dtype=float)
    sc = max(1.0, float(np.linalg.norm(x)))
    best, best_d = None, math.inf
    if np.all(U.T @ x <= 1e-12 * sc):
        return x.copy()
    for size in range(1, min(m, C.n) + 1):
        for I in itertools.combinations(range(m), size):
            VI = U[:, I]
            mu, *_ = np.linalg.lstsq(VI, x, rcond=None)
            if np.any(mu < -1e-12 * sc):
                continue
            y = x - VI @ mu
            if np.any(U.T @ y > 1e-11 * sc):
                continue
            d = float(np.linalg.norm(x - y))
            if d < best_d:
                best, best_d = y, d
    if best is None:
        raise NumericalFailure("no feasible active set found")
    return best


def moreau_probe(C: PolyhedralCone, points) -> dict:
    """Moreau residual, orthogonality and feasibility on a batch of points.

    ``Pi_C`` comes from NNLS and ``Pi_{C°}`` from active-set enumeration.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    P = project_many(C, X).points
    Q = np.array([project_polar_by_enumeration(C, x) for x in X])
    U = C.unit_generators
    return {
        "max_residual": float(np.max(np.linalg.norm(X - P - Q, axis=1))),
        "max_orthogonality": float(np.max(np.abs(np.einsum("ij,ij->i", P, Q)))),
        "max_polar_infeasibility": float(max(0.0, np.max(Q @ U))),
    }


def convexity_probe(C: PolyhedralCone, stream: SeededStream, triples: int = 1000,
                    tol: float = 1e-9) -> dict:
    """Midpoint convexity of ``|Pi_C(x)|^2`` and nonexpansiveness of ``Pi_C``."""
    rng = stream.generator()
    X = rng.standard_normal((triples, C.n))
    Y = rng.standard_normal((triples, C.n))
    px, py = project_many(C, X).points, project_many(C, Y).points
    pm = project_many(C, 0.5 * (X + Y)).points
    f = lambda P: np.einsum("ij,ij->i", P, P)
    excess = f(pm) - 0.5 * (f(px) + f(py))
    expand = np.linalg.norm(px - py, axis=1) - np.linalg.norm(X - Y, axis=1)
    return {
        "midpoint_violations": int(np.sum(excess > tol)),
        "max_midpoint_excess": float(np.max(excess)),
        "nonexpansive_violations": int(np.sum(expand > tol)),
    }
