"""Rényi divergences of strongly log-concave laws from the standard Gaussian.

A law ``mu`` with ``d mu / d gamma = e^f`` (``f`` concave) is represented by
:class:`RelativeDensity`. Expectations against ``gamma_n`` use a
tensorized 60-node Gauss-Hermite rule for ``n <= 3`` and Monte Carlo beyond.
Every divergence here is a functional of the single sample/node table of
``f``, so the normalizer and the divergence share their noise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .gauss_core import SeededStream, gauss_hermite, gaussian_chunks
from .oracles import ConvexFunctionOracle, affine_deviation, midpoint_violations

__all__ = [
    "ChainResult",
    "ComparisonResult",
    "DivergenceReport",
    "RelativeDensity",
    "chain_check",
    "chi_squared",
    "comparison_check",
    "hellinger",
    "kl_divergence",
    "renyi_divergence",
    "reverse_divergence",
]

QUAD_NODES = 60
MAX_QUAD_DIM = 3
NORMALIZATION_TOL = 1e-6
QUAD_TOL = 1e-7
MC_SIGMAS = 3.0
AFFINE_SCREEN_TOL = 1e-7


def _tensor_rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    q = gauss_hermite(m)
    if n == 1:
        return q.nodes[:, None].copy(), np.log(q.weights)
    pts = np.array(list(itertools.product(q.nodes, repeat=n)))
    logw = np.array([sum(t) for t in itertools.product(np.log(q.weights), repeat=n)])
    return pts, logw


@dataclass(eq=False)
class RelativeDensity:
    """``d mu / d gamma_n = exp(f - log E e^f)`` for a concave oracle ``f``."""

    f: ConvexFunctionOracle
    samples: int = 200_000
    seed: int = 0
    quad_nodes: int = QUAD_NODES
    method: str = field(init=False)
    _fvals: np.ndarray = field(init=False, repr=False)
    _logw: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.f.is_concave:
            raise ValueError(f"relative log-density must be concave, got {self.f.shape!r}")
        n = self.f.dim
        if n <= MAX_QUAD_DIM:
            self.method = "quadrature"
            pts, self._logw = _tensor_rule(n, self.quad_nodes)
        else:
            self.method = "mc"
            pts = np.concatenate(list(gaussian_chunks(n, self.samples, SeededStream(self.seed))))
            self._logw = np.full(pts.shape[0], -math.log(pts.shape[0]))
        x = pts[:, 0] if n == 1 else pts
        self._fvals = np.asarray(self.f(x), dtype=float)
        if not np.all(np.isfinite(self._fvals)):
            raise ValueError("f is not finite at some quadrature/sample points")

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def log_normalization(self) -> float:
        """``log E_gamma e^f``; zero for a normalized input."""
        return self._lse(self._fvals)

    @property
    def normalization(self) -> float:
        return math.exp(self.log_normalization)

    @property
    def renormalized(self) -> bool:
        return abs(self.normalization - 1.0) > NORMALIZATION_TOL

    @property
    def tol(self) -> float:
        return QUAD_TOL if self.method == "quadrature" else math.nan

    def _lse(self, g: np.ndarray) -> float:
        return float(logsumexp(self._logw + g))

    def log_moment(self, p: float, normalized: bool = True) -> float:
        """``log E_gamma exp(p f~)`` with ``f~`` the normalized log-density."""
        val = self._lse(p * self._fvals)
        return val - p * self.log_normalization if normalized else val

    def _mc_stderr_log_moment(self, p: float) -> float:
        """Delta-method standard error of ``log E exp(p f~)`` for MC (ratio estimator)."""
        if self.method != "mc":
            return 0.0
        fv = self._fvals
        n = fv.size
        a = np.exp(p * fv - np.max(p * fv))
        b = np.exp(fv - np.max(fv))
        a /= a.mean()
        b /= b.mean()
        # influence function of log mean(a) - p log mean(b)
        infl = (a - 1.0) - p * (b - 1.0)
        return float(infl.std(ddof=1) / math.sqrt(n))

    def kl_terms(self) -> tuple[float, float]:
        logz = self.log_normalization
        q = np.exp(self._logw + self._fvals - logz)
        ftil = self._fvals - logz
        kl = float(np.dot(q, ftil))
        se = 0.0
        if self.method == "mc":
            w = np.exp(ftil)
            infl = w * ftil - kl - (w - 1.0) * (1.0 + kl)
            se = float(infl.std(ddof=1) / math.sqrt(w.size))
        return kl, se

    def tilted_expectation(self, g) -> float:
        """``E_gamma[g(f~)]`` for a vectorized function of the normalized log-density."""
        ftil = self._fvals - self.log_normalization
        return float(np.dot(np.exp(self._logw), g(ftil)))

    def is_concave_on_probes(self, stream: Optional[SeededStream] = None) -> bool:
        return midpoint_violations(self.f, stream or SeededStream(self.seed, 7)) == 0

    def affine_deviation(self, stream: Optional[SeededStream] = None) -> float:
        return affine_deviation(self.f, stream or SeededStream(self.seed, 8))


@dataclass(frozen=True)
class DivergenceReport:
    alpha: float
    value: float
    method: str
    stderr: Optional[float] = None
    raw_value: Optional[float] = None
    normalization: float = 1.0
    divergent: bool = False
    slacks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "value": self.value, "method": self.method,
            "stderr": self.stderr, "raw_value": self.raw_value,
            "normalization": self.normalization, "divergent": self.divergent,
            "slacks": dict(self.slacks),
        }


def renyi_divergence(rd: RelativeDensity, alpha: float) -> DivergenceReport:
    """``D_alpha(X || Z) = log E_gamma exp(alpha f~) / (alpha - 1)``."""
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if alpha == 1.0:
        return kl_divergence(rd)
    lm = rd.log_moment(alpha)
    raw = rd.log_moment(alpha, normalized=False) / (alpha - 1.0)
    if not math.isfinite(lm):
        return DivergenceReport(alpha, math.inf, rd.method, None, raw, rd.normalization, True)
    value = lm / (alpha - 1.0)
    se = rd._mc_stderr_log_moment(alpha) / abs(alpha - 1.0) if rd.method == "mc" else None
    return DivergenceReport(alpha, value, rd.method, se, raw, rd.normalization)


def kl_divergence(rd: RelativeDensity) -> DivergenceReport:
    """``E_gamma[f~ e^{f~}]`` computed directly."""
    kl, se = rd.kl_terms()
    raw = float(np.dot(np.exp(rd._logw + rd._fvals), rd._fvals))
    return DivergenceReport(1.0, kl, rd.method, se if rd.method == "mc" else None, raw,
                            rd.normalization, not math.isfinite(kl))


def hellinger(rd: RelativeDensity) -> float:
    """Squared Hellinger distance ``E_gamma (e^{f~/2} - 1)^2``."""
    return rd.tilted_expectation(lambda f: np.expm1(0.5 * f) ** 2)


def chi_squared(rd: RelativeDensity) -> float:
    """``E_gamma (e^{f~} - 1)^2``."""
    return rd.tilted_expectation(lambda f: np.expm1(f) ** 2)


def reverse_divergence(rd: RelativeDensity, alpha: float) -> float:
    """``D_alpha(Z || X) = log E_gamma exp((1 - alpha) f~) / (alpha - 1)``."""
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0:
        raise ValueError("alpha must be positive and different from 1")
    return rd.log_moment(1.0 - alpha) / (alpha - 1.0)


def _divergence(rd: RelativeDensity, alpha: float) -> DivergenceReport:
    return kl_divergence(rd) if alpha == 1.0 else renyi_divergence(rd, alpha)


def _tolerance(rd: RelativeDensity, *reports: DivergenceReport, weights=None) -> float:
    if rd.method == "quadrature":
        return QUAD_TOL
    weights = weights or [1.0] * len(reports)
    return MC_SIGMAS * math.sqrt(sum((w * (r.stderr or 0.0)) ** 2 for w, r in zip(weights, reports)))


@dataclass(frozen=True)
class ComparisonResult:
    alpha: float
    beta: float
    d_alpha: float
    d_beta: float
    ratio_bound_slack: float
    monotone_slack: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.ratio_bound_slack >= -self.tol and self.monotone_slack >= -self.tol

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "d_alpha": self.d_alpha,
                "d_beta": self.d_beta, "ratio_bound_slack": self.ratio_bound_slack,
                "monotone_slack": self.monotone_slack, "tol": self.tol, "holds": self.holds}


def comparison_check(rd: RelativeDensity, alpha: float, beta: float) -> ComparisonResult:
    """Check ``D_alpha <= D_beta <= (beta / alpha) D_alpha`` for ``0 < alpha < beta``."""
    alpha, beta = float(alpha), float(beta)
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    ra, rb = _divergence(rd, alpha), _divergence(rd, beta)
    tol = _tolerance(rd, ra, rb, weights=[beta / alpha, 1.0])
    return ComparisonResult(alpha, beta, ra.value, rb.value,
                            beta / alpha * ra.value - rb.value, rb.value - ra.value, tol)


@dataclass(frozen=True)
class ChainResult:
    d2: float
    two_kl: float
    four_d_half: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.d2 <= self.two_kl + self.tol and self.two_kl <= self.four_d_half + self.tol

    def to_dict(self) -> dict:
        return {"d2": self.d2, "two_kl": self.two_kl, "four_d_half": self.four_d_half,
                "tol": self.tol, "holds": self.holds}


def chain_check(rd: RelativeDensity) -> ChainResult:
    """``D_2 <= 2 D_1 <= 4 D_{1/2}``."""
    r2, r1, rh = renyi_divergence(rd, 2.0), kl_divergence(rd), renyi_divergence(rd, 0.5)
    tol = _tolerance(rd, r2, r1, rh, weights=[1.0, 2.0, 4.0])
    return ChainResult(r2.value, 2.0 * r1.value, 4.0 * rh.value, tol)


def equality_rigidity(rd: RelativeDensity, alpha: float, beta: float) -> dict:
    """Relate a vanishing ratio slack to an affine log-density.

    A translation of ``Z`` is the only law with zero slack, and its
    log-density is affine; the reverse implication is checked too.
    """
    cmp = comparison_check(rd, alpha, beta)
    dev = rd.affine_deviation()
    tight = cmp.ratio_bound_slack <= cmp.tol
    affine = dev <= AFFINE_SCREEN_TOL
    return {"ratio_bound_slack": cmp.ratio_bound_slack, "affine_deviation": dev,
            "tight": tight, "affine": affine, "consistent": tight == affine}
