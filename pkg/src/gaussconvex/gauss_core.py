"""Gaussian primitives shared by the rest of the package.

Standard normal CDF and quantile, seeded Gaussian sampling with a fixed
chunking policy, Gauss-Hermite rules normalized to the standard Gaussian
measure, and the mean of the chi distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

__all__ = [
    "CHUNK_ROWS",
    "GENERATOR_NAME",
    "GaussianQuadrature",
    "SeededStream",
    "chi_mean",
    "chunk_sizes",
    "gauss_hermite",
    "gaussian_chunks",
    "sample_gaussian",
    "sample_gaussian_canonical",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "std_normal_upper_quantile",
]

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Rows per canonical Monte Carlo chunk; chunk ``j`` is drawn from stream ``j``.
CHUNK_ROWS = 1 << 16

GENERATOR_NAME = f"numpy.random.PCG64 via SeedSequence(seed, spawn_key=(stream_id,)); numpy {np.__version__}"


def _check_finite(t: float, name: str = "t") -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"{name} must be finite, got {t!r}")
    return t


def std_normal_pdf(t: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * t * t)


def std_normal_cdf(t: float) -> float:
    """Standard normal distribution function.

    Evaluated through ``erfc`` on the tail side of zero so that neither
    tail loses digits to cancellation.
    """
    t = _check_finite(t)
    if t < 0.0:
        return 0.5 * math.erfc(-t / SQRT2)
    return 1.0 - 0.5 * math.erfc(t / SQRT2)


def _std_normal_sf(t: float) -> float:
    return 0.5 * math.erfc(t / SQRT2)


# Acklam's rational approximation, relative error ~1e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        return num / den
    return -_acklam(1.0 - p)


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` on the open unit interval.

    Rational initial guess followed by two Newton steps on the CDF. The
    refinement works on whichever tail is smaller, so small tail
    probabilities keep full relative accuracy.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if p > 0.5:
        # work on the lower tail of 1 - p; 1 - p is exact for p > 0.5
        return -_lower_quantile(1.0 - p)
    return _lower_quantile(p)


def _lower_quantile(p: float) -> float:
    x = _acklam(p)
    for _ in range(2):
        x -= (_std_normal_sf(-x) - p) / std_normal_pdf(x)
    return x


def std_normal_upper_quantile(q: float) -> float:
    """Return ``x`` with ``P(Z > x) = q``, accurate for tiny ``q``."""
    q = float(q)
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    if q > 0.5:
        return _lower_quantile(1.0 - q)
    return -_lower_quantile(q)


@dataclass(frozen=True)
class SeededStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise ValueError("stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset: int) -> "SeededStream":
        """Stream ``offset`` positions further along the same seed."""
        return SeededStream(self.seed, self.stream_id + int(offset))


def sample_gaussian(dim: int, count: int, stream: SeededStream) -> np.ndarray:
    """Draw a ``count x dim`` matrix of independent standard normals."""
    dim, count = int(dim), int(count)
    if dim <= 0 or count <= 0:
        raise ValueError("dim and count must be positive")
    return stream.generator().standard_normal((count, dim))


def chunk_sizes(count: int, rows: int = CHUNK_ROWS) -> list[int]:
    full, rest = divmod(int(count), rows)
    return [rows] * full + ([rest] if rest else [])


def gaussian_chunks(dim: int, count: int, stream: SeededStream,
                    rows: int = CHUNK_ROWS) -> Iterator[np.ndarray]:
    """Yield the canonical chunking of ``count`` Gaussian rows.

    Chunk ``j`` comes from ``stream.substream(j)``, so chunks may be
    generated independently (e.g. by separate workers) and concatenated in
    index order to reproduce :func:`sample_gaussian_canonical`.
    """
    if int(count) <= 0:
        raise ValueError("count must be positive")
    for j, size in enumerate(chunk_sizes(count, rows)):
        yield sample_gaussian(dim, size, stream.substream(j))


def sample_gaussian_canonical(dim: int, count: int, stream: SeededStream) -> np.ndarray:
    return np.concatenate(list(gaussian_chunks(dim, count, stream)), axis=0)


@dataclass(frozen=True)
class GaussianQuadrature:
    """Nodes and weights integrating against the standard Gaussian measure."""

    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, func: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, func(self.nodes)))

    def log_expect_exp(self, log_integrand: np.ndarray) -> float:
        """``log sum_i w_i exp(g_i)`` without overflow."""
        g = np.asarray(log_integrand, dtype=float)
        top = np.max(g)
        if not np.isfinite(top):
            return float(top)
        return float(top + np.log(np.dot(self.weights, np.exp(g - top))))


@lru_cache(maxsize=64)
def _hermegauss_normalized(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = hermegauss(m)
    w = w / math.sqrt(2.0 * math.pi)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_hermite(m: int = 60) -> GaussianQuadrature:
    """``m``-point Gauss-Hermite rule for the standard Gaussian measure.

    Exact for polynomials of degree up to ``2m - 1``.
    """
    m = int(m)
    if not (1 <= m <= 200):
        raise ValueError(f"m must be in [1, 200], got {m}")
    x, w = _hermegauss_normalized(m)
    return GaussianQuadrature(x, w)


def chi_mean(n: int) -> float:
    """Mean of the chi distribution with ``n`` degrees of freedom, i.e. E|Z|."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be a positive integer")
    return SQRT2 * math.exp(math.lgamma((n + 1) / 2.0) - math.lgamma(n / 2.0))
