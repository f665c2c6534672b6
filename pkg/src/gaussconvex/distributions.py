"""One-dimensional laws given in closed form, as a density on a grid, or by samples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, special

from .gauss_core import (
    SeededStream,
    gauss_hermite,
    gaussian_chunks,
    std_normal_cdf,
    std_normal_quantile,
)
from .oracles import ConvexFunctionOracle

KINDS = ("closed_form", "density_grid", "sample_set")
FAMILIES = ("gaussian", "poisson", "exponential", "pushforward", "negated")

# |p| below this is treated as p = 0 (mean convention)
P_ZERO = 1e-12
# non-closed laws switch to the two-term series for |p| below this
P_SERIES = 1e-6
QUAD_NODES = 60


@dataclass(frozen=True, eq=False)
class ScalarDistribution:
    """A real-valued random variable ``X``.

    Use the constructors (:meth:`gaussian`, :meth:`poisson`,
    :meth:`exponential`, :meth:`pushforward`, :meth:`from_density`,
    :meth:`from_samples`) rather than the raw initializer.
    """

    kind: str
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    oracle: Optional[ConvexFunctionOracle] = None
    base: Optional["ScalarDistribution"] = None
    grid: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None
    samples: Optional[np.ndarray] = None
    moment_cache: Optional[tuple[float, float]] = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def gaussian(cls, mu: float = 0.0, var: float = 1.0) -> "ScalarDistribution":
        if not var > 0:
            raise ValueError("variance must be positive")
        return cls("closed_form", "gaussian", {"mu": float(mu), "var": float(var)},
                   moment_cache=(float(mu), float(var)))

    @classmethod
    def poisson(cls, rate: float) -> "ScalarDistribution":
        if not rate > 0:
            raise ValueError("rate must be positive")
        return cls("closed_form", "poisson", {"rate": float(rate)},
                   moment_cache=(float(rate), float(rate)))

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "ScalarDistribution":
        if not rate > 0:
            raise ValueError("rate must be positive")
        return cls("closed_form", "exponential", {"rate": float(rate)},
                   moment_cache=(1.0 / rate, 1.0 / rate**2))

    @classmethod
    def pushforward(cls, oracle: ConvexFunctionOracle) -> "ScalarDistribution":
        """Law of ``f(Z)`` for a one-dimensional oracle ``f`` and ``Z ~ N(0, 1)``."""
        if oracle.dim != 1:
            raise ValueError("pushforward requires a one-dimensional oracle")
        return cls("closed_form", "pushforward", {"name": oracle.name}, oracle=oracle,
                   moment_cache=oracle.moments)

    @classmethod
    def from_density(cls, grid, density, atol: float = 1e-8) -> "ScalarDistribution":
        x = np.asarray(grid, dtype=float)
        rho = np.asarray(density, dtype=float)
        if x.ndim != 1 or x.shape != rho.shape or x.size < 2:
            raise ValueError("grid and density must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise ValueError("density values must be finite and nonnegative")
        mass = np.trapezoid(rho, x)
        if abs(mass - 1.0) > atol:
            raise ValueError(f"density integrates to {mass!r}, not 1")
        return cls("density_grid", grid=x, density=rho)

    @classmethod
    def from_samples(cls, samples) -> "ScalarDistribution":
        xs = np.sort(np.asarray(samples, dtype=float).ravel())
        if xs.size == 0:
            raise ValueError("sample set is empty")
        if not np.all(np.isfinite(xs)):
            raise ValueError("samples must be finite")
        return cls("sample_set", samples=xs)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.family is not None and self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")

    # -- description --------------------------------------------------------

    @property
    def label(self) -> str:
        if self.kind == "sample_set":
            return f"samples(N={self.samples.size})"
        if self.kind == "density_grid":
            return f"density_grid(m={self.grid.size})"
        if self.family == "negated":
            return f"-{self.base.label}"
        if self.family == "pushforward":
            return f"pushforward({self.oracle.name})"
        args = ",".join(f"{v:g}" for v in self.params.values())
        return f"{self.family}({args})"

    @property
    def is_discrete(self) -> bool:
        if self.family == "negated":
            return self.base.is_discrete
        return self.family == "poisson" or self.kind == "sample_set"

    def negate(self) -> "ScalarDistribution":
        """Law of ``-X``."""
        if self.kind == "sample_set":
            return ScalarDistribution.from_samples(-self.samples)
        if self.kind == "density_grid":
            return ScalarDistribution("density_grid", grid=-self.grid[::-1],
                                      density=self.density[::-1].copy())
        if self.family == "gaussian":
            return ScalarDistribution.gaussian(-self.params["mu"], self.params["var"])
        if self.family == "negated":
            return self.base
        mc = None if self.moment_cache is None else (-self.moment_cache[0], self.moment_cache[1])
        return ScalarDistribution("closed_form", "negated", base=self, moment_cache=mc)

    # -- moments ------------------------------------------------------------

    def moments(self) -> tuple[float, float]:
        """``(mean, variance)``; unbiased sample variance for sample sets."""
        if self.moment_cache is not None:
            return self.moment_cache
        if self.kind == "sample_set":
            xs = self.samples
            var = float(np.var(xs, ddof=1)) if xs.size > 1 else 0.0
            return float(np.mean(xs)), var
        if self.kind == "density_grid":
            m = np.trapezoid(self.grid * self.density, self.grid)
            v = np.trapezoid((self.grid - m) ** 2 * self.density, self.grid)
            return float(m), float(v)
        if self.family == "negated":
            m, v = self.base.moments()
            return -m, v
        if self.family == "pushforward":
            q = gauss_hermite(QUAD_NODES)
            fz = self.oracle(q.nodes)
            m = float(np.dot(q.weights, fz))
            return m, float(np.dot(q.weights, (fz - m) ** 2))
        raise AssertionError(self.family)

    def mean(self) -> float:
        return self.moments()[0]

    def variance(self) -> float:
        return self.moments()[1]

    # -- moment generating function ----------------------------------------

    def log_mgf(self, p: float) -> float:
        """``log E exp(pX)``, or ``+inf`` when the expectation diverges."""
        p = float(p)
        if p == 0.0:
            return 0.0
        if self.kind == "sample_set":
            return float(special.logsumexp(p * self.samples) - math.log(self.samples.size))
        if self.kind == "density_grid":
            x, rho = self.grid, self.density
            g = p * x
            top = np.max(g)
            return float(top + math.log(np.trapezoid(np.exp(g - top) * rho, x)))
        fam = self.family
        if fam == "gaussian":
            return p * self.params["mu"] + 0.5 * p * p * self.params["var"]
        if fam == "poisson":
            return self.params["rate"] * math.expm1(p)
        if fam == "exponential":
            r = self.params["rate"]
            return -math.log1p(-p / r) if p < r else math.inf
        if fam == "negated":
            return self.base.log_mgf(-p)
        if fam == "pushforward":
            if self.oracle.log_mgf is not None:
                val = self.oracle.log_mgf(p)
                if val is not None:
                    return float(val)
            return _quadrature_log_mgf(self.oracle, p)
        raise AssertionError(fam)

    def lambda_value(self, p: float) -> float:
        """Normalized log-MGF ``log E exp(pX) / p`` with the mean at ``p = 0``."""
        p = float(p)
        if not math.isfinite(p):
            raise ValueError("p must be finite")
        if abs(p) <= P_ZERO:
            return self.mean()
        if self.family == "gaussian":
            return self.params["mu"] + 0.5 * self.params["var"] * p
        if self.family == "poisson":
            return self.params["rate"] * math.expm1(p) / p
        if self.family == "exponential":
            r = self.params["rate"]
            return -math.log1p(-p / r) / p if p < r else math.inf
        if abs(p) <= P_SERIES and self.kind != "closed_form":
            m, v = self.moments()
            return m + 0.5 * v * p
        val = self.log_mgf(p)
        if math.isinf(val):
            return math.inf
        return val / p

    # -- distribution function ---------------------------------------------

    def cdf(self, t: float) -> float:
        """``P(X <= t)``.

        Sample sets use the ``i/(N+1)`` convention at the order statistics,
        which keeps the value strictly below 1.
        """
        t = float(t)
        if self.kind == "sample_set":
            return float(np.searchsorted(self.samples, t, side="right")) / (self.samples.size + 1)
        if self.kind == "density_grid":
            return _grid_cdf(self.grid, self.density, t)
        fam = self.family
        if fam == "gaussian":
            return std_normal_cdf((t - self.params["mu"]) / math.sqrt(self.params["var"]))
        if fam == "poisson":
            return 0.0 if t < 0 else float(special.pdtr(math.floor(t), self.params["rate"]))
        if fam == "exponential":
            return 0.0 if t <= 0 else -math.expm1(-self.params["rate"] * t)
        if fam == "negated":
            # P(-Y <= t) = P(Y >= -t)
            base = self.base
            if base.is_discrete:
                return base.sf(math.nextafter(-t, -math.inf))
            return base.sf(-t)
        if fam == "pushforward":
            if self.oracle.cdf is not None:
                return float(self.oracle.cdf(t))
            a, b = _sublevel_interval(self.oracle, t)
            if a is None:
                return 0.0
            lo = std_normal_cdf(a) if math.isfinite(a) else 0.0
            hi = std_normal_cdf(b) if math.isfinite(b) else 1.0
            return hi - lo
        raise AssertionError(fam)

    def sf(self, t: float) -> float:
        """``P(X > t)``, computed without cancellation where possible."""
        t = float(t)
        if self.kind != "closed_form":
            if self.kind == "sample_set":
                n_le = np.searchsorted(self.samples, t, side="right")
                return float(self.samples.size - n_le) / (self.samples.size + 1)
            return 1.0 - self.cdf(t)
        fam = self.family
        if fam == "gaussian":
            return std_normal_cdf(-(t - self.params["mu"]) / math.sqrt(self.params["var"]))
        if fam == "poisson":
            return 1.0 if t < 0 else float(special.pdtrc(math.floor(t), self.params["rate"]))
        if fam == "exponential":
            return 1.0 if t <= 0 else math.exp(-self.params["rate"] * t)
        if fam == "negated":
            base = self.base
            if base.is_discrete:
                return base.cdf(math.nextafter(-t, -math.inf))
            return base.cdf(-t)
        if fam == "pushforward":
            if self.oracle.sf is not None:
                return float(self.oracle.sf(t))
            a, b = _sublevel_interval(self.oracle, t)
            if a is None:
                return 1.0
            lo = std_normal_cdf(a) if math.isfinite(a) else 0.0
            hi = std_normal_cdf(-b) if math.isfinite(b) else 0.0
            return lo + hi
        raise AssertionError(fam)

    def quantile(self, u: float) -> float:
        """Generalized inverse of :meth:`cdf` for continuous laws."""
        u = float(u)
        if not (0.0 < u < 1.0):
            raise ValueError("u must lie in (0, 1)")
        fam = self.family
        if fam == "gaussian":
            return self.params["mu"] + math.sqrt(self.params["var"]) * std_normal_quantile(u)
        if fam == "exponential":
            return -math.log1p(-u) / self.params["rate"]
        if self.kind == "sample_set" or self.is_discrete:
            raise ValueError("quantile is only provided for continuous laws")
        return _invert_cdf(self, u)

    # -- sampling -----------------------------------------------------------

    def sample(self, count: int, stream: SeededStream) -> np.ndarray:
        count = int(count)
        if count <= 0:
            raise ValueError("count must be positive")
        if self.kind == "sample_set":
            return self.samples.copy()
        fam = self.family
        if fam in ("gaussian", "pushforward"):
            z = np.concatenate([c[:, 0] for c in gaussian_chunks(1, count, stream)])
            if fam == "gaussian":
                return self.params["mu"] + math.sqrt(self.params["var"]) * z
            out = np.asarray(self.oracle(z), dtype=float)
            if not np.all(np.isfinite(out)):
                bad = z[~np.isfinite(out)][:5]
                raise ValueError(f"oracle returned non-finite values at z = {bad.tolist()}")
            return out
        rng = stream.generator()
        if fam == "poisson":
            return rng.poisson(self.params["rate"], count).astype(float)
        if fam == "exponential":
            return rng.exponential(1.0 / self.params["rate"], count)
        if fam == "negated":
            return -self.base.sample(count, stream)
        if self.kind == "density_grid":
            x, rho = self.grid, self.density
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x))])
            return np.interp(rng.random(count), cum / cum[-1], x)
        raise AssertionError(fam)


# ---------------------------------------------------------------------------
# helpers

def _quadrature_log_mgf(oracle: ConvexFunctionOracle, p: float) -> float:
    # divergence screen: the exponent p f(z) - z^2/2 must eventually decrease
    far = np.array([-40.0, -20.0, 20.0, 40.0])
    with np.errstate(over="ignore", invalid="ignore"):
        g = p * np.asarray(oracle(far), dtype=float) - 0.5 * far**2
    if not np.all(np.isfinite(g)) or g[0] > g[1] or g[3] > g[2]:
        return math.inf
    q = gauss_hermite(QUAD_NODES)
    return q.log_expect_exp(p * np.asarray(oracle(q.nodes), dtype=float))


def _grid_cdf(x: np.ndarray, rho: np.ndarray, t: float) -> float:
    if t <= x[0]:
        return 0.0
    if t >= x[-1]:
        return 1.0
    cells = 0.5 * (rho[1:] + rho[:-1]) * np.diff(x)
    i = int(np.searchsorted(x, t, side="right")) - 1
    h = x[i + 1] - x[i]
    s = t - x[i]
    partial = rho[i] * s + 0.5 * (rho[i + 1] - rho[i]) * s * s / h
    return float(min(1.0, np.sum(cells[:i]) + partial))


_SUBLEVEL_BOUND = 40.0


def _sublevel_interval(oracle: ConvexFunctionOracle, t: float):
    """Endpoints of ``{z : f(z) <= t}`` for a convex 1-D ``f``; ``(None, None)`` if empty."""
    if not oracle.is_convex:
        raise ValueError("distribution function of a pushforward needs a convex oracle "
                         "or a closed-form cdf")
    f = lambda z: float(oracle(np.float64(z)))  # noqa: E731
    L = _SUBLEVEL_BOUND
    res = optimize.minimize_scalar(f, bounds=(-L, L), method="bounded",
                                   options={"xatol": 1e-12})
    zmin = float(res.x)
    if f(zmin) > t:
        return None, None
    a = -math.inf if f(-L) <= t else optimize.brentq(lambda z: f(z) - t, -L, zmin, xtol=1e-14)
    b = math.inf if f(L) <= t else optimize.brentq(lambda z: f(z) - t, zmin, L, xtol=1e-14)
    return a, b


def _invert_cdf(dist: ScalarDistribution, u: float) -> float:
    lo, hi = -1.0, 1.0
    while dist.cdf(lo) > u:
        lo *= 2.0
        if lo < -1e12:
            raise ValueError("could not bracket quantile")
    while dist.cdf(hi) < u:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("could not bracket quantile")
    return optimize.brentq(lambda t: dist.cdf(t) - u, lo, hi, xtol=1e-15, rtol=1e-15)
