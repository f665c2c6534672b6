"""Normalized log-MGF ``Lambda_X(p) = log E exp(pX) / p`` and its convexity.

Convexity is certified on finite grids through second differences. For
laws whose distribution function composed with the Gaussian quantile is
concave, ``Lambda_X`` is convex, affine exactly for Gaussians, and the
Gaussian "chord" matching ``Lambda_X`` at two points lies below it in
between. The same convexity yields a sub-Gaussian lower-tail bound, checked
here against Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import second_differences, to_csv
from .distributions import ScalarDistribution
from .gauss_core import SeededStream

__all__ = [
    "Chord",
    "InsufficientDomainError",
    "LambdaProfile",
    "MGFBound",
    "TailRow",
    "chernoff_lower_tail_check",
    "gaussian_chord",
    "lambda_profile",
    "lambda_value",
    "mgf_upper_bound_check",
    "orientation_gap",
    "strict_convexity_gap",
]

DEFAULT_TOL = 1e-7
MC_SIGMAS = 3.0
MIN_TAIL_SAMPLES = 1000


class InsufficientDomainError(ValueError):
    pass


def lambda_value(dist: ScalarDistribution, p: float) -> float:
    """``Lambda_X(p)``; the mean at ``p = 0`` and ``+inf`` where the MGF diverges."""
    return dist.lambda_value(p)


def _lambda_stderr(dist: ScalarDistribution, p: float) -> float:
    """Delta-method standard error of ``Lambda`` for sample sets; 0 otherwise."""
    if dist.kind != "sample_set":
        return 0.0
    xs = dist.samples
    n = xs.size
    if abs(p) <= 1e-12:
        return float(np.std(xs, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    g = p * xs
    w = np.exp(g - g.max())
    m = w.mean()
    if n < 2 or m == 0:
        return math.inf
    return float(w.std(ddof=1) / (m * math.sqrt(n) * abs(p)))


@dataclass(frozen=True)
class LambdaProfile:
    grid: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    tolerances: np.ndarray

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def finite_is_interval(self) -> bool:
        """The finite set of ``Lambda`` is a ray, so on a grid it has no holes."""
        idx = np.flatnonzero(self.finite)
        return idx.size == 0 or idx[-1] - idx[0] + 1 == idx.size

    @property
    def min_second_difference(self) -> float:
        sd = self.second_differences[np.isfinite(self.second_differences)]
        return float(sd.min()) if sd.size else math.nan

    def is_convex(self) -> bool:
        sd = self.second_differences
        ok = np.isfinite(sd)
        return bool(np.all(sd[ok] >= -self.tolerances[ok]))

    def is_concave(self) -> bool:
        sd = self.second_differences
        ok = np.isfinite(sd)
        return bool(np.all(sd[ok] <= self.tolerances[ok]))

    def violations(self) -> list[int]:
        """Interior grid indices where convexity fails beyond tolerance."""
        sd = self.second_differences
        bad = np.isfinite(sd) & (sd < -self.tolerances)
        return [int(i) + 1 for i in np.flatnonzero(bad)]

    def to_csv(self, header_lines=()) -> str:
        sd = np.concatenate([[np.nan], self.second_differences, [np.nan]])
        rows = [(p, v, None if np.isnan(s) else s) for p, v, s in zip(self.grid, self.values, sd)]
        return to_csv(("p", "lambda", "second_diff"), rows, header_lines)


def lambda_profile(dist: ScalarDistribution, grid, tol: float = DEFAULT_TOL) -> LambdaProfile:
    """Evaluate ``Lambda_X`` on ``grid`` and take second differences.

    Windows touching a divergent value are excluded. Sample sets get a
    per-window tolerance of three delta-method standard errors instead of
    ``tol``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise InsufficientDomainError("grid needs at least 3 points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    values = np.array([dist.lambda_value(p) for p in grid])
    if np.count_nonzero(np.isfinite(values)) < 3:
        raise InsufficientDomainError("fewer than 3 finite values of Lambda on the grid")
    sd = second_differences(grid, values)
    if dist.kind == "sample_set":
        se = np.array([_lambda_stderr(dist, p) for p in grid])
        tols = MC_SIGMAS * np.sqrt(se[:-2] ** 2 + 4 * se[1:-1] ** 2 + se[2:] ** 2)
    else:
        tols = np.full(sd.shape, float(tol))
    return LambdaProfile(grid, values, sd, tols)


@dataclass(frozen=True)
class Chord:
    """Gaussian ``sigma Z + mu`` whose (affine) ``Lambda`` matches at two points."""

    mu: float
    sigma2: float
    p0: float
    p1: float

    @property
    def valid(self) -> bool:
        return self.sigma2 >= 0.0

    def lambda_o(self, p):
        return self.mu + 0.5 * self.sigma2 * np.asarray(p, dtype=float)


def gaussian_chord(dist: ScalarDistribution, p0: float, p1: float) -> Chord:
    """Fit the Gaussian chord through ``Lambda(p0)`` and ``Lambda(p1)``.

    A negative ``sigma2`` (``Chord.valid`` false) means ``Lambda`` decreased
    between the two points; that is left for the caller to judge.
    """
    p0, p1 = float(p0), float(p1)
    if not p0 < p1:
        raise ValueError("need p0 < p1")
    l0, l1 = dist.lambda_value(p0), dist.lambda_value(p1)
    if not (math.isfinite(l0) and math.isfinite(l1)):
        raise InsufficientDomainError(f"Lambda is infinite at p0={p0} or p1={p1}")
    mu = (p1 * l0 - p0 * l1) / (p1 - p0)
    sigma2 = 2.0 * (l1 - l0) / (p1 - p0)
    return Chord(mu, sigma2, p0, p1)


def strict_convexity_gap(dist: ScalarDistribution, p0: float, p1: float, interior,
                         orientation: str = "convex") -> np.ndarray:
    """Signed distance between ``Lambda`` and its Gaussian chord inside ``(p0, p1)``.

    With ``orientation="convex"`` (lower-tail hypothesis) the gap is
    ``Lambda_chord(p) - Lambda(p)``; with ``"concave"`` (upper-tail
    hypothesis) it is ``Lambda(p) - Lambda_chord(p)``. Either way the gap is
    nonnegative under the hypothesis, zero for Gaussians, and strictly
    positive otherwise.
    """
    if orientation not in ("convex", "concave"):
        raise ValueError("orientation must be 'convex' or 'concave'")
    chord = gaussian_chord(dist, p0, p1)
    pts = np.asarray(interior, dtype=float)
    if np.any((pts <= p0) | (pts >= p1)):
        raise ValueError("interior points must lie strictly between p0 and p1")
    vals = np.array([dist.lambda_value(p) for p in pts])
    gap = vals - chord.lambda_o(pts)
    return -gap if orientation == "convex" else gap


def orientation_gap(dist: ScalarDistribution, grid) -> float:
    """``max |Lambda_{-X}(p) + Lambda_X(-p)|``; zero up to rounding for any law."""
    neg = dist.negate()
    diffs = [neg.lambda_value(p) + dist.lambda_value(-p) for p in np.asarray(grid, dtype=float)]
    diffs = [d for d in diffs if math.isfinite(d)]
    return float(np.max(np.abs(diffs))) if diffs else 0.0


@dataclass(frozen=True)
class MGFBound:
    lam: float
    lhs: float
    rhs: float
    holds: bool


def mgf_upper_bound_check(dist: ScalarDistribution, lam: float, tol: float = DEFAULT_TOL) -> MGFBound:
    """Compare ``E exp(lam X)`` with ``exp(lam^2 var / 2 + lam mean)`` for ``lam <= 0``."""
    lam = float(lam)
    if lam > 0:
        raise ValueError("the MGF bound is only claimed for lam <= 0")
    mean, var = dist.moments()
    lhs = math.exp(dist.log_mgf(lam))
    rhs = math.exp(0.5 * lam * lam * var + lam * mean)
    slack = tol
    if dist.kind == "sample_set" and lam != 0.0:
        w = np.exp(lam * dist.samples)
        slack = max(tol, MC_SIGMAS * float(w.std(ddof=1)) / (math.sqrt(w.size) * lhs))
    return MGFBound(lam, lhs, rhs, lhs <= rhs * (1.0 + slack))


@dataclass(frozen=True)
class TailRow:
    t: float
    empirical: float
    bound: float
    stderr: float
    holds: bool


def chernoff_lower_tail_check(dist: ScalarDistribution, t_grid, stream: SeededStream,
                              samples: int) -> list[TailRow]:
    """Empirical ``P(X <= E X - t)`` against ``exp(-t^2 / (2 var X))``.

    Mean and variance come from the law itself (exact for closed forms).
    A row holds when the empirical frequency is within three binomial
    standard errors of the bound or below it.
    """
    samples = int(samples)
    if samples < MIN_TAIL_SAMPLES:
        raise InsufficientDomainError(f"need at least {MIN_TAIL_SAMPLES} samples")
    mean, var = dist.moments()
    if not var > 0:
        raise ValueError("variance must be positive")
    xs = dist.sample(samples, stream)
    xs.sort()
    n = xs.size
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        if t < 0:
            raise ValueError("t must be nonnegative")
        k = np.searchsorted(xs, mean - t, side="right")
        emp = k / n
        bound = math.exp(-t * t / (2.0 * var))
        se = math.sqrt(max(emp * (1.0 - emp), 0.0) / n)
        rows.append(TailRow(float(t), float(emp), bound, se, emp <= bound + MC_SIGMAS * se))
    return rows
