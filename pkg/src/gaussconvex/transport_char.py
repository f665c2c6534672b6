"""Monotone transport of a one-dimensional law onto the standard Gaussian.

``T = Phi^{-1} o F`` pushes ``X`` forward to ``Z``. ``T`` is concave exactly
when ``X`` is a convex image ``phi(Z)`` of a one-dimensional Gaussian
(``phi = F^{-1} o Phi`` is then the increasing convex inverse of ``T``).
Discrete laws such as the Poisson fail: their ``T`` is a step function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._util import second_differences, to_csv
from .distributions import ScalarDistribution
from .gauss_core import (
    SeededStream,
    gaussian_chunks,
    std_normal_pdf,
    std_normal_quantile,
)
from .mgf_convexity import MC_SIGMAS, MIN_TAIL_SAMPLES, InsufficientDomainError, TailRow
from .oracles import ConvexFunctionOracle

__all__ = [
    "ConcavityResult",
    "ContractError",
    "MonotoneMap",
    "concavity_test",
    "convex_pushforward",
    "convexity_test",
    "distribution_function",
    "exponential_adaptation_check",
    "gaussian_transport_map",
    "pushforward_normality_screen",
    "transport_value",
]

CLOSED_FORM_TOL = 1e-9
SAMPLE_TOL_FACTOR = 4.0
MAX_LIFT_DIM = 8


class ContractError(ValueError):
    """An oracle's declared shape does not meet an operation's contract."""


def distribution_function(dist: ScalarDistribution, t: float) -> float:
    """``F(t) = P(X <= t)``."""
    return dist.cdf(t)


def transport_value(dist: ScalarDistribution, t: float) -> Optional[float]:
    """``Phi^{-1}(F(t))`` evaluated on the smaller tail; ``None`` where ``F`` is 0 or 1."""
    F = dist.cdf(t)
    S = dist.sf(t)
    if F <= 0.0 or S <= 0.0:
        return None
    if F <= 0.5:
        return std_normal_quantile(F)
    return -std_normal_quantile(S)


@dataclass(frozen=True)
class MonotoneMap:
    """A nondecreasing map sampled on a grid, with per-window concavity tolerances."""

    grid: np.ndarray
    values: np.ndarray
    tolerances: np.ndarray
    label: str = ""
    excluded: int = 0

    @property
    def second_differences(self) -> np.ndarray:
        return second_differences(self.grid, self.values)

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0))

    def to_csv(self, header_lines=()) -> str:
        sd = np.concatenate([[np.nan], self.second_differences, [np.nan]])
        rows = [(t, v, None if np.isnan(s) else s) for t, v, s in zip(self.grid, self.values, sd)]
        return to_csv(("t", "T", "second_diff"), rows, header_lines)


def gaussian_transport_map(dist: ScalarDistribution, grid, tol: Optional[float] = None) -> MonotoneMap:
    """Tabulate ``T(t) = Phi^{-1}(F(t))`` on ``grid``.

    Grid points where ``F`` is 0 or 1 are dropped with a warning. For sample
    sets the concavity tolerance at each window is ``4`` times the CDF
    standard error pushed through the derivative of ``Phi^{-1}``;
    otherwise it is ``tol`` (default ``1e-9``).
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    ts, vals = [], []
    for t in grid:
        v = transport_value(dist, t)
        if v is not None:
            ts.append(t)
            vals.append(v)
    excluded = grid.size - len(ts)
    if excluded:
        warnings.warn(f"{excluded} grid points with F in {{0, 1}} excluded from the transport map",
                      RuntimeWarning, stacklevel=2)
    ts, vals = np.array(ts), np.array(vals)
    if ts.size < 3:
        raise InsufficientDomainError("fewer than 3 grid points with 0 < F < 1")
    if dist.kind == "sample_set":
        n = dist.samples.size
        F = np.array([dist.cdf(t) for t in ts])
        se = np.sqrt(F * (1.0 - F) / n) / np.array([std_normal_pdf(v) for v in vals])
        tols = SAMPLE_TOL_FACTOR * (se[:-2] + 2.0 * se[1:-1] + se[2:])
    else:
        tols = np.full(ts.size - 2, CLOSED_FORM_TOL if tol is None else float(tol))
    return MonotoneMap(ts, vals, tols, dist.label, excluded)


@dataclass(frozen=True)
class ConcavityResult:
    is_concave: bool
    witness: Optional[tuple[float, float, float]]
    max_violation: float


def _shape_test(m: MonotoneMap, sign: float) -> ConcavityResult:
    if m.grid.size < 3:
        raise InsufficientDomainError("need at least 3 grid points")
    sd = sign * m.second_differences
    excess = np.where(np.isfinite(sd), sd - m.tolerances, -np.inf)
    bad = np.flatnonzero(excess > 0)
    worst = float(np.max(sd[np.isfinite(sd)])) if np.any(np.isfinite(sd)) else math.nan
    if bad.size == 0:
        return ConcavityResult(True, None, worst)
    i = int(bad[0])
    return ConcavityResult(False, (float(m.grid[i]), float(m.grid[i + 1]), float(m.grid[i + 2])), worst)


def concavity_test(m: MonotoneMap) -> ConcavityResult:
    """Concave iff every second difference is at most its tolerance.

    The witness is the first grid triple that violates this.
    """
    return _shape_test(m, 1.0)


def convexity_test(m: MonotoneMap) -> ConcavityResult:
    """Mirror of :func:`concavity_test`; affine maps pass both."""
    return _shape_test(m, -1.0)


def pushforward_normality_screen(dist: ScalarDistribution, samples: int,
                                 stream: SeededStream) -> dict:
    """Moment screen on ``T(X_i)``: mean within ``3/sqrt N`` of 0, variance within ``5/sqrt N`` of 1."""
    xs = dist.sample(samples, stream)
    vals = np.array([transport_value(dist, x) for x in xs], dtype=float)
    vals = vals[np.isfinite(vals)]
    n = vals.size
    mean, var = float(vals.mean()), float(vals.var(ddof=1))
    return {
        "n": n, "mean": mean, "var": var,
        "passes": abs(mean) <= 3.0 / math.sqrt(n) and abs(var - 1.0) <= 5.0 / math.sqrt(n),
    }


def convex_pushforward(phi: ConvexFunctionOracle, samples: int, stream: SeededStream) -> ScalarDistribution:
    """Sample set of ``phi(Z_i)`` for a convex one-dimensional ``phi``."""
    if phi.dim != 1:
        raise ContractError("convex_pushforward needs a one-dimensional oracle")
    if not phi.is_convex:
        raise ContractError(f"oracle {phi.name!r} is declared {phi.shape}, not convex")
    z = np.concatenate([c[:, 0] for c in gaussian_chunks(1, samples, stream)])
    vals = np.asarray(phi(z), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise ValueError(f"phi is not finite at z = {z[bad][:10].tolist()}")
    return ScalarDistribution.from_samples(vals)


def _coordinate_increasing(f: ConvexFunctionOracle, stream: SeededStream, probes: int = 200) -> bool:
    rng = stream.generator()
    x = rng.exponential(1.0, (probes, f.dim))
    base = f(x)
    for j in range(f.dim):
        y = x.copy()
        y[:, j] += rng.exponential(1.0, probes)
        if np.any(f(y) < base - 1e-12 * (1.0 + np.abs(base))):
            return False
    return True


def exponential_adaptation_check(f: ConvexFunctionOracle, t_grid, samples: int,
                                 stream: SeededStream) -> list[TailRow]:
    """Lower-tail bound for ``f(X)`` with ``X`` having i.i.d. standard exponential coordinates.

    Each coordinate is realized as ``(x_i^2 + y_i^2) / 2`` from ``2n``
    independent standard Gaussians, which makes ``f(X)`` a convex function
    of a Gaussian vector. Checks
    ``P(f(X) <= E f(X) - t) <= exp(-t^2 / (2 var f(X)))`` within three
    binomial standard errors, using sample moments.
    """
    if not f.is_convex:
        raise ContractError(f"oracle {f.name!r} is declared {f.shape}, not convex")
    n = f.dim
    if n > MAX_LIFT_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_LIFT_DIM}")
    samples = int(samples)
    if samples < MIN_TAIL_SAMPLES:
        raise InsufficientDomainError(f"need at least {MIN_TAIL_SAMPLES} samples")
    if not _coordinate_increasing(f, stream.substream(10**6)):
        raise ContractError(f"oracle {f.name!r} is not coordinate increasing on probes")
    vals = []
    for g in gaussian_chunks(2 * n, samples, stream):
        e = 0.5 * (g[:, :n] ** 2 + g[:, n:] ** 2)
        vals.append(np.asarray(f(e if n > 1 else e[:, 0]), dtype=float))
    v = np.sort(np.concatenate(vals))
    mean, var = float(v.mean()), float(v.var(ddof=1))
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        emp = np.searchsorted(v, mean - t, side="right") / v.size
        bound = math.exp(-t * t / (2.0 * var))
        se = math.sqrt(emp * (1.0 - emp) / v.size)
        rows.append(TailRow(float(t), float(emp), bound, se, bool(emp <= bound + MC_SIGMAS * se)))
    return rows
