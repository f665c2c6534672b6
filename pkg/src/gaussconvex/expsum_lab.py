"""Real zeros and sign structure of exponential sums ``sum_i c_i exp(p_i x)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ExpSum",
    "FitResult",
    "SignPattern",
    "ZeroCount",
    "count_zeros",
    "fit_two_zeros",
    "positivity_violations",
    "root_window",
    "sign_pattern_check",
]

MIN_GAP = 1e-12
COARSE_POINTS = 1000
ROOT_XTOL = 1e-12
TANGENCY_TOL = 1e-9
DOMINANCE = 1e3
OVERFLOW_EXP = 709.0
FIT_TOL = 1e-10


class InvariantViolation(AssertionError):
    """A mathematical invariant failed; indicates a bug, not bad input."""


@dataclass(frozen=True, eq=False)
class ExpSum:
    """``Psi(x) = sum_i c_i exp(p_i x)`` with strictly increasing exponents."""

    p: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if p.shape != c.shape or p.ndim != 1:
            raise ValueError("p and c must be 1-D of equal length")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(c))):
            raise ValueError("exponents and coefficients must be finite")
        if np.any(np.diff(p) < MIN_GAP):
            raise ValueError(f"exponents must increase with gap >= {MIN_GAP}")
        if not np.any(c != 0):
            raise ValueError("at least one coefficient must be nonzero")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_json(cls, obj: dict) -> "ExpSum":
        return cls(obj["p"], obj["c"])

    def to_json(self) -> dict:
        return {"p": self.p.tolist(), "c": self.c.tolist()}

    @property
    def n(self) -> int:
        """Number of terms minus one: the zero-count bound."""
        return self.p.size - 1

    def _terms(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exponent offsets relative to the dominant live term, per point."""
        live = self.c != 0
        e = np.multiply.outer(x, self.p)
        top = np.max(np.where(live, e, -np.inf), axis=-1)
        return e - top[..., None], top

    def scaled(self, x) -> tuple[np.ndarray, np.ndarray]:
        """``(m, t)`` with ``Psi(x) = m exp(t)`` and ``|m| <= sum |c_i|``; never overflows."""
        x = np.asarray(x, dtype=float)
        rel, top = self._terms(x)
        cn = self.c / np.max(np.abs(self.c))
        m = np.exp(rel) @ cn
        return m, top + math.log(np.max(np.abs(self.c)))

    def relative(self, x):
        """``Psi(x) / sum_i |c_i| exp(p_i x)``: the value on a scale where 1 means no cancellation."""
        x = np.asarray(x, dtype=float)
        rel, _ = self._terms(x)
        w = np.exp(rel)
        return (w @ self.c) / (w @ np.abs(self.c))

    def __call__(self, x):
        m, t = self.scaled(x)
        if np.any((t > OVERFLOW_EXP) & (m != 0)):
            raise OverflowError("exponential sum overflows at this x even after recentering")
        out = m * np.exp(t)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> "ExpSum":
        keep = self.c * self.p != 0
        if not np.any(keep):
            return _ZERO
        return ExpSum(self.p[keep], (self.c * self.p)[keep])

    def rolle_derivative(self) -> "ExpSum":
        """Derivative of ``exp(-p_0 x) Psi(x)``: one fewer term, zeros interleave those of ``Psi``."""
        q = self.p[1:] - self.p[0]
        d = self.c[1:] * q
        if not np.any(d != 0):
            return _ZERO
        return ExpSum(q, d)


class _ZeroSum:
    """Identically zero function returned when a derivative vanishes."""

    n = -1

    def relative(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


_ZERO = _ZeroSum()


def root_window(psi: ExpSum) -> tuple[float, float]:
    """Interval outside which the extreme terms dominate the rest by ``10^3``.

    Beyond it ``Psi`` has the sign of ``c_last`` on the right and ``c_first``
    on the left, so every real zero lies inside.
    """
    live = np.flatnonzero(psi.c)
    if live.size <= 1:
        return (-1.0, 1.0)
    p, a = psi.p[live], np.abs(psi.c[live])

    def excess_right(x):
        return float(np.sum(a[:-1] * np.exp((p[:-1] - p[-1]) * x)) - a[-1] / DOMINANCE)

    def excess_left(x):
        return float(np.sum(a[1:] * np.exp((p[1:] - p[0]) * x)) - a[0] / DOMINANCE)

    def bracket(g, direction):
        x = 0.0
        step = 1.0
        while g(direction * x) > 0:
            x += step
            step *= 2.0
        lo = max(0.0, x - step / 2.0)
        if g(direction * lo) <= 0:
            return direction * lo
        return direction * brentq(lambda u: g(direction * u), lo, x, xtol=1e-9)

    right = bracket(excess_right, 1.0)
    left = bracket(excess_left, -1.0)
    if left >= right:
        left, right = min(left, right) - 1.0, max(left, right) + 1.0
    return (left - 1.0, right + 1.0)


@dataclass(frozen=True)
class ZeroCount:
    count: int
    roots: list[float]
    tangential: list[bool]
    resolution: float
    interval: tuple[float, float]

    @property
    def simple_count(self) -> int:
        return sum(1 for t in self.tangential if not t)

    def to_dict(self) -> dict:
        return {"count": self.count, "roots": list(self.roots), "tangential": list(self.tangential),
                "resolution": self.resolution, "interval": list(self.interval)}


def _isolate(psi, a: float, b: float, points: int) -> list[tuple[float, bool]]:
    """Zeros of ``psi`` on ``[a, b]`` as ``(root, tangential)`` pairs.

    ``exp(-p_0 x) psi`` has the zeros and signs of ``psi`` and a derivative
    with one fewer term. Its critical points (found recursively) are merged
    into the coarse grid, so it is monotone between consecutive nodes and
    each sign change brackets exactly one zero. A critical point with
    ``|psi| <= 1e-9`` (relative) is a zero; it is tangential when ``psi``
    keeps its sign across it.
    """
    d = psi.rolle_derivative() if psi.n > 0 else _ZERO
    crit = [] if d is _ZERO or psi.n == 0 else [r for r, _ in _isolate(d, a, b, points)]
    grid = np.union1d(np.linspace(a, b, points), crit)
    vals = np.asarray(psi.relative(grid), dtype=float)
    at_crit = np.isin(grid, crit)
    vals[at_crit & (np.abs(vals) <= TANGENCY_TOL)] = 0.0
    out = []
    for i in range(grid.size):
        if vals[i] == 0.0:
            left = vals[i - 1] if i > 0 else 0.0
            right = vals[i + 1] if i + 1 < grid.size else 0.0
            out.append((float(grid[i]), bool(left * right > 0)))
        elif i + 1 < grid.size and vals[i] * vals[i + 1] < 0:
            f = lambda u: float(psi.relative(u))
            out.append((float(brentq(f, grid[i], grid[i + 1], xtol=ROOT_XTOL)), False))
    return out


def count_zeros(psi: ExpSum, interval: Optional[tuple[float, float]] = None,
                points: int = COARSE_POINTS) -> ZeroCount:
    """Distinct real zeros of ``Psi`` on ``[a, b]`` (default: :func:`root_window`).

    Zeros are isolated between consecutive critical points and refined by
    bracketing to ``1e-12``. Tangential (even multiplicity) zeros are
    counted once and flagged. Two zeros whose separating extremum has
    ``|Psi| <= 1e-9`` relative to the term magnitudes cannot be told apart
    from one tangential zero and are reported as the latter.
    ``resolution`` is the coarse grid spacing.
    """
    a, b = interval if interval is not None else root_window(psi)
    if not a < b:
        raise ValueError("need a < b")
    found = _isolate(psi, float(a), float(b), int(points))
    res = (b - a) / (int(points) - 1)
    return ZeroCount(len(found), [r for r, _ in found], [t for _, t in found], float(res), (float(a), float(b)))


@dataclass(frozen=True)
class SignPattern:
    alternating: Optional[bool]
    sign_changes_at_roots: Optional[bool]
    skipped: Optional[str] = None

    @property
    def passes(self) -> bool:
        return self.skipped is None and bool(self.alternating) and bool(self.sign_changes_at_roots)

    def to_dict(self) -> dict:
        return {"alternating": self.alternating, "sign_changes_at_roots": self.sign_changes_at_roots,
                "skipped": self.skipped}


def sign_pattern_check(psi: ExpSum, zeros: Optional[ZeroCount] = None) -> SignPattern:
    """For ``Psi`` with exactly ``n`` simple zeros: ``c_i c_{i+1} < 0`` and a sign change at each zero."""
    zc = zeros or count_zeros(psi)
    if any(zc.tangential):
        return SignPattern(None, None, "tangential zero present")
    if zc.count != psi.n:
        return SignPattern(None, None, f"found {zc.count} zeros, need exactly {psi.n}")
    alternating = bool(np.all(psi.c[:-1] * psi.c[1:] < 0))
    r = np.array(zc.roots)
    gaps = np.diff(r)
    s = min(1e-3, float(gaps.min()) / 4.0) if gaps.size else 1e-3
    changes = bool(np.all(psi.relative(r - s) * psi.relative(r + s) < 0)) if r.size else True
    return SignPattern(alternating, changes)


@dataclass(frozen=True)
class FitResult:
    psi: ExpSum
    x0: float
    x1: float
    condition: float
    residual: float

    @property
    def c0(self) -> float:
        return float(self.psi.c[0])

    @property
    def c1(self) -> float:
        return float(self.psi.c[2])

    def to_dict(self) -> dict:
        return {"p": self.psi.p.tolist(), "c": self.psi.c.tolist(), "x0": self.x0, "x1": self.x1,
                "condition": self.condition, "residual": self.residual}


def fit_two_zeros(p0: float, p: float, p1: float, x0: float, x1: float) -> FitResult:
    """Coefficients ``c0, c1`` with ``c0 e^{p0 x} + e^{p x} + c1 e^{p1 x}`` vanishing at ``x0, x1``.

    Each equation is divided by ``e^{p x_k}`` before the 2x2 solve; the
    returned ``condition`` is that of the scaled system.
    """
    if not p0 < p < p1:
        raise ValueError("need p0 < p < p1")
    if x0 == x1:
        raise ValueError("need x0 != x1")
    x0, x1 = sorted((float(x0), float(x1)))
    xs = np.array([x0, x1])
    M = np.column_stack([np.exp((p0 - p) * xs), np.exp((p1 - p) * xs)])
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > 1e15:
        raise InvariantViolation(f"2x2 system singular (cond {cond:.3g}) despite distinct zeros")
    c0, c1 = np.linalg.solve(M, -np.ones(2))
    psi = ExpSum([p0, p, p1], [c0, 1.0, c1])
    resid = float(np.max(np.abs(psi.relative(xs))))
    return FitResult(psi, x0, x1, cond, resid)


def positivity_violations(fit: FitResult, probes: int = 1000, margin: Optional[float] = None) -> int:
    """Probe points where the sign differs from ``(-, +, -)`` around ``(x0, x1)``.

    The grid spans ``[x0 - w, x1 + w]`` with ``w = x1 - x0``; points within
    ``margin`` (default ``1e-9 (1 + w)``) of a zero are skipped.
    """
    x0, x1 = fit.x0, fit.x1
    w = x1 - x0
    margin = 1e-9 * (1.0 + w) if margin is None else margin
    grid = np.linspace(x0 - w, x1 + w, int(probes))
    keep = (np.abs(grid - x0) > margin) & (np.abs(grid - x1) > margin)
    g = grid[keep]
    want = np.where((g > x0) & (g < x1), 1.0, -1.0)
    return int(np.sum(np.sign(fit.psi.relative(g)) != want))
