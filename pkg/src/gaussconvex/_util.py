from __future__ import annotations

import io
import math
from typing import Iterable, Sequence

import numpy as np


def second_differences(x, y) -> np.ndarray:
    """Second differences of ``y`` over a possibly nonuniform grid ``x``.

    Entry ``i`` belongs to the interior point ``x[i+1]`` and equals twice the
    gap between the chord through the neighbours and ``y[i+1]``; on a
    uniform grid this is ``y[i] - 2 y[i+1] + y[i+2]``. Windows touching a
    non-finite value give NaN.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        return np.empty(0)
    a, b, c = x[:-2], x[1:-1], x[2:]
    ya, yb, yc = y[:-2], y[1:-1], y[2:]
    with np.errstate(invalid="ignore"):
        chord = ((c - b) * ya + (b - a) * yc) / (c - a)
        sd = 2.0 * (chord - yb)
    uniform = np.isclose(b - a, c - b, rtol=1e-9, atol=0.0)
    with np.errstate(invalid="ignore"):
        sd = np.where(uniform, ya - 2.0 * yb + yc, sd)
    finite = np.isfinite(ya) & np.isfinite(yb) & np.isfinite(yc)
    return np.where(finite, sd, np.nan)


def fmt(v) -> str:
    """17-significant-digit float formatting; integers and strings pass through."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def to_csv(columns: Sequence[str], rows: Iterable[Sequence], header_lines: Sequence[str] = ()) -> str:
    out = io.StringIO(newline="")
    for line in header_lines:
        out.write(f"# {line}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj
