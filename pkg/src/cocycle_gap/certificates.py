"""Affine lower-bound certificates fitted by linear programming.

Given nonnegative samples v_n at integer lengths n, the certificate is the
pair (C, C') with C maximal such that

    C*n - C' <= v_n   for every scanned n,
    0 <= C' <= h*C,

where h is the midpoint of the scanned range.  The cap on C' keeps the
program bounded and forces the affine bound to be positive on the latter
half of the window, so a large C cannot be bought with a vacuously large
intercept.  Among the maximizers of C, the smallest feasible C' is reported.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog


def affine_certificate(lengths, values) -> tuple[float, float]:
    """Best affine lower bound C*n - C' for the given (length, value) data.

    Returns (C, C').  Requires at least one length strictly beyond the
    midpoint horizon (guaranteed for scans reaching length 2 or more).
    """
    lengths = np.asarray(lengths, dtype=float)
    values = np.asarray(values, dtype=float)
    if lengths.size == 0:
        raise ValueError("no data to fit")
    if np.any(values < 0):
        raise ValueError("values must be nonnegative")
    horizon = max(1.0, float(int(lengths.max()) // 2))
    if not np.any(lengths > horizon):
        raise ValueError("need a scanned length beyond the midpoint horizon")
    # variables x = (C, C'); maximize C
    a_ub = np.column_stack([lengths, -np.ones_like(lengths)])
    a_ub = np.vstack([a_ub, [-horizon, 1.0]])
    b_ub = np.concatenate([values, [0.0]])
    result = linprog(c=[-1.0, 0.0], A_ub=a_ub, b_ub=b_ub,
                     bounds=[(0.0, None), (0.0, None)], method="highs")
    if not result.success:
        raise RuntimeError(f"certificate LP failed: {result.message}")
    slope = float(result.x[0])
    # canonical intercept: smallest C' valid for this slope
    intercept = max(0.0, float(np.max(slope * lengths - values)))
    return slope, intercept
