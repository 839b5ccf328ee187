"""Composite Simpson quadrature on uniform grids.

`simpson_weights` returns the classic 1-4-2-...-4-1 weight vector for an
even number of segments.  `composite_simpson` additionally accepts an odd
segment count, closing the last three segments with the Simpson 3/8 rule
so fourth-order accuracy is kept.
"""

from __future__ import annotations

import numpy as np


def simpson_weights(n_segments: int, h: float) -> np.ndarray:
    """Weights w such that sum(w * f(nodes)) is the composite Simpson value."""
    if n_segments < 2 or n_segments % 2:
        raise ValueError(f"composite Simpson needs an even segment count >= 2, got {n_segments}")
    w = np.full(n_segments + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def composite_simpson(values: np.ndarray, h: float) -> float:
    """Integrate uniformly sampled values; odd segment counts use a 3/8 tail."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    if n < 1:
        raise ValueError("need at least two samples")
    if n == 1:
        return 0.5 * h * float(values[0] + values[1])
    if n % 2 == 0:
        return float(simpson_weights(n, h) @ values)
    if n == 3:
        return 0.375 * h * float(values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3])
    head = float(simpson_weights(n - 3, h) @ values[: n - 2])
    tail = 0.375 * h * float(values[-4] + 3.0 * values[-3] + 3.0 * values[-2] + values[-1])
    return head + tail
