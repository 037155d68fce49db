"""Peak picking shared by the ridge tracker, spectrum reader and CS resolver."""

from __future__ import annotations

from typing import Tuple

import numpy as np


def parabolic_offset(y: np.ndarray, i: int) -> Tuple[float, float]:
    """Three-point parabolic refinement around index ``i``.

    Returns (offset in bins, refined height).  Edge bins and flat tops are not
    refined.
    """
    if i <= 0 or i >= len(y) - 1:
        return 0.0, float(y[i])
    a, b, c = float(y[i - 1]), float(y[i]), float(y[i + 1])
    denom = a - 2 * b + c
    if denom == 0:
        return 0.0, b
    p = 0.5 * (a - c) / denom
    p = min(0.5, max(-0.5, p))
    return p, b - 0.25 * (a - c) * p


def local_maxima(y: np.ndarray, threshold: float = 0.0) -> np.ndarray:
    """Indices of local maxima with y >= threshold, in ascending index order.

    A plateau counts once, at its first index.  End points qualify when they
    exceed their single neighbour.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if n == 0:
        return np.array([], dtype=int)
    if n == 1:
        return np.array([0]) if y[0] >= threshold else np.array([], dtype=int)
    left = np.empty(n, dtype=bool)
    right = np.empty(n, dtype=bool)
    left[0] = True
    left[1:] = y[1:] > y[:-1]
    # plateau handling: look right past equal values
    right[-1] = True
    right[:-1] = y[:-1] >= y[1:]
    cand = np.flatnonzero(left & right & (y >= threshold))
    keep = []
    for i in cand:
        j = i
        while j + 1 < n and y[j + 1] == y[i]:
            j += 1
        if j + 1 == n or y[j + 1] < y[i]:
            keep.append(i)
    return np.array(keep, dtype=int)
