"""Small shared numerical helpers (interpolated widths, peak refinement)."""

from __future__ import annotations

import numpy as np


def _interp_cross(x0, y0, x1, y1, level):
    if y1 == y0:
        return x0
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def crossing_width(x, y, level: float, relative: bool = True) -> float:
    """Width of the contiguous region around the global maximum where y >= level.

    ``level`` is a fraction of the maximum when ``relative``.  Edges are found
    by linear interpolation between samples.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    i0 = int(np.argmax(y))
    thr = level * y[i0] if relative else level
    if y[i0] < thr:
        raise ValueError("maximum is below the requested level")
    i = i0
    while i > 0 and y[i - 1] >= thr:
        i -= 1
    if i == 0:
        raise ValueError("pattern does not fall below the level on the left")
    left = _interp_cross(x[i - 1], y[i - 1], x[i], y[i], thr)
    j = i0
    while j < len(y) - 1 and y[j + 1] >= thr:
        j += 1
    if j == len(y) - 1:
        raise ValueError("pattern does not fall below the level on the right")
    right = _interp_cross(x[j], y[j], x[j + 1], y[j + 1], thr)
    return float(right - left)


def local_maxima(y) -> np.ndarray:
    """Indices of strict interior local maxima (plateaus count once)."""
    y = np.asarray(y, float)
    d = np.diff(y)
    up = np.concatenate(([False], d > 0))
    down = np.concatenate((d < 0, [False]))
    return np.flatnonzero(up & down)


def refine_peak(x, y, i: int) -> tuple[float, float]:
    """Sub-sample peak position and height by a parabola through 3 samples."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return float(x[i]), float(y1)
    p = 0.5 * (y0 - y2) / den
    h = x[i + 1] - x[i]
    return float(x[i] + p * h), float(y1 - 0.25 * (y0 - y2) * p)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, float))
    ly = np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])
