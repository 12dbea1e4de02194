"""Convex hulls and discrete Legendre transforms on 1-D grids."""
from __future__ import annotations

import numpy as np


def lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points ``(x_i, y_i)`` (``x`` increasing).

    Andrew's monotone chain restricted to the lower chain.
    """
    idx: list[int] = []
    for i in range(len(x)):
        while len(idx) >= 2:
            i0, i1 = idx[-2], idx[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross <= 0:
                idx.pop()
            else:
                break
        idx.append(i)
    return np.array(idx, dtype=int)


def convex_envelope(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Largest convex function below the samples, evaluated on ``x``."""
    h = lower_hull(x, y)
    return np.interp(x, x[h], y[h])


def legendre(x: np.ndarray, phi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``max_i (x_i y - phi_i)`` for each ``y`` (exact over the grid points)."""
    h = lower_hull(x, phi)
    xs, ps = x[h], phi[h]
    if len(xs) == 1:
        return xs[0] * y - ps[0]
    slopes = np.diff(ps) / np.diff(xs)
    k = np.searchsorted(slopes, y, side="left")
    return xs[k] * y - ps[k]


def is_convex(x: np.ndarray, y: np.ndarray, tol: float = 1e-10) -> bool:
    slopes = np.diff(y) / np.diff(x)
    return bool(np.all(np.diff(slopes) >= -tol))
