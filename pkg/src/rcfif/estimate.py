"""Arithmetic-mean (three point) estimates of derivative parameters."""

import numpy as np

from .core import HermiteData, InvalidDataError


def arithmetic_mean_derivatives(x, y) -> np.ndarray:
    """Three point difference estimates of the slopes at the knots.

    Interior knots take the h-weighted mean of the neighbouring chord
    slopes; the end values extrapolate from the first (last) three points.
    No clamping is applied, so the estimates may violate a shape's
    necessary conditions.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InvalidDataError("x and y must be one-dimensional and of equal length")
    if len(x) < 3:
        raise InvalidDataError("derivative estimation needs at least three knots")
    h = np.diff(x)
    if np.any(h <= 0):
        raise InvalidDataError("knots must be strictly increasing")
    delta = np.diff(y) / h

    d = np.empty_like(x)
    d[1:-1] = (h[1:] * delta[:-1] + h[:-1] * delta[1:]) / (h[:-1] + h[1:])
    left = (y[2] - y[0]) / (x[2] - x[0])
    d[0] = (1.0 + h[0] / h[1]) * delta[0] - (h[0] / h[1]) * left
    right = (y[-1] - y[-3]) / (x[-1] - x[-3])
    d[-1] = (1.0 + h[-1] / h[-2]) * delta[-1] - (h[-1] / h[-2]) * right
    return d


def with_estimated_derivatives(x, y) -> HermiteData:
    return HermiteData(x, y, arithmetic_mean_derivatives(x, y))
