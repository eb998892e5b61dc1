"""Reference datasets and random generators shared by the tests."""

import numpy as np

from rcfif import HermiteData

MONO_X = [0.0, 2.0, 3.0, 9.0, 11.0]
MONO_Y = [0.0, 4.0, 7.0, 9.0, 13.0]
MONO_D = [1.3333, 2.6666, 2.6190, 1.5833, 2.4166]
MONO = HermiteData(MONO_X, MONO_Y, MONO_D)

# alpha / r pairs of the reference monotone curves
MONO_REF_ALPHA = [0.18, 0.09, 0.1, 0.18]
MONO_REF_R = [2.0, 1.8, 31.0, 0.5]
MONO_QUAD_ALPHA = [0.001, 0.0, 0.08, 0.001]
MONO_QUAD_R = [2.9961, 2.7619, 23.8269, 2.9961]

CONVEX_X = [2.2, 4.0, 5.0, 10.0, 10.22]
CONVEX_Y = [2.0, 0.625, 0.4, 1.0, 1.8]
CONVEX_D = [-1.1103174603, -0.4174603175, -0.1675, 3.4881644027, 3.7845628701]
CONVEX_STEEP_ALPHA = [0.02, 0.001, 0.16, 0.007]

# up-down-up data split into three monotone runs
MIXED_X = [0.0, 1.5, 4.0, 6.0, 8.0, 10.0]
MIXED_Y = [10.0, 5.0, 3.5, 7.1, 3.0, 0.0]
MIXED_D_WITH_NODE = [-4.35, -2.31, 0.0, 1.8, 0.0, -1.77, -1.2]


def _knots(rng, n):
    gaps = rng.uniform(0.2, 2.0, n - 1)
    x0 = rng.uniform(-3.0, 3.0)
    return x0 + np.concatenate([[0.0], np.cumsum(gaps)])


def random_monotone(rng, n=None):
    """Strictly increasing data with nonnegative derivatives."""
    n = n or int(rng.integers(3, 9))
    x = _knots(rng, n)
    y = rng.uniform(-5, 5) + np.concatenate([[0.0], np.cumsum(rng.uniform(0.05, 3.0, n - 1))])
    delta = np.diff(y) / np.diff(x)
    near = np.concatenate([[delta[0]], np.sqrt(delta[:-1] * delta[1:]), [delta[-1]]])
    d = near * rng.uniform(0.0, 2.5, n)
    d[rng.random(n) < 0.1] = 0.0
    return HermiteData(x, y, d)


def random_convex(rng, n=None, increasing=False):
    """Strictly convex data with d_1 < slope_1 < d_2 < ... < d_N."""
    n = n or int(rng.integers(3, 9))
    x = _knots(rng, n)
    start = rng.uniform(0.05, 1.0) if increasing else rng.uniform(-4.0, 2.0)
    delta = start + np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 2.0, n - 2))])
    y = rng.uniform(-5, 5) + np.concatenate([[0.0], np.cumsum(delta * np.diff(x))])
    d = np.empty(n)
    w = rng.uniform(0.1, 0.9, n - 2)
    d[1:-1] = delta[:-1] + w * (delta[1:] - delta[:-1])
    low = delta[0] * rng.uniform(0.05, 0.95) if increasing else delta[0] - rng.uniform(0.05, 1.0)
    d[0] = low
    d[-1] = delta[-1] + rng.uniform(0.05, 1.0)
    return HermiteData(x, y, d)


def random_positive(rng, n=None):
    n = n or int(rng.integers(3, 9))
    x = _knots(rng, n)
    y = rng.uniform(0.2, 5.0, n)
    d = rng.uniform(-3.0, 3.0, n)
    return HermiteData(x, y, d)


def random_model_params(rng, data, t=None):
    """Random admissible unconstrained parameters (|alpha_i| < a_i, r_i > -1)."""
    t = rng.uniform(-0.95, 0.95, data.intervals) if t is None else t
    alpha = t * 0.999 * data.a
    r = rng.uniform(-0.9, 40.0, data.intervals)
    return alpha, r
