"""Evaluation of S and S' by address expansion, and exact attractor sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FifError, RationalCubicFif

DEFAULT_POINT_BUDGET = 5_000_000


class ToleranceNotMetError(FifError):
    def __init__(self, bound, tol, max_depth):
        self.bound = bound
        self.tol = tol
        self.max_depth = max_depth
        super().__init__(
            f"certified error {bound:.3e} exceeds tolerance {tol:.3e} after {max_depth} levels"
        )


class SampleBudgetError(FifError):
    pass


@dataclass(frozen=True)
class EvalSettings:
    tol: float = 1e-10
    max_depth: int = 10_000
    base: str = "linear"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.base != "linear":
            raise ValueError(f"unknown base approximation {self.base!r}")


@dataclass(frozen=True)
class Evaluation:
    """Values with certified absolute error bounds and recursion depths."""

    value: np.ndarray
    bound: np.ndarray
    depth: np.ndarray


@dataclass(frozen=True)
class CurveSample:
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray | None
    depth: int
    generation: np.ndarray
    exact: bool = True

    def __len__(self):
        return len(self.x)


def _knot_snap(knots, x, atol):
    """Index of the knot within ``atol`` (scalar or per point) of each x, or -1."""
    j = np.clip(np.searchsorted(knots, x), 0, len(knots) - 1)
    jl = np.maximum(j - 1, 0)
    near = np.where(np.abs(knots[jl] - x) < np.abs(knots[j] - x), jl, j)
    return np.where(np.abs(knots[near] - x) <= atol, near, -1)


def evaluate(fif: RationalCubicFif, x, settings: EvalSettings | None = None,
             *, derivative: bool = False) -> Evaluation:
    """Evaluate S (or S') at ``x`` with a certified error bound.

    Each level maps the point back through L_i^{-1} of its interval and
    accumulates the inhomogeneous term weighted by the running product of
    scaling factors.  When that product times a bound on |S - base| drops
    below the tolerance, the remainder is approximated by the piecewise
    linear interpolant of the knot values (or knot derivatives).

    The bound covers truncation only.  Rounding in L_i^{-1} grows by 1/a_i
    per level; knot snapping tracks that growth so that knot images resolve
    exactly, but S' with alpha_i/a_i near one is ill-conditioned elsewhere.
    """
    settings = settings or EvalSettings()
    data = fif.data
    knots = data.x
    eps = np.finfo(float).eps
    atol = 8.0 * eps * max(abs(knots[0]), abs(knots[-1]), data.span)
    x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    if np.any((x < knots[0] - atol) | (x > knots[-1] + atol)) or not np.all(np.isfinite(x)):
        raise FifError(f"evaluation points must lie in [{knots[0]}, {knots[-1]}]")
    x = np.clip(x, knots[0], knots[-1])

    if derivative:
        knot_vals = data.d
        factor = fif.alpha / fif.scale
        piece = fif.piece_slope
        spread = fif.slope_bound() + np.max(np.abs(data.d))
    else:
        knot_vals = data.y
        factor = fif.alpha
        piece = fif.piece
        spread = fif.value_bound() + np.max(np.abs(data.y))

    cap = 1e-9 * data.span
    last = data.intervals - 1
    acc = np.zeros_like(x)
    prod = np.ones_like(x)
    bound = np.zeros_like(x)
    depth = np.zeros(len(x), dtype=int)
    active = np.arange(len(x))
    cur = x
    slack = np.full(len(x), atol)

    for _ in range(settings.max_depth):
        if active.size == 0:
            break
        xc = cur[active]
        hit = _knot_snap(knots, xc, slack[active])
        on_knot = hit >= 0
        if on_knot.any():
            idx = active[on_knot]
            acc[idx] += prod[idx] * knot_vals[hit[on_knot]]
            active, xc = active[~on_knot], xc[~on_knot]
            if active.size == 0:
                break
        i = np.clip(np.searchsorted(knots, xc, side="right") - 1, 0, last)
        xp = np.clip(fif.L_inv(i, xc), knots[0], knots[-1])
        # position error carried through the inverse map
        slack[active] = np.minimum(slack[active] / fif.scale[i] + atol, np.maximum(cap, atol))
        snapped = _knot_snap(knots, xp, slack[active])
        xp = np.where(snapped >= 0, knots[np.maximum(snapped, 0)], xp)
        theta = fif.theta(xp)
        acc[active] += prod[active] * piece(i, theta)
        prod[active] *= factor[i]
        depth[active] += 1
        cur = cur.copy()
        cur[active] = xp
        err = np.abs(prod[active]) * spread
        done = err <= settings.tol
        if done.any():
            idx = active[done]
            acc[idx] += prod[idx] * np.interp(cur[idx], knots, knot_vals)
            bound[idx] = err[done]
            active = active[~done]

    if active.size:
        acc[active] += prod[active] * np.interp(cur[active], knots, knot_vals)
        bound[active] = np.abs(prod[active]) * spread
    return Evaluation(acc, bound, depth)


def _point_query(fif, x, settings, derivative):
    settings = settings or EvalSettings()
    res = evaluate(fif, x, settings, derivative=derivative)
    worst = float(res.bound.max())
    if worst > settings.tol:
        raise ToleranceNotMetError(worst, settings.tol, settings.max_depth)
    if np.ndim(x) == 0:
        return float(res.value[0])
    return res.value


def eval_at(fif: RationalCubicFif, x, settings: EvalSettings | None = None):
    """S(x) to within ``settings.tol``; scalar in, scalar out."""
    return _point_query(fif, x, settings, derivative=False)


def eval_derivative_at(fif: RationalCubicFif, x, settings: EvalSettings | None = None):
    """S'(x) to within ``settings.tol``."""
    return _point_query(fif, x, settings, derivative=True)


def sample_size(n_knots: int, depth: int) -> int:
    return (n_knots - 1) ** (depth + 1) + 1


def sample_attractor(fif: RationalCubicFif, depth: int, *, derivatives: bool = True,
                     budget: int = DEFAULT_POINT_BUDGET) -> CurveSample:
    """Exact graph points of S (and S') after ``depth`` applications of the IFS.

    Starting from the knots, every level applies all maps
    (x, v) -> (L_i(x), alpha_i v + R_i(x)).  Because the maps are order
    preserving and their images tile the domain, concatenating the images in
    interval order yields a sorted set once the shared endpoints are dropped.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    data = fif.data
    m = data.intervals
    size = sample_size(data.n, depth)
    if size > budget:
        raise SampleBudgetError(
            f"depth {depth} needs {size} points, exceeding the budget of {budget}"
        )

    i = np.arange(m)[:, None]
    xs, vs = data.x.copy(), data.y.copy()
    ds = data.d.copy() if derivatives else None
    gen = np.zeros(len(xs), dtype=int)
    slope_factor = (fif.alpha / fif.scale)[:, None]

    for _ in range(depth):
        theta = fif.theta(xs)[None, :]
        nx = fif.scale[:, None] * xs[None, :] + fif.shift[:, None]
        nv = fif.alpha[:, None] * vs[None, :] + fif.piece(i, theta)
        ng = np.broadcast_to(gen + 1, nx.shape).copy()
        # block ends are knots: pin them to the exact data
        nx[:, 0], nx[:, -1] = data.x[:-1], data.x[1:]
        nv[:, 0], nv[:, -1] = data.y[:-1], data.y[1:]
        ng[:, 0] = ng[:, -1] = 0
        if derivatives:
            nd = slope_factor * ds[None, :] + fif.piece_slope(i, theta)
            nd[:, 0], nd[:, -1] = data.d[:-1], data.d[1:]
            ds = np.concatenate([nd[0], nd[1:, 1:].ravel()])
        xs = np.concatenate([nx[0], nx[1:, 1:].ravel()])
        vs = np.concatenate([nv[0], nv[1:, 1:].ravel()])
        gen = np.concatenate([ng[0], ng[1:, 1:].ravel()])

    keep = np.concatenate([[True], np.diff(xs) > 1e-14])
    if not keep.all():
        xs, vs, gen = xs[keep], vs[keep], gen[keep]
        if derivatives:
            ds = ds[keep]
    return CurveSample(xs, vs, ds, depth, gen)


def second_derivative_right_at_knots(fif: RationalCubicFif) -> np.ndarray:
    """Right-hand S'' at x_1..x_{N-1}, followed by the left-hand limit at x_N."""
    a2 = fif.scale**2
    ratio = fif.alpha / a2
    bad = np.flatnonzero(ratio >= 1.0)
    if bad.size:
        k = int(bad[0])
        raise FifError(
            f"alpha_{k + 1} = {fif.alpha[k]:.6g} >= a_{k + 1}^2 = {a2[k]:.6g}; "
            "one-sided second derivatives are not defined by the knot formula"
        )
    h = fif.data.h
    As, Ds = fif.curv_num[0], fif.curv_num[3]
    out = np.empty(fif.data.n)
    out[0] = 2.0 * Ds[0] / h[0] / (1.0 - ratio[0])
    out[1:-1] = ratio[1:] * out[0] + 2.0 * Ds[1:] / h[1:]
    out[-1] = 2.0 * As[-1] / h[-1] / (1.0 - ratio[-1])
    return out
