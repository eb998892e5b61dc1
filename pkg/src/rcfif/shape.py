"""Admissible parameter regions for shape-preserving fits, and shape checks.

Decreasing and concave data are handled by negating y and d, running the
increasing/convex formulas, and reporting against the original class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_KAPPA,
    FifError,
    FifParameters,
    HermiteData,
    InfeasibleShapeError,
    RationalCubicFif,
    ShapeClass,
    Violation,
    validate_parameters,
)
from .evaluation import sample_attractor

CONTRACTION = "contraction"
R_RTOL = 1e-9
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class IntervalBound:
    """Upper bound on alpha_i as the minimum of named terms.

    Terms whose denominator vanishes are listed in ``dropped`` instead.
    ``forced_zero`` marks intervals where only alpha_i = 0 is allowed
    (flat intervals for monotone data, straight segments for convex data).
    """

    interval: int
    terms: dict
    dropped: tuple = ()
    forced_zero: bool = False

    @property
    def upper(self) -> float:
        if self.forced_zero:
            return 0.0
        return max(0.0, min(self.terms.values()))

    @property
    def data_upper(self) -> float:
        """Minimum over the data-dependent terms only (contraction term excluded)."""
        if self.forced_zero:
            return 0.0
        rest = [v for k, v in self.terms.items() if k != CONTRACTION]
        return max(0.0, min(rest)) if rest else float("inf")

    @property
    def binding(self) -> str:
        if self.forced_zero:
            return "forced-zero"
        return min(self.terms, key=self.terms.get)


@dataclass(frozen=True)
class RBound:
    lower: np.ndarray
    optimal: np.ndarray
    strict: bool = False


@dataclass(frozen=True)
class BoundsReport:
    shape: ShapeClass
    kappa: float
    intervals: tuple
    r_lower: np.ndarray
    r_optimal: np.ndarray
    r_alpha: np.ndarray
    r_strict: bool = False
    diagnostics: tuple = ()

    @property
    def feasible(self) -> bool:
        return not self.diagnostics

    @property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.intervals])

    @property
    def data_upper(self) -> np.ndarray:
        return np.array([b.data_upper for b in self.intervals])

    @property
    def forced_zero(self) -> np.ndarray:
        return np.array([b.forced_zero for b in self.intervals])

    def admits(self, alpha) -> np.ndarray:
        """Half-open admissibility 0 <= alpha_i < upper_i.

        alpha_i = 0 is always admitted: a zero derivative term only forbids
        positive scaling, and forced-zero intervals allow nothing else.
        """
        alpha = np.asarray(alpha, dtype=float)
        return np.where(self.forced_zero, alpha == 0.0,
                        (alpha == 0.0) | ((alpha > 0.0) & (alpha < self.upper)))

    def notes(self) -> list[str]:
        """Intervals where the contraction term is stricter than the data terms."""
        out = []
        for b in self.intervals:
            if not b.forced_zero and b.data_upper > b.upper:
                out.append(
                    f"interval {b.interval}: data-only bound {b.data_upper:.4f} is above the "
                    f"C1 contraction bound {b.terms[CONTRACTION]:.4f}; both are reported"
                )
        return out

    def to_dict(self) -> dict:
        def num(v):
            return None if not np.isfinite(v) else float(v)

        return {
            "shape": self.shape.value,
            "kappa": self.kappa,
            "feasible": self.feasible,
            "diagnostics": list(self.diagnostics),
            "notes": self.notes(),
            "intervals": [
                {
                    "interval": b.interval,
                    "alpha_upper": b.upper,
                    "alpha_upper_data_only": num(b.data_upper),
                    "binding": b.binding,
                    "forced_zero": b.forced_zero,
                    "terms": {k: float(v) for k, v in b.terms.items()},
                    "dropped": list(b.dropped),
                    "r_lower": num(self.r_lower[b.interval - 1]),
                    "r_optimal": num(self.r_optimal[b.interval - 1]),
                }
                for b in self.intervals
            ],
            "r_alpha": [float(v) for v in self.r_alpha],
            "r_strict": self.r_strict,
        }


def _oriented(data, shape):
    return data.negated() if shape.mirrored else data


def _tol(data):
    scale = abs(data.rise) + np.max(np.abs(data.d)) * data.span + np.max(np.abs(data.y))
    return 1e3 * _EPS * max(scale, 1e-300)


# -- monotonicity ---------------------------------------------------------


def _monotone_diagnostics(data):
    out = []
    delta = data.slopes
    for i in range(data.intervals):
        if delta[i] < 0:
            out.append(f"data decrease on interval {i + 1} (slope {delta[i]:.6g})")
        elif delta[i] == 0 and (data.d[i] != 0 or data.d[i + 1] != 0):
            out.append(
                f"interval {i + 1} is flat but d_{i + 1}={data.d[i]:.6g}, "
                f"d_{i + 2}={data.d[i + 1]:.6g} are not both zero"
            )
    for j in np.flatnonzero(data.d < 0):
        out.append(f"d_{j + 1} = {data.d[j]:.6g} < 0")
    return out


def _monotone_intervals(data, kappa):
    h, delta, a = data.h, data.slopes, data.a
    span, rise = data.span, data.rise
    d1, dN = data.d[0], data.d[-1]
    out = []
    for i in range(data.intervals):
        terms = {CONTRACTION: kappa * a[i]}
        dropped = []
        if d1 != 0:
            terms["left_slope"] = data.d[i] * h[i] / (d1 * span)
        else:
            dropped.append("left_slope")
        if dN != 0:
            terms["right_slope"] = data.d[i + 1] * h[i] / (dN * span)
        else:
            dropped.append("right_slope")
        if rise != 0:
            terms["chord"] = delta[i] * h[i] / rise
        else:
            dropped.append("chord")
        out.append(IntervalBound(i + 1, terms, tuple(dropped), forced_zero=delta[i] == 0))
    return out


def _monotone_r(data, alpha):
    """r bound on increasing-oriented data; flat intervals are unconstrained."""
    alpha = np.asarray(alpha, dtype=float)
    h, delta = data.h, data.slopes
    span, rise = data.span, data.rise
    d = data.d
    num = h * (d[:-1] + d[1:]) - alpha * span * (d[0] + d[-1])
    den = h * delta - alpha * rise
    flat = delta == 0
    bad = np.flatnonzero(~flat & (den <= 0))
    if bad.size:
        k = int(bad[0])
        raise FifError(
            f"alpha_{k + 1} = {alpha[k]:.6g} leaves no admissible r "
            f"(h*slope - alpha*(y_N - y_1) = {den[k]:.3g} <= 0)"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(flat, -1.0, num / np.where(flat, 1.0, den))
    optimal = np.where(flat, 3.0, 1.0 + lower)
    return RBound(lower, optimal)


def monotone_alpha_bounds(data: HermiteData, *, decreasing: bool = False,
                          kappa: float = DEFAULT_KAPPA, alpha=None) -> BoundsReport:
    shape = ShapeClass.MONOTONE_DECREASING if decreasing else ShapeClass.MONOTONE_INCREASING
    work = _oriented(data, shape)
    intervals = _monotone_intervals(work, kappa)
    diagnostics = _monotone_diagnostics(work)
    return _report(shape, kappa, intervals, diagnostics, work, alpha, _monotone_r)


def monotone_r_bound(data: HermiteData, alpha) -> RBound:
    """Lower bound on r_i for monotonicity and the optimal (rational quadratic) choice.

    The bound is invariant under y, d -> -y, -d, so one routine serves both
    directions.
    """
    work = data.negated() if data.rise < 0 else data
    return _monotone_r(work, alpha)


# -- convexity --------------------------------------------------------------


def _linear_interval(data, i, tol):
    delta = data.slopes[i]
    return abs(data.d[i] - delta) <= tol and abs(data.d[i + 1] - delta) <= tol


def _convex_diagnostics(data):
    out = []
    delta = data.slopes
    tol = _tol(data) / data.span
    for i in range(data.intervals):
        if _linear_interval(data, i, tol):
            continue
        if not (data.d[i] < delta[i] < data.d[i + 1]):
            out.append(
                f"interval {i + 1}: need d_{i + 1} < slope < d_{i + 2}, got "
                f"{data.d[i]:.6g}, {delta[i]:.6g}, {data.d[i + 1]:.6g}"
            )
    return out


def _convex_intervals(data, kappa):
    h, delta, a = data.h, data.slopes, data.a
    span, rise = data.span, data.rise
    right = data.d[-1] * span - rise
    left = rise - data.d[0] * span
    tol = _tol(data)
    out = []
    for i in range(data.intervals):
        terms = {CONTRACTION: kappa * a[i] ** 2}
        dropped = []
        if abs(right) > tol:
            terms["right_gap"] = h[i] * (data.d[i + 1] - delta[i]) / right
        else:
            dropped.append("right_gap")
        if abs(left) > tol:
            terms["left_gap"] = h[i] * (delta[i] - data.d[i]) / left
        else:
            dropped.append("left_gap")
        linear = _linear_interval(data, i, tol / span)
        out.append(IntervalBound(i + 1, terms, tuple(dropped), forced_zero=linear))
    return out


def _convex_gaps(data, alpha):
    alpha = np.asarray(alpha, dtype=float)
    g = alpha / data.h
    span, rise = data.span, data.rise
    delta = data.slopes
    right = data.d[1:] - delta - g * (data.d[-1] * span - rise)
    left = delta - data.d[:-1] - g * (rise - data.d[0] * span)
    return right, left


def _convex_r(data, alpha):
    right, left = _convex_gaps(data, alpha)
    big = np.maximum(right, left)
    small = np.minimum(right, left)
    tol = _tol(data) / data.span
    linear = np.array([_linear_interval(data, i, tol) for i in range(data.intervals)])
    bad = np.flatnonzero(~linear & (small <= 0))
    if bad.size:
        k = int(bad[0])
        raise FifError(
            f"alpha_{k + 1} = {np.asarray(alpha)[k]:.6g} leaves no admissible r "
            f"(min gap {small[k]:.3g} <= 0)"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(linear, 1.0, big / np.where(linear, 1.0, small))
    lower = np.where(linear, -1.0, 1.0 + ratio)
    optimal = np.where(linear, 3.0, 1.0 + ratio + 1.0 / ratio)
    return RBound(lower, optimal)


def convex_alpha_bounds(data: HermiteData, *, concave: bool = False,
                        kappa: float = DEFAULT_KAPPA, alpha=None) -> BoundsReport:
    shape = ShapeClass.CONCAVE if concave else ShapeClass.CONVEX
    work = _oriented(data, shape)
    intervals = _convex_intervals(work, kappa)
    diagnostics = _convex_diagnostics(work)
    return _report(shape, kappa, intervals, diagnostics, work, alpha, _convex_r)


def convex_r_bound(data: HermiteData, alpha, *, concave: bool = False) -> RBound:
    """r_i >= 1 + M_i/m_i for convexity; optimal r_i = 1 + M_i/m_i + m_i/M_i."""
    return _convex_r(data.negated() if concave else data, alpha)


# -- positivity ---------------------------------------------------------------


def _positive_r(data, alpha):
    alpha = np.asarray(alpha, dtype=float)
    h, span, y, d = data.h, data.span, data.y, data.d
    left_den = y[:-1] - alpha * y[0]
    right_den = y[1:] - alpha * y[-1]
    if np.any(left_den <= 0) or np.any(right_den <= 0):
        raise FifError("alpha too large for positivity: y_i - alpha_i y_1 or "
                       "y_{i+1} - alpha_i y_N is not positive")
    left = (-h * d[:-1] + alpha * d[0] * span) / left_den
    right = (h * d[1:] - alpha * d[-1] * span) / right_den
    lower = np.maximum(-1.0, np.maximum(left, right))
    optimal = np.maximum(3.0, lower + 1.0)
    return RBound(lower, optimal, strict=True)


def positivity_bounds(data: HermiteData, *, kappa: float = DEFAULT_KAPPA,
                      alpha=None) -> BoundsReport:
    y = data.y
    diagnostics = [f"y_{j + 1} = {y[j]:.6g} is not positive" for j in np.flatnonzero(y <= 0)]
    intervals = []
    for i in range(data.intervals):
        terms = {CONTRACTION: kappa * data.a[i]}
        dropped = []
        if y[0] > 0:
            terms["left_value"] = y[i] / y[0]
        else:
            dropped.append("left_value")
        if y[-1] > 0:
            terms["right_value"] = y[i + 1] / y[-1]
        else:
            dropped.append("right_value")
        intervals.append(IntervalBound(i + 1, terms, tuple(dropped)))
    return _report(ShapeClass.POSITIVE, kappa, intervals, diagnostics, data, alpha,
                   _positive_r, strict=True)


def _report(shape, kappa, intervals, diagnostics, work, alpha, r_rule, strict=False):
    m = work.intervals
    alpha = np.zeros(m) if alpha is None else np.asarray(alpha, dtype=float)
    if diagnostics:
        lower = optimal = np.full(m, np.nan)
    else:
        rb = r_rule(work, alpha)
        lower, optimal = rb.lower, rb.optimal
    return BoundsReport(shape, kappa, tuple(intervals), lower, optimal, alpha,
                        strict, tuple(diagnostics))


# -- dispatch ------------------------------------------------------------------


def alpha_bounds(data: HermiteData, shape: ShapeClass, *, kappa: float = DEFAULT_KAPPA,
                 alpha=None) -> BoundsReport:
    shape = ShapeClass(shape)
    if shape in (ShapeClass.MONOTONE_INCREASING, ShapeClass.MONOTONE_DECREASING):
        return monotone_alpha_bounds(
            data, decreasing=shape is ShapeClass.MONOTONE_DECREASING, kappa=kappa, alpha=alpha)
    if shape in (ShapeClass.CONVEX, ShapeClass.CONCAVE):
        return convex_alpha_bounds(
            data, concave=shape is ShapeClass.CONCAVE, kappa=kappa, alpha=alpha)
    if shape is ShapeClass.CONVEX_MONOTONE_INCREASING:
        rep = convex_alpha_bounds(data, kappa=kappa, alpha=alpha)
        extra = []
        if data.d[0] < 0:
            extra.append(f"d_1 = {data.d[0]:.6g} < 0")
        extra += [f"data not strictly increasing on interval {i + 1}"
                  for i in np.flatnonzero(data.slopes <= 0)]
        return BoundsReport(shape, rep.kappa, rep.intervals, rep.r_lower, rep.r_optimal,
                            rep.r_alpha, rep.r_strict, rep.diagnostics + tuple(extra))
    if shape is ShapeClass.POSITIVE:
        return positivity_bounds(data, kappa=kappa, alpha=alpha)
    intervals = tuple(IntervalBound(i + 1, {CONTRACTION: kappa * data.a[i]})
                      for i in range(data.intervals))
    m = data.intervals
    alpha = np.zeros(m) if alpha is None else np.asarray(alpha, dtype=float)
    return BoundsReport(shape, kappa, intervals, np.full(m, -1.0), np.full(m, 3.0),
                        alpha, True)


def r_bound(data: HermiteData, shape: ShapeClass, alpha) -> RBound:
    shape = ShapeClass(shape)
    if shape in (ShapeClass.MONOTONE_INCREASING, ShapeClass.MONOTONE_DECREASING):
        return _monotone_r(_oriented(data, shape), alpha)
    if shape in (ShapeClass.CONVEX, ShapeClass.CONCAVE, ShapeClass.CONVEX_MONOTONE_INCREASING):
        return convex_r_bound(data, alpha, concave=shape is ShapeClass.CONCAVE)
    if shape is ShapeClass.POSITIVE:
        return _positive_r(data, alpha)
    m = data.intervals
    return RBound(np.full(m, -1.0), np.full(m, 3.0), strict=True)


def select_parameters(data: HermiteData, shape: ShapeClass, t: float = 0.5, r=None,
                      *, kappa: float = DEFAULT_KAPPA) -> FifParameters:
    """Pick alpha_i = t * (upper bound) and the optimal (or a checked user) r."""
    shape = ShapeClass(shape)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"fractality dial t must lie in [0, 1), got {t}")
    report = alpha_bounds(data, shape, kappa=kappa)
    if not report.feasible:
        raise InfeasibleShapeError(shape, report.diagnostics)
    alpha = t * report.upper
    rb = r_bound(data, shape, alpha)
    if r is None:
        chosen = rb.optimal
    else:
        chosen = np.broadcast_to(np.asarray(r, dtype=float), alpha.shape).copy()
        low = _r_violations(chosen, rb)
        if low:
            raise FifError("user shape parameters below the lower bound: " + "; ".join(
                v.message for v in low))
    return FifParameters(alpha, chosen, kappa)


def _r_violations(r, rb):
    out = []
    for i, (ri, lo) in enumerate(zip(r, rb.lower)):
        # the optimal choices sit on non-strict bounds, so allow rounding there
        ok = ri > lo if rb.strict else ri >= lo - R_RTOL * max(1.0, abs(lo))
        if not ok:
            rel = ">" if rb.strict else ">="
            out.append(Violation(i + 1, "r", float(ri), float(lo),
                                 f"r_{i + 1} = {ri:.6g} must be {rel} {lo:.6g}"))
    return out


def check_shape_parameters(data: HermiteData, params: FifParameters,
                           shape: ShapeClass) -> list[Violation]:
    """All constraints (C1 admissibility plus the shape's sufficient conditions)."""
    shape = ShapeClass(shape)
    out = validate_parameters(data, params)
    if out or shape is ShapeClass.UNCONSTRAINED:
        return out
    report = alpha_bounds(data, shape, kappa=params.kappa)
    out += [Violation(None, "necessary", np.nan, np.nan, msg) for msg in report.diagnostics]
    if out:
        return out
    ok = report.admits(params.alpha)
    for b, good, al in zip(report.intervals, ok, params.alpha):
        if not good:
            limit = "= 0" if b.forced_zero else f"in [0, {b.upper:.6g})"
            out.append(Violation(b.interval, "alpha", float(al), b.upper,
                                 f"alpha_{b.interval} = {al:.6g} must be {limit}"))
    if out:
        return out
    return _r_violations(params.r, r_bound(data, shape, params.alpha))


# -- verification ----------------------------------------------------------------


@dataclass(frozen=True)
class ShapeCheck:
    passed: bool
    shape: ShapeClass
    depth: int
    points: int
    witness: tuple | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "shape": self.shape.value,
            "depth": self.depth,
            "points": self.points,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "detail": self.detail,
        }


def _first_drop(x, v, tol):
    bad = np.flatnonzero(np.diff(v) < -tol)
    if bad.size:
        k = int(bad[0])
        return (x[k], x[k + 1]), f"S drops by {v[k] - v[k + 1]:.3e} between the witnesses"
    return None, ""


def _first_bend(x, v, tol):
    dx = np.diff(x)
    dv = np.diff(v)
    slope = dv / dx
    # chord slopes carry rounding error of order eps * |values| / dx
    err = 16.0 * _EPS * (np.abs(v[:-1]) + np.abs(v[1:])
                         + np.abs(slope) * (np.abs(x[:-1]) + np.abs(x[1:]))) / dx
    jump = np.diff(slope)
    bad = np.flatnonzero(jump < -(tol + err[:-1] + err[1:]))
    if bad.size:
        k = int(bad[0])
        return (x[k], x[k + 2]), (
            f"chord slope decreases by {-jump[k]:.3e} across [{x[k]:.6g}, {x[k + 2]:.6g}]")
    return None, ""


def verify_shape(fif: RationalCubicFif, shape: ShapeClass, depth: int = 6,
                 tol: float = 1e-10) -> ShapeCheck:
    """Check the shape on exact attractor samples; returns a witness on failure."""
    shape = ShapeClass(shape)
    sample = sample_attractor(fif, depth, derivatives=False)
    x, v = sample.x, sample.y
    checks = []
    if shape is ShapeClass.MONOTONE_INCREASING:
        checks = [_first_drop(x, v, tol)]
    elif shape is ShapeClass.MONOTONE_DECREASING:
        checks = [_first_drop(x, -v, tol)]
    elif shape is ShapeClass.CONVEX:
        checks = [_first_bend(x, v, tol)]
    elif shape is ShapeClass.CONCAVE:
        checks = [_first_bend(x, -v, tol)]
    elif shape is ShapeClass.CONVEX_MONOTONE_INCREASING:
        checks = [_first_bend(x, v, tol), _first_drop(x, v, tol)]
    elif shape is ShapeClass.POSITIVE:
        neg = np.flatnonzero(v < -tol)
        if neg.size:
            k = int(neg[0])
            checks = [((x[k], x[k]), f"S({x[k]:.6g}) = {v[k]:.3e} < 0")]
    for witness, detail in checks:
        if witness is not None:
            return ShapeCheck(False, shape, depth, len(x), witness, detail)
    return ShapeCheck(True, shape, depth, len(x))


# -- reduced forms -----------------------------------------------------------------


def monotone_reduced_piece(data: HermiteData, alpha, i, theta):
    """Rational quadratic piece that the optimal monotone choice of r_i produces.

    ``i`` is 0-based; the interval must not be flat.
    """
    alpha = np.asarray(alpha, dtype=float)
    y, d = data.y, data.d
    y1, yN, d1, dN = y[0], y[-1], d[0], d[-1]
    yi, yi1, di, di1 = y[i], y[i + 1], d[i], d[i + 1]
    al, ai, delta = alpha[i], data.a[i], data.slopes[i]
    beta = delta * data.span / ((yi1 - yi) - al * data.rise)
    u = 1.0 - theta
    mid = ((yi * di1 + yi1 * di) * ai
           - al * (yi1 * d1 + yi * dN + ai * (yN * di + y1 * di1))
           + al**2 * (yN * d1 + y1 * dN))
    p = (yi1 - al * yN) * delta * theta**2 + beta * mid * theta * u + (yi - al * y1) * delta * u**2
    q = delta * theta**2 + beta * (ai * (di + di1) - al * (d1 + dN)) * theta * u + delta * u**2
    return p / q


def convex_reduced_piece(data: HermiteData, alpha, i, theta):
    """Quadratic-over-linear piece produced by the optimal convex choice of r_i."""
    alpha = np.asarray(alpha, dtype=float)
    right, left = _convex_gaps(data, alpha)
    G, H = right[i], left[i]
    al = alpha[i]
    u = 1.0 - theta
    line = u * (data.y[i] - al * data.y[0]) + theta * (data.y[i + 1] - al * data.y[-1])
    return line - data.h[i] * theta * u * G * H / (G * u + H * theta)
