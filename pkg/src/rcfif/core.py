"""Data model and construction of C1 rational cubic spline fractal interpolants.

The interpolant S is the fixed point of the iterated function system

    L_i(x) = a_i x + b_i,       F_i(x, y) = alpha_i y + P_i(theta) / Q_i(theta),

with theta = (x - x_1) / (x_N - x_1), a cubic numerator P_i and the quadratic
denominator Q_i(theta) = 1 + (r_i - 3) theta (1 - theta).  Everything a model
needs for evaluation (value, slope and curvature pieces) is precomputed once
in :func:`build_fif`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEFAULT_KAPPA = 0.999


class FifError(ValueError):
    """Base class for errors raised by this package."""


class InvalidDataError(FifError):
    pass


class InvalidParametersError(FifError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(v.message for v in self.violations)
        super().__init__(f"inadmissible parameters: {lines}")


class InfeasibleShapeError(FifError):
    """Raised when the data violate a necessary condition of a shape class."""

    def __init__(self, shape, reasons):
        self.shape = shape
        self.reasons = list(reasons)
        super().__init__(f"{shape.value}: " + "; ".join(self.reasons))


class ShapeClass(str, enum.Enum):
    MONOTONE_INCREASING = "monotone-increasing"
    MONOTONE_DECREASING = "monotone-decreasing"
    CONVEX = "convex"
    CONCAVE = "concave"
    POSITIVE = "positive"
    CONVEX_MONOTONE_INCREASING = "convex-monotone-increasing"
    UNCONSTRAINED = "unconstrained"

    @property
    def mirrored(self) -> bool:
        """True for classes handled by negating the data of their mirror class."""
        return self in (ShapeClass.MONOTONE_DECREASING, ShapeClass.CONCAVE)


def _frozen_array(values, name):
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidDataError(f"{name} must be numeric") from exc
    if arr.ndim != 1:
        raise InvalidDataError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HermiteData:
    """Knots ``x``, values ``y`` and derivative parameters ``d``."""

    x: np.ndarray
    y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x, "x")
        y = _frozen_array(self.y, "y")
        d = _frozen_array(self.d, "d")
        if not (len(x) == len(y) == len(d)):
            raise InvalidDataError(
                f"x, y, d lengths differ ({len(x)}, {len(y)}, {len(d)})"
            )
        if len(x) < 2:
            raise InvalidDataError("at least two knots are required")
        bad = np.flatnonzero(np.diff(x) <= 0)
        if bad.size:
            k = int(bad[0])
            raise InvalidDataError(
                f"knots must be strictly increasing: x[{k + 1}]={x[k]} >= x[{k + 2}]={x[k + 1]}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_triples(cls, triples):
        arr = np.asarray(triples, dtype=float)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2])

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def intervals(self) -> int:
        return len(self.x) - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.x)

    @property
    def slopes(self) -> np.ndarray:
        """Chord slopes (y_{i+1} - y_i) / h_i."""
        return np.diff(self.y) / np.diff(self.x)

    @property
    def span(self) -> float:
        return float(self.x[-1] - self.x[0])

    @property
    def rise(self) -> float:
        return float(self.y[-1] - self.y[0])

    @property
    def a(self) -> np.ndarray:
        """Contraction ratios h_i / (x_N - x_1) of the affine maps."""
        return self.h / self.span

    def negated(self) -> "HermiteData":
        return HermiteData(self.x, -self.y, -self.d)


@dataclass(frozen=True)
class FifParameters:
    """Scaling factors ``alpha``, shape parameters ``r`` and contraction margin ``kappa``."""

    alpha: np.ndarray
    r: np.ndarray
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        alpha = _frozen_array(self.alpha, "alpha")
        r = _frozen_array(self.r, "r")
        if len(alpha) != len(r):
            raise InvalidDataError(f"alpha and r lengths differ ({len(alpha)}, {len(r)})")
        if not 0.0 <= self.kappa < 1.0:
            raise InvalidDataError(f"kappa must lie in [0, 1), got {self.kappa}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "kappa", float(self.kappa))

    @classmethod
    def classical(cls, r, kappa=DEFAULT_KAPPA):
        r = np.asarray(r, dtype=float)
        return cls(np.zeros_like(r), r, kappa)


@dataclass(frozen=True)
class Violation:
    """One violated admissibility constraint; ``interval`` is 1-based or None."""

    interval: int | None
    kind: str
    value: float
    bound: float
    message: str


def validate_parameters(data: HermiteData, params: FifParameters) -> list[Violation]:
    """List every violated constraint; an empty list means ``params`` are admissible."""
    out = []
    m = data.intervals
    if len(params.alpha) != m:
        out.append(
            Violation(None, "length", len(params.alpha), m,
                      f"expected {m} parameters per family, got {len(params.alpha)}")
        )
        return out
    bound = params.kappa * data.a
    for i in range(m):
        al, r = params.alpha[i], params.r[i]
        if abs(al) > bound[i]:
            out.append(
                Violation(i + 1, "alpha", float(al), float(bound[i]),
                          f"|alpha_{i + 1}| = {abs(al):.6g} > kappa*a_{i + 1} = {bound[i]:.6g}")
            )
        if r <= -1.0:
            out.append(
                Violation(i + 1, "r", float(r), -1.0, f"r_{i + 1} = {r:.6g} <= -1")
            )
    return out


@dataclass(frozen=True, eq=False)
class RationalCubicFif:
    """A fitted C1 rational cubic spline FIF with per-interval coefficients.

    ``num`` holds the cubic numerator coefficients (A, B, C, D) as a (4, N-1)
    array, ``slope_num`` the quartic coefficients (T, S, U, V, W) of the slope
    piece and ``curv_num`` the cubic coefficients (A*, B*, C*, D*) of the
    curvature piece.
    """

    data: HermiteData
    params: FifParameters
    scale: np.ndarray
    shift: np.ndarray
    num: np.ndarray
    slope_num: np.ndarray
    curv_num: np.ndarray
    _c: np.ndarray = field(repr=False)

    @property
    def alpha(self) -> np.ndarray:
        return self.params.alpha

    @property
    def r(self) -> np.ndarray:
        return self.params.r

    def theta(self, x):
        return (np.asarray(x, dtype=float) - self.data.x[0]) / self.data.span

    def L(self, i, x):
        """Affine map of interval ``i`` (0-based) applied to ``x``."""
        return self.scale[i] * x + self.shift[i]

    def L_inv(self, i, x):
        return (x - self.shift[i]) / self.scale[i]

    def denominator(self, i, theta):
        return 1.0 + (self.params.r[i] - 3.0) * theta * (1.0 - theta)

    def piece(self, i, theta):
        """P_i(theta) / Q_i(theta); ``i`` and ``theta`` broadcast."""
        A, B, C, D = self.num[:, i]
        u = 1.0 - theta
        p = A * u**3 + B * theta * u**2 + C * theta**2 * u + D * theta**3
        return p / self.denominator(i, theta)

    def piece_slope(self, i, theta):
        """Inhomogeneous term of the slope equation, R_i'(x) / a_i."""
        T, S, U, V, W = self.slope_num[:, i]
        u = 1.0 - theta
        p = (T * theta**4 + S * theta**3 * u + U * theta**2 * u**2
             + V * theta * u**3 + W * u**4)
        return p / self.denominator(i, theta) ** 2

    def piece_curvature(self, i, theta):
        """Inhomogeneous term of the second-derivative equation, R_i''(x) / a_i**2."""
        As, Bs, Cs, Ds = self.curv_num[:, i]
        u = 1.0 - theta
        p = As * theta**3 + Bs * theta**2 * u + Cs * theta * u**2 + Ds * u**3
        return 2.0 * p / (self.data.h[i] * self.denominator(i, theta) ** 3)

    def value_bound(self) -> float:
        """Upper bound on sup |S| from the coefficient magnitudes.

        The cubic basis functions sum to at most one on [0, 1] and
        Q_i >= c_i, so |R_i| <= max|A..D| / c_i; the fixed-point equation then
        gives sup|S| <= max_i sup|R_i| / (1 - max|alpha_i|).
        """
        piece = np.max(np.abs(self.num), axis=0) / self._c
        return float(piece.max() / (1.0 - np.max(np.abs(self.alpha))))

    def slope_bound(self) -> float:
        """Upper bound on sup |S'|, analogous to :meth:`value_bound`."""
        piece = np.max(np.abs(self.slope_num), axis=0) / self._c**2
        ratio = np.max(np.abs(self.alpha) / self.data.a)
        return float(piece.max() / (1.0 - ratio))


def _c_values(r):
    r = np.asarray(r, dtype=float)
    return np.where(r < 3.0, (1.0 + r) / 4.0, 1.0)


def build_fif(data: HermiteData, params: FifParameters) -> RationalCubicFif:
    violations = validate_parameters(data, params)
    if violations:
        raise InvalidParametersError(violations)

    x, y, d = data.x, data.y, data.d
    h, delta = data.h, data.slopes
    span, rise = data.span, data.rise
    al, r = params.alpha, params.r
    y1, yN, d1, dN = y[0], y[-1], d[0], d[-1]
    yi, yi1, di, di1 = y[:-1], y[1:], d[:-1], d[1:]

    scale = data.a
    shift = x[:-1] - scale * x[0]

    A = yi - al * y1
    B = (r * yi + h * di) - al * (r * y1 + d1 * span)
    C = (r * yi1 - h * di1) - al * (r * yN - dN * span)
    D = yi1 - al * yN

    g = al / h
    T = di1 - g * span * dN
    S = 2.0 * (r * delta - di) - 2.0 * g * (r * rise - d1 * span)
    U = ((r**2 + 3.0) * delta - r * (di + di1)
         - g * ((r**2 + 3.0) * rise - r * span * (d1 + dN)))
    V = 2.0 * (r * delta - di1) - 2.0 * g * (r * rise - dN * span)
    W = di - g * span * d1

    right = dN * span - rise
    left = rise - d1 * span
    As = r * (di1 - delta) + di - di1 - g * (r * right + span * (d1 - dN))
    Bs = 3.0 * (di1 - delta) - 3.0 * g * right
    Cs = 3.0 * (delta - di) - 3.0 * g * left
    Ds = r * (delta - di) + di - di1 - g * (r * left + span * (d1 - dN))

    def frozen(*rows):
        arr = np.vstack(rows)
        arr.setflags(write=False)
        return arr

    scale = scale.copy()
    scale.setflags(write=False)
    shift.setflags(write=False)
    c = _c_values(r)
    c.setflags(write=False)
    return RationalCubicFif(
        data=data,
        params=params,
        scale=scale,
        shift=shift,
        num=frozen(A, B, C, D),
        slope_num=frozen(T, S, U, V, W),
        curv_num=frozen(As, Bs, Cs, Ds),
        _c=c,
    )


def classical_spline(data: HermiteData, r) -> RationalCubicFif:
    """The non-fractal rational cubic spline (all scaling factors zero)."""
    return build_fif(data, FifParameters.classical(np.broadcast_to(r, (data.intervals,))))


def classical_value(data: HermiteData, r, x):
    """Closed-form local evaluation of the classical rational cubic spline.

    Uses the local variable phi = (x - x_i) / h_i on the interval containing
    ``x``.  Independent of the IFS machinery; serves as a reference.
    """
    r = np.broadcast_to(np.asarray(r, dtype=float), (data.intervals,))
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(data.x, x, side="right") - 1, 0, data.intervals - 1)
    h = data.h[i]
    phi = (x - data.x[i]) / h
    u = 1.0 - phi
    yi, yi1, di, di1, ri = data.y[i], data.y[i + 1], data.d[i], data.d[i + 1], r[i]
    p = (yi * u**3 + (ri * yi + h * di) * phi * u**2
         + (ri * yi1 - h * di1) * phi**2 * u + yi1 * phi**3)
    return p / (1.0 + (ri - 3.0) * phi * u)
