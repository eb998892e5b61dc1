"""A-priori error bounds and an empirical convergence-order harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_KAPPA,
    FifError,
    FifParameters,
    HermiteData,
    build_fif,
    validate_parameters,
    InvalidParametersError,
)
from .evaluation import EvalSettings, evaluate

ALPHA_RULES = {"a2": 2, "a3": 3, "a4": 4}
R_RULES = ("fixed", "linear", "quadratic")


def c_values(r):
    """Per-interval lower bounds c_i of the denominators, and their minimum."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= -1.0):
        raise FifError("shape parameters must exceed -1")
    c = np.where(r < 3.0, (1.0 + r) / 4.0, 1.0)
    return c, float(c.min())


@dataclass(frozen=True)
class ErrorBoundReport:
    c: float
    z0: float
    s_norm: float
    classical: float
    perturbation: float
    inputs: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.classical + self.perturbation

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "z0": self.z0,
            "s_norm_bound": self.s_norm,
            "classical": self.classical,
            "perturbation": self.perturbation,
            "total": self.total,
            "inputs": self.inputs,
        }


def _common(data, params):
    violations = validate_parameters(data, params)
    if violations:
        raise InvalidParametersError(violations)
    alpha_inf = float(np.max(np.abs(params.alpha)))
    if alpha_inf >= 1.0:
        raise FifError("|alpha|_inf must be below 1")
    _, c = c_values(params.r)
    h = float(data.h.max())
    r_inf = float(np.max(np.abs(params.r)))
    y_inf = float(np.max(np.abs(data.y)))
    d_inf = float(np.max(np.abs(data.d)))
    s_norm = (y_inf + 0.25 * (r_inf * y_inf + h * d_inf)) / c
    z0 = (max(abs(data.y[0]), abs(data.y[-1])) * (1.0 + 0.25 * r_inf)
          + 0.25 * data.span * max(abs(data.d[0]), abs(data.d[-1]))) / c
    perturbation = alpha_inf * (s_norm + z0) / (1.0 - alpha_inf)
    inputs = {"h": h, "r_inf": r_inf, "y_inf": y_inf, "d_inf": d_inf,
              "alpha_inf": alpha_inf, "span": data.span}
    return c, h, s_norm, z0, perturbation, inputs


def error_bound_c4(data: HermiteData, params: FifParameters, f2: float, f3: float,
                   f4: float, mismatch: float = 0.0) -> ErrorBoundReport:
    """Uniform bound on |f - S| for f in C^4.

    ``f2``, ``f3``, ``f4`` are sup norms of the generator's derivatives and
    ``mismatch`` is max |f'(x_i) - d_i| over the knots.
    """
    if min(f2, f3, f4, mismatch) < 0:
        raise ValueError("norms and mismatch must be nonnegative")
    c, h, s_norm, z0, perturbation, inputs = _common(data, params)
    dr = float(np.max(np.abs(params.r - 3.0)))
    classical = (h / (4.0 * c)) * mismatch + (
        h**4 * f4 * (1.0 + 0.25 * dr) + 4.0 * dr * (h**3 * f3 + 3.0 * h**2 * f2)
    ) / (384.0 * c)
    inputs.update(f2=f2, f3=f3, f4=f4, mismatch=mismatch, r_minus_3_inf=dr)
    return ErrorBoundReport(c, z0, s_norm, classical, perturbation, inputs)


def error_bound_c1(data: HermiteData, params: FifParameters, omega: float) -> ErrorBoundReport:
    """Uniform bound on |f - S| for f in C^1 from the modulus of continuity omega(f; h)."""
    if omega < 0:
        raise ValueError("modulus of continuity must be nonnegative")
    c, h, s_norm, z0, perturbation, inputs = _common(data, params)
    classical = (h * inputs["d_inf"] + omega * (inputs["r_inf"] + 4.0)) / (4.0 * c)
    inputs.update(omega=omega)
    return ErrorBoundReport(c, z0, s_norm, classical, perturbation, inputs)


def modulus_of_continuity(f: Callable, interval, h: float, n: int = 10_000) -> float:
    """Sampled omega(f; h) = sup |f(x) - f(x*)| over |x - x*| <= h."""
    lo, hi = interval
    x = np.linspace(lo, hi, n)
    v = np.asarray(f(x), dtype=float)
    step = (hi - lo) / (n - 1)
    k = max(1, int(np.floor(h / step + 1e-9)))
    best = 0.0
    for s in range(1, min(k, n - 1) + 1):
        best = max(best, float(np.max(np.abs(v[s:] - v[:-s]))))
    return best


def sampled_norm(g: Callable, interval, n: int = 10_000) -> float:
    x = np.linspace(interval[0], interval[1], n)
    return float(np.max(np.abs(np.asarray(g(x), dtype=float))))


def scaling_rule(data: HermiteData, rule: str, fraction: float = 0.5) -> np.ndarray:
    """alpha_i = fraction * a_i**p for rule 'a2', 'a3' or 'a4'."""
    try:
        p = ALPHA_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown alpha rule {rule!r}; expected one of {sorted(ALPHA_RULES)}")
    return fraction * data.a**p


def shape_rule(data: HermiteData, rule: str, value: float = 3.0) -> np.ndarray:
    """r_i by rule: 'fixed' (constant value), 'linear' (3 + h_i), 'quadratic' (3 + h_i**2)."""
    if rule == "fixed":
        return np.full(data.intervals, float(value))
    if rule == "linear":
        return 3.0 + data.h
    if rule == "quadratic":
        return 3.0 + data.h**2
    raise ValueError(f"unknown r rule {rule!r}; expected one of {R_RULES}")


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    h: float
    error: float
    bound: float | None


@dataclass(frozen=True)
class ConvergenceResult:
    rows: tuple
    order: float | None
    exact: bool

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "exact": self.exact,
            "rows": [{"n": r.n, "h": r.h, "error": r.error, "bound": r.bound} for r in self.rows],
        }


def convergence_order(f: Callable, df: Callable, interval, sizes: Sequence[int],
                      alpha_rule: str = "a4", r_rule: str = "fixed", *,
                      r_value: float = 3.0, alpha_fraction: float = 0.5,
                      higher: Sequence[Callable] | None = None, grid: int = 2048,
                      tol: float = 1e-10, kappa: float = DEFAULT_KAPPA) -> ConvergenceResult:
    """Estimate the order p in max|f - S| ~ h**p over uniform meshes.

    Each mesh uses exact derivatives d_i = df(x_i).  When ``higher`` supplies
    (f'', f''', f''''), each row also carries the C^4 error bound with norms
    sampled on a 10**4 point grid.
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise ValueError("at least three mesh sizes are needed")
    lo, hi = interval
    norms = None
    if higher is not None:
        norms = [sampled_norm(g, interval) for g in higher]
    xs = np.linspace(lo, hi, grid)
    settings = EvalSettings(tol=tol)
    rows = []
    for n in sizes:
        x = np.linspace(lo, hi, n)
        data = HermiteData(x, f(x), df(x))
        params = FifParameters(scaling_rule(data, alpha_rule, alpha_fraction),
                               shape_rule(data, r_rule, r_value), kappa)
        fif = build_fif(data, params)
        err = float(np.max(np.abs(evaluate(fif, xs, settings).value - f(xs))))
        bound = None
        if norms is not None:
            bound = error_bound_c4(data, params, *norms).total
        rows.append(ConvergenceRow(n, float(data.h.max()), err, bound))

    errors = np.array([r.error for r in rows])
    scale = max(1.0, float(np.max(np.abs(f(xs)))))
    if np.all(errors <= 1e-12 * scale):
        return ConvergenceResult(tuple(rows), None, True)
    hs = np.array([r.h for r in rows])
    good = errors > 0
    slope = np.polyfit(np.log(hs[good]), np.log(errors[good]), 1)[0]
    return ConvergenceResult(tuple(rows), float(slope), False)
