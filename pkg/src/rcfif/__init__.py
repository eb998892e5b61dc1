"""Shape-preserving rational cubic spline fractal interpolation functions."""

from .core import (
    DEFAULT_KAPPA,
    FifError,
    FifParameters,
    HermiteData,
    InfeasibleShapeError,
    InvalidDataError,
    InvalidParametersError,
    RationalCubicFif,
    ShapeClass,
    Violation,
    build_fif,
    classical_spline,
    classical_value,
    validate_parameters,
)
from .estimate import arithmetic_mean_derivatives, with_estimated_derivatives
from .evaluation import (
    CurveSample,
    EvalSettings,
    Evaluation,
    SampleBudgetError,
    ToleranceNotMetError,
    eval_at,
    eval_derivative_at,
    evaluate,
    sample_attractor,
    sample_size,
    second_derivative_right_at_knots,
)
from .shape import (
    BoundsReport,
    ShapeCheck,
    alpha_bounds,
    check_shape_parameters,
    convex_alpha_bounds,
    convex_r_bound,
    monotone_alpha_bounds,
    monotone_r_bound,
    positivity_bounds,
    r_bound,
    select_parameters,
    verify_shape,
)
from .analysis import convergence_order, error_bound_c1, error_bound_c4
from .piecewise import PiecewiseFif, assemble_piecewise, plan_segments

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
