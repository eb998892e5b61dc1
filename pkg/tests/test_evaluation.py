import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcfif import (
    EvalSettings,
    FifError,
    FifParameters,
    HermiteData,
    SampleBudgetError,
    ToleranceNotMetError,
    build_fif,
    classical_spline,
    classical_value,
    convex_r_bound,
    eval_at,
    eval_derivative_at,
    evaluate,
    sample_attractor,
    second_derivative_right_at_knots,
)
from rcfif.estimate import arithmetic_mean_derivatives

from datasets import (
    CONVEX_X,
    CONVEX_Y,
    MONO,
    MONO_REF_ALPHA,
    MONO_REF_R,
    random_model_params,
    random_positive,
)

REF = build_fif(MONO, FifParameters(MONO_REF_ALPHA, MONO_REF_R))
TIGHT = EvalSettings(tol=1e-12)


def test_knots_return_data_exactly():
    for xj, yj, dj in zip(MONO.x, MONO.y, MONO.d):
        assert eval_at(REF, xj) == yj
        assert eval_derivative_at(REF, xj) == dj


def test_one_unrolling_at_a_knot_preimage():
    x = REF.L(1, MONO.x[2])
    expected = MONO_REF_ALPHA[1] * MONO.y[2] + REF.piece(1, 3.0 / 11.0)
    assert eval_at(REF, x, TIGHT) == pytest.approx(expected, abs=1e-13)


def test_zero_scaling_stops_after_one_level():
    fif = classical_spline(MONO, [2.0, 1.8, 31.0, 0.5])
    x = np.linspace(0.01, 10.99, 57)
    res = evaluate(fif, x)
    assert np.all(res.depth == 1)
    np.testing.assert_allclose(res.value, classical_value(MONO, [2.0, 1.8, 31.0, 0.5], x),
                               rtol=1e-13, atol=1e-13)


def test_linear_data_has_unit_slope():
    fif = classical_spline(HermiteData([0, 1], [0, 1], [1, 1]), 3.0)
    x = np.linspace(0, 1, 33)
    np.testing.assert_allclose(eval_derivative_at(fif, x), 1.0, atol=1e-14)
    np.testing.assert_allclose(eval_at(fif, x), x, atol=1e-14)


def test_derivative_matches_finite_differences_for_classical_model():
    fif = classical_spline(MONO, [2.0, 1.8, 31.0, 0.5])
    rng = np.random.default_rng(1)
    x = rng.uniform(1e-3, 11 - 1e-3, 100)
    step = 1e-6
    fd = (eval_at(fif, x + step) - eval_at(fif, x - step)) / (2 * step)
    np.testing.assert_allclose(eval_derivative_at(fif, x), fd, atol=1e-5)


def test_derivative_matches_finite_differences_for_fractal_model():
    fif = build_fif(MONO, FifParameters([0.02, 0.01, 0.05, 0.02], MONO_REF_R))
    x = np.linspace(0.3, 10.7, 40)
    step = 1e-5
    fd = (eval_at(fif, x + step, TIGHT) - eval_at(fif, x - step, TIGHT)) / (2 * step)
    np.testing.assert_allclose(eval_derivative_at(fif, x, TIGHT), fd, atol=1e-4)


def test_out_of_domain_and_bad_settings():
    with pytest.raises(FifError):
        eval_at(REF, 11.5)
    with pytest.raises(FifError):
        eval_at(REF, np.nan)
    with pytest.raises(ValueError):
        EvalSettings(tol=0.0)
    with pytest.raises(ValueError):
        EvalSettings(max_depth=0)


def test_unreachable_tolerance_reports_achieved_bound():
    with pytest.raises(ToleranceNotMetError) as info:
        eval_at(REF, 5.5, EvalSettings(tol=1e-12, max_depth=2))
    assert info.value.bound > 1e-12
    res = evaluate(REF, 5.5, EvalSettings(tol=1e-12, max_depth=2))
    assert res.bound[0] == pytest.approx(info.value.bound)


def test_certified_bound_never_grows_with_depth():
    x = np.linspace(0.1, 10.9, 25)
    prev = None
    for depth in (1, 2, 4, 8, 16, 32, 64):
        bound = evaluate(REF, x, EvalSettings(tol=1e-14, max_depth=depth)).bound
        if prev is not None:
            assert np.all(bound <= prev)
        prev = bound


def test_certified_bound_is_honest():
    x = np.linspace(0.05, 10.95, 50)
    truth = evaluate(REF, x, EvalSettings(tol=1e-14)).value
    for depth in (1, 3, 6):
        res = evaluate(REF, x, EvalSettings(tol=1e-14, max_depth=depth))
        assert np.all(np.abs(res.value - truth) <= res.bound + 1e-13)


def test_sample_count_and_knots():
    s = sample_attractor(REF, 1)
    assert len(s) == 17
    s = sample_attractor(REF, 4)
    assert np.all(np.diff(s.x) > 0)
    idx = np.searchsorted(s.x, MONO.x)
    np.testing.assert_array_equal(s.x[idx], MONO.x)
    np.testing.assert_array_equal(s.y[idx], MONO.y)
    np.testing.assert_array_equal(s.dy[idx], MONO.d)
    assert len(s) <= MONO.n * MONO.intervals**4
    assert s.generation.max() == 4 and s.exact


def test_sample_of_classical_model_matches_closed_form():
    r = [2.0, 1.8, 31.0, 0.5]
    s = sample_attractor(classical_spline(MONO, r), 3)
    np.testing.assert_allclose(s.y, classical_value(MONO, r, s.x), rtol=1e-12, atol=1e-12)


def test_sample_agrees_with_point_evaluation():
    s = sample_attractor(REF, 3)
    np.testing.assert_allclose(eval_at(REF, s.x, TIGHT), s.y, atol=2e-12)
    np.testing.assert_allclose(eval_derivative_at(REF, s.x, EvalSettings(tol=1e-9)), s.dy,
                               atol=2e-9)


def test_sample_budget():
    with pytest.raises(SampleBudgetError):
        sample_attractor(REF, 12, budget=10_000)
    with pytest.raises(ValueError):
        sample_attractor(REF, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_functional_equation_residual_on_samples(seed):
    rng = np.random.default_rng(seed)
    data = random_positive(rng)
    alpha, r = random_model_params(rng, data)
    fif = build_fif(data, FifParameters(alpha, r))
    s = sample_attractor(fif, 2)
    theta = fif.theta(s.x)
    for i in range(data.intervals):
        lhs = eval_at(fif, fif.L(i, s.x), EvalSettings(tol=1e-12))
        rhs = alpha[i] * s.y + fif.piece(i, theta)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_tension_limit_is_piecewise_linear():
    fif = classical_spline(MONO, 1e6)
    x = np.linspace(MONO.x[0], MONO.x[-1], 1000)
    gap = np.abs(eval_at(fif, x) - np.interp(x, MONO.x, MONO.y))
    assert gap.max() < 1e-4


def test_second_derivative_of_quadratic_data():
    data = HermiteData([0, 1, 2], [0, 1, 4], [0, 2, 4])
    fif = classical_spline(data, 3.0)
    assert fif.curv_num[3, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(second_derivative_right_at_knots(fif), 2.0)


def test_second_derivative_of_straight_line_is_zero():
    data = HermiteData([0, 1, 3, 4], [1, 3, 7, 9], [2, 2, 2, 2])
    np.testing.assert_allclose(second_derivative_right_at_knots(classical_spline(data, 3.0)), 0,
                               atol=1e-14)


def test_second_derivative_matches_one_sided_differences():
    r = [2.0, 1.8, 31.0, 0.5]
    alpha = 0.2 * MONO.a**2
    fif = build_fif(MONO, FifParameters(alpha, r))
    limits = second_derivative_right_at_knots(fif)
    step = 1e-6
    tight = EvalSettings(tol=1e-13)
    for j in range(MONO.n - 1):
        xj = MONO.x[j]
        fd = (eval_derivative_at(fif, xj + step, tight) - MONO.d[j]) / step
        assert fd == pytest.approx(limits[j], rel=1e-3, abs=1e-3)
    xn = MONO.x[-1]
    fd = (MONO.d[-1] - eval_derivative_at(fif, xn - step, tight)) / step
    assert fd == pytest.approx(limits[-1], rel=1e-3, abs=1e-3)


def test_second_derivative_requires_small_scaling():
    d = arithmetic_mean_derivatives(CONVEX_X, CONVEX_Y)
    data = HermiteData(CONVEX_X, CONVEX_Y, d)
    r = [3.0, 4.6459, 12.8007, 3.0]
    # alpha_4 = 0.007 > a_4**2, outside the formula's range
    with pytest.raises(FifError):
        second_derivative_right_at_knots(build_fif(data, FifParameters([0.02, 0.001, 0.16, 0.007], r)))
    alpha = [0.02, 0.001, 0.16, 0.0005]
    fif = build_fif(data, FifParameters(alpha, convex_r_bound(data, alpha).optimal))
    assert np.all(second_derivative_right_at_knots(fif) >= 0)
