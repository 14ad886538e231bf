"""Compensated-process flatness, one-sidedness, convexity and Jensen gaps."""

import math

import numpy as np
import pytest

from gcalc.expectation import CylinderFunctional
from gcalc.martingale import (
    CONDITIONAL_TOL,
    ScalarFunction2,
    StepMatrixProcess,
    compensated_martingale_check,
    default_probe_battery,
    is_generator_convex,
    jensen_check,
    negated_martingale_gap,
    scalar_function_from_name,
    submartingale_check,
)
from gcalc.uncertainty import (
    DiagonalBox,
    Direction,
    FiniteMatrixSet,
    Interval1D,
    SymMatrix,
)

GAMMA = Interval1D(0.5, 1.0)
A = Direction.of(1.0)
FAST = {"prefix_points": 101, "nested_points": 101}


# ---------------------------------------------------------------------------
# scalar function catalog
# ---------------------------------------------------------------------------


def test_catalog_covers_the_named_functions():
    for name in ("linear", "neg_linear", "square", "neg_square", "exp"):
        h = scalar_function_from_name(name)
        assert h.label == name
        assert math.isfinite(h.spot_check())


def test_polynomial_derivatives_are_generated():
    h = scalar_function_from_name("poly", coefficients=[1.0, 2.0, 3.0])
    ys = np.linspace(-1.0, 1.0, 7)
    assert np.allclose(h.fn(ys), 1.0 + 2.0 * ys + 3.0 * ys**2)
    assert np.allclose(h.grad(ys), 2.0 + 6.0 * ys)
    assert np.allclose(h.curv(ys), 6.0)
    h.spot_check()


def test_catalog_rejects_unknown_and_incomplete_requests():
    with pytest.raises(ValueError, match="unknown scalar function"):
        scalar_function_from_name("cosh")
    with pytest.raises(ValueError, match="at least one coefficient"):
        scalar_function_from_name("poly")


def test_spot_check_catches_wrong_derivatives():
    lying = ScalarFunction2(
        fn=lambda y: y * y,
        grad=lambda y: 3.0 * y,
        curv=lambda y: np.full_like(y, 2.0),
        label="bad",
    )
    with pytest.raises(ValueError, match="grad disagrees"):
        lying.spot_check()


def test_derivatives_are_required():
    with pytest.raises(ValueError, match="derivatives are required"):
        ScalarFunction2(fn=lambda y: y, grad=None, curv=lambda y: y)


# ---------------------------------------------------------------------------
# convexity probes
# ---------------------------------------------------------------------------


def test_probe_battery_shape_and_validation():
    probes = default_probe_battery(1)
    assert len(probes) == 5 * 2 * 5
    assert len(default_probe_battery(2)) == 5 * 3 * 7
    assert any(np.all(z == 0.0) for _, z, _ in probes)
    assert any(m.as_array().max() == 0.0 and m.as_array().min() == 0.0 for _, _, m in probes)
    with pytest.raises(ValueError, match="dimension"):
        default_probe_battery(0)
    with pytest.raises(ValueError, match="y probe"):
        default_probe_battery(1, y_values=())


def test_linear_family_is_exactly_neutral():
    rep = is_generator_convex(scalar_function_from_name("linear"), GAMMA)
    assert rep.verdict
    assert rep.min_value == 0.0


def test_square_and_exp_are_generator_convex():
    for name in ("square", "exp"):
        rep = is_generator_convex(scalar_function_from_name(name), GAMMA)
        assert rep.verdict, name
        assert rep.min_value >= -1e-12


def test_negated_linear_is_convex_for_any_set():
    h = scalar_function_from_name("neg_linear")
    finite = FiniteMatrixSet(
        (np.array([[0.6]]), np.array([[0.9]]), np.array([[0.75]]))
    )
    for gamma in (GAMMA, finite, DiagonalBox.of([(0.5, 1.0), (0.2, 0.7)])):
        assert is_generator_convex(h, gamma).verdict


def test_negated_square_fails_with_a_recorded_probe():
    rep = is_generator_convex(scalar_function_from_name("neg_square"), GAMMA)
    assert not rep.verdict
    assert rep.min_value <= -0.25
    y, z, a_rows = rep.worst_probe
    assert math.isfinite(y)
    assert any(v != 0.0 for v in z)
    blob = rep.to_json_dict()
    assert blob["verdict"] is False
    assert blob["worst_probe"]["a"] == [list(r) for r in a_rows]


def test_convexity_respects_caller_probes():
    h = scalar_function_from_name("neg_square")
    gentle = [(0.0, np.zeros(1), SymMatrix.scalar(1.0))]
    assert is_generator_convex(h, GAMMA, probes=gentle).verdict
    with pytest.raises(ValueError, match="nonempty"):
        is_generator_convex(h, GAMMA, probes=[])


# ---------------------------------------------------------------------------
# Jensen comparison
# ---------------------------------------------------------------------------


def test_jensen_linear_is_an_equality():
    rep = jensen_check(
        scalar_function_from_name("linear"), lambda x: x, GAMMA, A, 1.0, **FAST
    )
    assert rep.consistent
    assert abs(rep.delta) <= 1e-3
    assert abs(rep.conditional_min_margin) <= CONDITIONAL_TOL


def test_jensen_square_of_the_terminal_level():
    rep = jensen_check(
        scalar_function_from_name("square"), lambda x: x, GAMMA, A, 1.0, **FAST
    )
    assert rep.convexity.verdict
    assert rep.delta == pytest.approx(1.0, abs=2e-3)
    assert rep.conditional_min_margin == pytest.approx(0.5, abs=CONDITIONAL_TOL)
    assert rep.consistent


def test_jensen_negated_linear_on_a_square_payoff():
    rep = jensen_check(
        scalar_function_from_name("neg_linear"), lambda x: x * x, GAMMA, A, 1.0, **FAST
    )
    assert rep.convexity.verdict
    assert rep.delta == pytest.approx(0.75, abs=2e-3)
    assert rep.conditional_min_margin >= -CONDITIONAL_TOL
    assert rep.consistent


def test_jensen_exponential_stays_above_the_hinge():
    rep = jensen_check(
        scalar_function_from_name("exp"), lambda x: x, GAMMA, A, 1.0, **FAST
    )
    assert rep.convexity.verdict
    assert rep.delta == pytest.approx(math.exp(0.5) - 1.0, abs=5e-3)
    assert rep.conditional_min_margin >= -CONDITIONAL_TOL
    assert rep.consistent


def test_jensen_counterexample_records_a_negative_gap():
    rep = jensen_check(
        scalar_function_from_name("neg_square"), lambda x: x, GAMMA, A, 1.0, **FAST
    )
    assert not rep.convexity.verdict
    assert rep.delta == pytest.approx(-0.25, abs=2e-3)
    assert rep.delta < -CONDITIONAL_TOL
    assert rep.conditional_min_margin < -CONDITIONAL_TOL
    assert rep.consistent
    blob = rep.to_json_dict()
    assert blob["generator_convex"] is False
    assert blob["delta"] < 0.0


def test_jensen_flags_a_lying_certificate():
    # derivatives of the square paired with the values of its negation:
    # the probe certificate says convex, the measured gap disagrees
    impostor = ScalarFunction2(
        fn=lambda y: -y * y,
        grad=lambda y: 2.0 * y,
        curv=lambda y: np.full_like(y, 2.0),
        label="impostor",
    )
    rep = jensen_check(impostor, lambda x: x, GAMMA, A, 1.0, **FAST)
    assert rep.convexity.verdict
    assert not rep.consistent


def test_jensen_validation():
    h = scalar_function_from_name("linear")
    with pytest.raises(ValueError, match="horizon"):
        jensen_check(h, lambda x: x, GAMMA, A, 0.0)
    with pytest.raises(ValueError, match="prefix_time"):
        jensen_check(h, lambda x: x, GAMMA, A, 1.0, prefix_time=1.5)


# ---------------------------------------------------------------------------
# compensated windows
# ---------------------------------------------------------------------------


def test_pure_driving_integral_is_flat():
    rep = compensated_martingale_check(0.0, 1.0, GAMMA, 0.3, 0.8, **FAST)
    assert rep.passed
    assert rep.max_violation <= CONDITIONAL_TOL
    assert rep.compensator_rates == (0.0,)


def test_variation_with_top_rate_drain_is_flat():
    rep = compensated_martingale_check(1.0, 0.0, GAMMA, 0.3, 0.8, **FAST)
    assert rep.passed
    assert rep.compensator_rates == (1.0,)
    assert rep.windows == ((0.3, 0.8),)


def test_negative_variation_weight_uses_the_signed_drain():
    rep = compensated_martingale_check(-1.0, 0.0, GAMMA, 0.3, 0.8, **FAST)
    assert rep.passed
    assert rep.compensator_rates == (-0.25,)


def test_mixed_weights_and_zero_start():
    assert compensated_martingale_check(0.7, -0.4, GAMMA, 0.25, 1.0, **FAST).passed
    assert compensated_martingale_check(1.0, 0.5, GAMMA, 0.0, 0.6, **FAST).passed


def test_step_coefficient_is_cut_at_its_switch():
    step = StepMatrixProcess(
        breaks=(0.0, 0.5),
        values=(SymMatrix.scalar(1.0), SymMatrix.scalar(-0.5)),
    )
    rep = compensated_martingale_check(step, 0.0, GAMMA, 0.25, 0.75, **FAST)
    assert rep.passed
    assert rep.windows == ((0.25, 0.5), (0.5, 0.75))
    assert rep.compensator_rates == (1.0, -0.125)
    blob = rep.to_json_dict()
    assert blob["passed"] is True
    assert len(blob["window_violations"]) == 2


def test_diagonal_box_splits_axis_by_axis():
    box = DiagonalBox.of([(0.5, 1.0), (0.25, 0.5)])
    rep = compensated_martingale_check(
        np.diag([1.0, -2.0]), [0.5, -1.0], box, 0.2, 0.7, **FAST
    )
    assert rep.passed
    assert rep.compensator_rates == (0.875,)


def test_scalar_finite_set_is_supported():
    finite = FiniteMatrixSet((np.array([[0.6]]), np.array([[0.9]])))
    rep = compensated_martingale_check(1.0, 0.0, finite, 0.3, 0.8, **FAST)
    assert rep.passed
    assert rep.compensator_rates == (pytest.approx(0.81),)


def test_window_check_validation():
    with pytest.raises(ValueError, match="0 <= s < t"):
        compensated_martingale_check(1.0, 0.0, GAMMA, 0.8, 0.3)
    with pytest.raises(ValueError, match="components"):
        compensated_martingale_check(1.0, [0.5, 0.5], GAMMA, 0.3, 0.8)
    with pytest.raises(ValueError, match="does not match the set dimension"):
        compensated_martingale_check(np.eye(2), 1.0, GAMMA, 0.3, 0.8)
    with pytest.raises(ValueError, match="step process"):
        compensated_martingale_check(np.ones(3), 1.0, GAMMA, 0.3, 0.8)
    box = DiagonalBox.of([(0.5, 1.0), (0.25, 0.5)])
    with pytest.raises(ValueError, match="diagonal variation coefficient"):
        compensated_martingale_check(
            np.array([[1.0, 0.3], [0.3, 1.0]]), [0.0, 0.0], box, 0.3, 0.8
        )
    finite2 = FiniteMatrixSet((np.eye(2), 0.5 * np.eye(2)))
    with pytest.raises(ValueError, match="diagonal-box scenario set"):
        compensated_martingale_check(np.eye(2), [0.0, 0.0], finite2, 0.3, 0.8)


def test_step_process_validation():
    one = SymMatrix.scalar(1.0)
    with pytest.raises(ValueError, match="first breakpoint"):
        StepMatrixProcess(breaks=(0.5,), values=(one,))
    with pytest.raises(ValueError, match="strictly increasing"):
        StepMatrixProcess(breaks=(0.0, 0.0), values=(one, one))
    with pytest.raises(ValueError, match="one value per breakpoint"):
        StepMatrixProcess(breaks=(0.0, 1.0), values=(one,))
    with pytest.raises(ValueError, match="share one dimension"):
        StepMatrixProcess(
            breaks=(0.0, 1.0), values=(one, SymMatrix.diagonal([1.0, 1.0]))
        )
    step = StepMatrixProcess.of([(0.0, one), (1.0, one.scaled(2.0))])
    assert step.value_at(0.5) == one
    assert step.value_at(1.0) == one.scaled(2.0)
    assert step.switch_times_within(0.0, 2.0) == [1.0]
    with pytest.raises(ValueError, match="nonnegative"):
        step.value_at(-0.1)


# ---------------------------------------------------------------------------
# one-sidedness of the drain
# ---------------------------------------------------------------------------


def test_mirrored_process_keeps_a_positive_gap():
    s, t = 0.3, 0.8
    gap = negated_martingale_gap(1.0, 0.0, GAMMA, s, t, **FAST)
    spread = (GAMMA.sigma_high**2 - GAMMA.sigma_low**2) * (t - s)
    assert gap >= spread - CONDITIONAL_TOL
    assert gap == pytest.approx(spread, abs=CONDITIONAL_TOL)


def test_mirrored_driving_integral_stays_flat():
    gap = negated_martingale_gap(0.0, 1.0, GAMMA, 0.3, 0.8, **FAST)
    assert abs(gap) <= CONDITIONAL_TOL


def test_mirror_gap_vanishes_without_volatility_spread():
    gap = negated_martingale_gap(1.0, 0.0, Interval1D(1.0, 1.0), 0.3, 0.8, **FAST)
    assert abs(gap) <= CONDITIONAL_TOL


def test_mirror_gap_accumulates_over_step_windows():
    step = StepMatrixProcess(
        breaks=(0.0, 0.5),
        values=(SymMatrix.scalar(1.0), SymMatrix.scalar(2.0)),
    )
    gap = negated_martingale_gap(step, 0.0, GAMMA, 0.25, 0.75, **FAST)
    spread = 0.75 * (1.0 * 0.25 + 2.0 * 0.25)
    assert gap == pytest.approx(spread, abs=2.0 * CONDITIONAL_TOL)


# ---------------------------------------------------------------------------
# submartingale comparison
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def terminal_level() -> CylinderFunctional:
    return CylinderFunctional(
        (0.5, 1.0, 2.0), A, lambda x, y, z: z, growth_tag="polynomial"
    )


def test_linear_h_reduces_to_the_tower_property(terminal_level):
    rep = submartingale_check(
        scalar_function_from_name("linear"), terminal_level, GAMMA, 1, 2, **FAST
    )
    assert rep.passed
    assert rep.max_abs_gap <= CONDITIONAL_TOL


def test_square_h_gains_the_variance_of_the_gap(terminal_level):
    rep = submartingale_check(
        scalar_function_from_name("square"), terminal_level, GAMMA, 1, 2, **FAST
    )
    assert rep.passed
    assert rep.min_margin == pytest.approx(0.5, abs=CONDITIONAL_TOL)


def test_conditioning_on_everything_reduces_to_conditional_jensen(terminal_level):
    rep = submartingale_check(
        scalar_function_from_name("square"), terminal_level, GAMMA, 1, 3, **FAST
    )
    assert rep.passed
    assert rep.min_margin == pytest.approx(1.5, abs=CONDITIONAL_TOL)


def test_constant_functional_gives_equality():
    const = CylinderFunctional((0.5, 1.0), A, lambda x, y: np.full_like(x + y, 3.0))
    rep = submartingale_check(
        scalar_function_from_name("square"), const, GAMMA, 1, 2, **FAST
    )
    assert rep.max_abs_gap <= CONDITIONAL_TOL
    blob = rep.to_json_dict()
    assert blob["passed"] is True


def test_submartingale_index_validation(terminal_level):
    h = scalar_function_from_name("square")
    with pytest.raises(ValueError, match="s_index"):
        submartingale_check(h, terminal_level, GAMMA, 2, 2)
    with pytest.raises(ValueError, match="s_index"):
        submartingale_check(h, terminal_level, GAMMA, 0, 2)
    with pytest.raises(ValueError, match="s_index"):
        submartingale_check(h, terminal_level, GAMMA, 1, 4)
