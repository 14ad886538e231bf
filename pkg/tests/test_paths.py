"""Scenario path simulation, discrete stochastic calculus, sup estimator."""

import math

import numpy as np
import pytest

from gcalc.paths import (
    Partition,
    SamplePath,
    ScenarioControl,
    SimpleProcess,
    bang_bang_control,
    bochner_integral,
    control_within,
    generate_path,
    integral_wrt_qv,
    ito_integral,
    mutual_variation,
    path_to_csv_text,
    quadratic_variation,
    scenario_sup_expect,
    volatility_ladder,
)
from gcalc.pde import evaluate_pt
from gcalc.uncertainty import DiagonalBox, Direction, FiniteMatrixSet, Interval1D

A = Direction.of(1.0)
GAMMA = Interval1D(0.5, 1.0)


def unit_control(n=1000, horizon=1.0, rate=1.0):
    part = Partition.uniform(horizon, n)
    return ScenarioControl.constant(part, [[rate]])


# ---------------------------------------------------------------------------
# partitions and controls
# ---------------------------------------------------------------------------


def test_partition_basics():
    part = Partition.uniform(2.0, 4)
    assert part.points == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert part.horizon == 2.0
    assert part.n_intervals == 4
    assert part.mesh == pytest.approx(0.5)
    assert np.allclose(part.deltas(), 0.5)


def test_partition_validation():
    with pytest.raises(ValueError, match="two points"):
        Partition(points=(0.0,))
    with pytest.raises(ValueError, match="start at 0"):
        Partition(points=(0.5, 1.0))
    with pytest.raises(ValueError, match="strictly increasing"):
        Partition(points=(0.0, 1.0, 1.0))
    with pytest.raises(ValueError, match="finite"):
        Partition(points=(0.0, np.inf))
    with pytest.raises(ValueError, match="positive"):
        Partition.uniform(0.0, 4)
    with pytest.raises(ValueError, match="interval"):
        Partition.uniform(1.0, 0)


def test_partition_indices_in_refinement():
    coarse = Partition.uniform(1.0, 4)
    fine = Partition.uniform(1.0, 16)
    idx = coarse.indices_in(fine)
    assert list(idx) == [0, 4, 8, 12, 16]
    offgrid = Partition(points=(0.0, 0.3, 1.0))
    with pytest.raises(ValueError, match="partition mismatch"):
        offgrid.indices_in(fine)


def test_control_shapes_and_constant():
    part = Partition.uniform(1.0, 3)
    ctrl = ScenarioControl.constant(part, [[0.7]])
    assert ctrl.dim == 1
    assert ctrl.is_constant
    assert ctrl.describe()["kind"] == "constant"
    with pytest.raises(ValueError, match="one matrix per subinterval"):
        ScenarioControl(partition=part, matrices=np.ones((2, 1, 1)))
    with pytest.raises(ValueError, match="shape"):
        ScenarioControl(partition=part, matrices=np.ones((3, 1, 2)))
    with pytest.raises(ValueError, match="finite"):
        ScenarioControl(partition=part, matrices=np.full((3, 1, 1), np.nan))


def test_control_within_interval():
    part = Partition.uniform(1.0, 4)
    assert control_within(ScenarioControl.constant(part, [[0.5]]), GAMMA)
    assert control_within(ScenarioControl.constant(part, [[1.0]]), GAMMA)
    assert not control_within(ScenarioControl.constant(part, [[1.2]]), GAMMA)
    assert not control_within(ScenarioControl.constant(part, [[0.3]]), GAMMA)
    two_dim = ScenarioControl.constant(part, np.eye(2))
    assert not control_within(two_dim, GAMMA)


def test_control_within_box_and_finite_set():
    part = Partition.uniform(1.0, 2)
    box = DiagonalBox(lows=(0.2, 0.1), highs=(1.0, 0.8))
    inside = ScenarioControl.constant(part, np.diag([0.5, 0.4]))
    assert control_within(inside, box)
    skew = ScenarioControl.constant(part, [[0.5, 0.1], [0.0, 0.4]])
    assert not control_within(skew, box)
    members = FiniteMatrixSet([np.eye(2), 0.5 * np.eye(2)])
    assert control_within(ScenarioControl.constant(part, 0.5 * np.eye(2)), members)
    assert not control_within(ScenarioControl.constant(part, 0.7 * np.eye(2)), members)


def test_volatility_ladder_spans_interval():
    part = Partition.uniform(1.0, 2)
    ladder = volatility_ladder(GAMMA, part, levels=5)
    rungs = [c.matrices[0, 0, 0] for c in ladder]
    assert rungs == pytest.approx([0.5, 0.625, 0.75, 0.875, 1.0])
    assert all(control_within(c, GAMMA) for c in ladder)
    assert len(volatility_ladder(GAMMA, part, levels=1)) == 1
    with pytest.raises(ValueError, match="ladder level"):
        volatility_ladder(GAMMA, part, levels=0)


def test_bang_bang_control_switches_on_proxy_sign():
    part = Partition.uniform(1.0, 10)
    ctrl = bang_bang_control(GAMMA, part, lambda t: 0.25 - t)
    vals = ctrl.matrices[:, 0, 0]
    assert np.all(vals[:3] == 1.0)
    assert np.all(vals[3:] == 0.5)
    assert control_within(ctrl, GAMMA)
    assert ctrl.describe()["kind"] == "piecewise"
    assert ctrl.describe()["distinct_matrices"] == 2


# ---------------------------------------------------------------------------
# path generation
# ---------------------------------------------------------------------------


def test_zero_control_gives_zero_path():
    path = generate_path(unit_control(rate=0.0), seed=5)
    assert np.all(path.increments == 0.0)
    assert np.all(path.levels() == 0.0)


def test_same_seed_is_bit_identical():
    ctrl = unit_control(n=2000)
    p1 = generate_path(ctrl, seed=99)
    p2 = generate_path(ctrl, seed=99)
    assert np.array_equal(p1.increments, p2.increments)
    p3 = generate_path(ctrl, seed=100)
    assert not np.array_equal(p1.increments, p3.increments)


def test_path_index_blocks_are_independent_of_order():
    ctrl = unit_control(n=100)
    direct = generate_path(ctrl, seed=4, path_index=17)
    again = generate_path(ctrl, seed=4, path_index=17)
    assert np.array_equal(direct.increments, again.increments)
    other = generate_path(ctrl, seed=4, path_index=16)
    assert not np.array_equal(direct.increments, other.increments)
    with pytest.raises(ValueError, match="nonnegative"):
        generate_path(ctrl, seed=4, path_index=-1)


def test_terminal_variance_matches_rate():
    # terminal value is exactly N(0, rate^2 T) for any step count, so a
    # short partition suffices; bound is three standard errors of the
    # sample variance estimator
    ctrl = unit_control(n=8)
    n_paths = 10_000
    finals = np.empty(n_paths)
    for i in range(n_paths):
        finals[i] = generate_path(ctrl, seed=123, path_index=i).levels_along(A)[-1]
    var = finals.var(ddof=1)
    bound = 3.0 * math.sqrt(2.0 / (n_paths - 1))
    assert abs(var - 1.0) <= bound


def test_piecewise_control_scales_increment_blocks():
    part = Partition.uniform(1.0, 4)
    mats = np.array([[[2.0]], [[2.0]], [[0.0]], [[0.0]]])
    ctrl = ScenarioControl(partition=part, matrices=mats)
    path = generate_path(ctrl, seed=8)
    assert np.all(path.increments[2:] == 0.0)
    assert np.all(path.increments[:2] != 0.0)


def test_two_dimensional_path_components():
    part = Partition.uniform(1.0, 500)
    ctrl = ScenarioControl.constant(part, np.diag([1.0, 0.5]))
    path = generate_path(ctrl, seed=21)
    assert path.dim == 2
    e1, e2 = Direction.of(1.0, 0.0), Direction.of(0.0, 1.0)
    assert path.levels_along(e1).shape == (501,)
    # second component runs at half scale: compare realized quadratic sums
    q1 = quadratic_variation(path, e1)[-1]
    q2 = quadratic_variation(path, e2)[-1]
    assert 0.15 <= q2 / q1 <= 0.45


def test_sample_path_validation():
    part = Partition.uniform(1.0, 3)
    with pytest.raises(ValueError, match="shape"):
        SamplePath(partition=part, increments=np.zeros((2, 1)), seed=0)
    with pytest.raises(ValueError, match="finite"):
        SamplePath(partition=part, increments=np.full((3, 1), np.inf), seed=0)
    bad_dir = Direction.of(1.0, 0.0)
    path = SamplePath(partition=part, increments=np.zeros((3, 1)), seed=0)
    with pytest.raises(ValueError, match="dimension"):
        path.levels_along(bad_dir)


# ---------------------------------------------------------------------------
# integrals and variation
# ---------------------------------------------------------------------------


def test_unit_process_telescopes_to_terminal_value():
    # increments chosen as exact binary fractions: the telescoping sum has
    # no rounding at all
    part = Partition.uniform(1.0, 4)
    inc = np.array([[0.5], [-0.25], [0.75], [0.125]])
    path = SamplePath(partition=part, increments=inc, seed=0)
    one = SimpleProcess.constant(part, 1.0)
    assert ito_integral(one, path, A) == path.levels_along(A)[-1]
    assert integral_wrt_qv(one, path, A) == quadratic_variation(path, A)[-1]


def test_unit_process_on_random_path():
    path = generate_path(unit_control(n=5000), seed=2)
    one = SimpleProcess.constant(path.partition, 1.0)
    bt = path.levels_along(A)[-1]
    assert ito_integral(one, path, A) == pytest.approx(bt, abs=1e-12)
    zero = SimpleProcess.constant(path.partition, 0.0)
    assert ito_integral(zero, path, A) == 0.0


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_pathwise_square_identity(seed):
    """terminal^2 equals twice the forward integral of the level plus the
    quadratic variation, with no statistical error at all."""
    path = generate_path(unit_control(n=20_000, rate=0.8), seed=seed)
    eta = SimpleProcess.from_left_levels(path, A, lambda t, b: b)
    lhs = path.levels_along(A)[-1] ** 2
    rhs = 2.0 * ito_integral(eta, path, A) + quadratic_variation(path, A)[-1]
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_ito_integral_on_coarser_process_partition():
    path = generate_path(unit_control(n=64), seed=11)
    coarse = Partition.uniform(1.0, 8)
    one = SimpleProcess.constant(coarse, 1.0)
    assert ito_integral(one, path, A) == pytest.approx(
        path.levels_along(A)[-1], abs=1e-12
    )


def test_ito_requires_scalar_process_and_matching_partition():
    path = generate_path(unit_control(n=8), seed=1)
    vec = SimpleProcess(partition=path.partition, values=np.zeros((8, 2)))
    with pytest.raises(ValueError, match="scalar-valued"):
        ito_integral(vec, path, A)
    mismatched = SimpleProcess.constant(Partition.uniform(1.0, 3), 1.0)
    with pytest.raises(ValueError, match="partition mismatch"):
        ito_integral(mismatched, path, A)


def test_bochner_integral_values():
    part = Partition.uniform(1.0, 4)
    path = SamplePath(partition=part, increments=np.zeros((4, 1)), seed=0)
    assert bochner_integral(SimpleProcess.constant(part, 3.0), path) == pytest.approx(3.0)
    n = 100
    part_n = Partition.uniform(1.0, n)
    path_n = SamplePath(partition=part_n, increments=np.zeros((n, 1)), seed=0)
    ramp = SimpleProcess(
        partition=part_n, values=np.asarray(part_n.points[:-1], dtype=float)
    )
    value = bochner_integral(ramp, path_n)
    assert value == pytest.approx((n - 1) / (2 * n), abs=1e-12)
    assert abs(value - 0.5) <= 1.0 / n


def test_bochner_integral_vector_values():
    part = Partition.uniform(2.0, 4)
    path = SamplePath(partition=part, increments=np.zeros((4, 2)), seed=0)
    proc = SimpleProcess(partition=part, values=np.tile([1.0, -2.0], (4, 1)))
    out = bochner_integral(proc, path)
    assert np.allclose(out, [2.0, -4.0])


def test_bochner_triangle_bound_on_ensemble():
    # |mean of int eta dt| <= mean of int |eta| dt holds scenario by
    # scenario with no tolerance: the bound is pathwise
    ctrl = unit_control(n=200)
    vals, bounds = [], []
    for i in range(50):
        path = generate_path(ctrl, seed=31, path_index=i)
        eta = SimpleProcess.from_left_levels(path, A, lambda t, b: np.sin(3.0 * b))
        abs_eta = SimpleProcess(partition=path.partition, values=np.abs(eta.values))
        vals.append(bochner_integral(eta, path))
        bounds.append(bochner_integral(abs_eta, path))
    assert abs(np.mean(vals)) <= np.mean(bounds) + 1e-12


def test_quadratic_variation_concentrates():
    path = generate_path(unit_control(n=100_000), seed=13)
    qv = quadratic_variation(path, A)
    assert qv[0] == 0.0
    assert qv.shape == (100_001,)
    assert abs(qv[-1] - 1.0) <= 0.02
    half = generate_path(unit_control(n=100_000, rate=0.5), seed=13)
    assert abs(quadratic_variation(half, A)[-1] - 0.25) <= 0.01


def test_quadratic_variation_of_zero_path():
    path = generate_path(unit_control(n=50, rate=0.0), seed=1)
    assert np.all(quadratic_variation(path, A) == 0.0)


def test_qv_increments_are_stationary_under_index_shift():
    """Cutting the path at an interior point and restarting the clock gives
    the identical per-step variation contributions."""
    path = generate_path(unit_control(n=1000), seed=17)
    j0 = 400
    pts = np.asarray(path.partition.points)
    shifted = SamplePath(
        partition=Partition(points=tuple(float(t) for t in pts[j0:] - pts[j0])),
        increments=path.increments[j0:],
        seed=path.seed,
    )
    # the per-step contributions are the squared increments themselves, so
    # the shifted path reuses them bit for bit
    assert np.array_equal(shifted.increments, path.increments[j0:])
    assert np.array_equal(
        shifted.increments_along(A) ** 2, path.increments_along(A)[j0:] ** 2
    )
    running_orig = quadratic_variation(path, A)
    running_shift = quadratic_variation(shifted, A)
    assert np.allclose(
        running_shift, running_orig[j0:] - running_orig[j0], atol=1e-12
    )


def test_mutual_variation_reduces_to_qv():
    path = generate_path(unit_control(n=3000, rate=0.9), seed=23)
    qv = quadratic_variation(path, A)
    assert np.array_equal(mutual_variation(path, A, A), qv)
    assert np.array_equal(mutual_variation(path, A, Direction.of(-1.0)), -qv)


def test_mutual_variation_matches_increment_products():
    part = Partition.uniform(1.0, 2000)
    ctrl = ScenarioControl.constant(part, np.diag([1.0, 0.5]))
    path = generate_path(ctrl, seed=29)
    e1, e2 = Direction.of(1.0, 0.0), Direction.of(0.0, 1.0)
    mv = mutual_variation(path, e1, e2)
    products = np.cumsum(path.increments[:, 0] * path.increments[:, 1])
    assert np.allclose(mv[1:], products, atol=1e-12)


def test_mutual_variation_of_independent_components_is_small():
    part = Partition.uniform(1.0, 100_000)
    ctrl = ScenarioControl.constant(part, np.diag([1.0, 0.5]))
    path = generate_path(ctrl, seed=37)
    mv = mutual_variation(path, Direction.of(1.0, 0.0), Direction.of(0.0, 1.0))
    assert abs(mv[-1]) <= 0.02
    with pytest.raises(ValueError, match="dimensions differ"):
        mutual_variation(path, Direction.of(1.0, 0.0), Direction.of(1.0))


def test_integral_wrt_qv_with_left_levels():
    path = generate_path(unit_control(n=500), seed=41)
    eta = SimpleProcess.from_left_levels(path, A, lambda t, b: b**2)
    qv_steps = np.diff(quadratic_variation(path, A))
    want = float(np.dot(eta.values, qv_steps))
    assert integral_wrt_qv(eta, path, A) == pytest.approx(want, abs=1e-14)


def test_qv_integral_mean_bound():
    # in expectation the variation integral is the time integral scaled by
    # the squared rate, so the top rate bounds it through int |eta| dt
    rate, n_paths = 1.0, 400
    ctrl = unit_control(n=300, rate=rate)
    vals = np.empty(n_paths)
    bounds = np.empty(n_paths)
    for i in range(n_paths):
        path = generate_path(ctrl, seed=53, path_index=i)
        eta = SimpleProcess.from_left_levels(path, A, lambda t, b: np.cos(b))
        abs_eta = SimpleProcess(partition=path.partition, values=np.abs(eta.values))
        vals[i] = integral_wrt_qv(eta, path, A)
        bounds[i] = bochner_integral(abs_eta, path)
    se = vals.std(ddof=1) / math.sqrt(n_paths) + bounds.std(ddof=1) / math.sqrt(n_paths)
    assert abs(np.mean(vals)) <= rate**2 * np.mean(bounds) + 3.0 * se


# ---------------------------------------------------------------------------
# ensemble laws for the forward integral
# ---------------------------------------------------------------------------


def _integral_ensemble(rate, n_paths=600, n_steps=250, seed=61):
    ctrl = unit_control(n=n_steps, rate=rate)
    ito_vals = np.empty(n_paths)
    sq_time = np.empty(n_paths)
    qv_int = np.empty(n_paths)
    for i in range(n_paths):
        path = generate_path(ctrl, seed=seed, path_index=i)
        eta = SimpleProcess.from_left_levels(path, A, lambda t, b: np.tanh(b) + 0.5)
        sq = SimpleProcess(partition=path.partition, values=eta.values**2)
        ito_vals[i] = ito_integral(eta, path, A)
        sq_time[i] = bochner_integral(sq, path)
        qv_int[i] = integral_wrt_qv(sq, path, A)
    return ito_vals, sq_time, qv_int


def test_forward_integral_has_zero_mean_per_scenario():
    for rate in (0.5, 1.0):
        vals, _, _ = _integral_ensemble(rate)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean()) <= 3.0 * se


def test_energy_bound_per_scenario():
    for rate in (0.5, 1.0):
        vals, sq_time, _ = _integral_ensemble(rate)
        second = vals**2
        se = second.std(ddof=1) / math.sqrt(vals.size) + rate**2 * sq_time.std(
            ddof=1
        ) / math.sqrt(vals.size)
        assert second.mean() <= rate**2 * sq_time.mean() + 3.0 * se


def test_isometry_against_variation_integral():
    """Paired per-path comparison of the squared forward integral with the
    variation integral of the squared integrand."""
    worst = 0.0
    for rate in (0.5, 1.0):
        vals, _, qv_int = _integral_ensemble(rate)
        diff = vals**2 - qv_int
        se = diff.std(ddof=1) / math.sqrt(diff.size)
        assert abs(diff.mean()) <= 3.0 * se
        worst = max(worst, abs(diff.mean()))
    assert math.isfinite(worst)


def test_forward_integral_cauchy_under_refinement():
    """Left-level integrands on dyadically refined partitions: the mean
    squared gap to the finest level shrinks by about half per level."""
    fine_n = 512
    ctrl = unit_control(n=fine_n)
    levels = [32, 64, 128, 256]
    n_paths = 800
    gaps = np.zeros((len(levels), n_paths))
    for i in range(n_paths):
        path = generate_path(ctrl, seed=71, path_index=i)
        eta_fine = SimpleProcess.from_left_levels(path, A, lambda t, b: b)
        i_fine = ito_integral(eta_fine, path, A)
        for lv, n_coarse in enumerate(levels):
            part = Partition.uniform(1.0, n_coarse)
            eta = SimpleProcess.from_left_levels(path, A, lambda t, b: b, partition=part)
            gaps[lv, i] = ito_integral(eta, path, A) - i_fine
    msq = (gaps**2).mean(axis=1)
    assert msq[-1] <= 0.3 * msq[0]
    assert np.all(np.diff(msq) < 0.0)


def test_mutual_variation_integral_cauchy_under_refinement():
    fine_n = 512
    part_fine = Partition.uniform(1.0, fine_n)
    ctrl = ScenarioControl.constant(part_fine, np.diag([1.0, 0.5]))
    e1, e2 = Direction.of(1.0, 0.0), Direction.of(0.0, 1.0)
    levels = [32, 128]
    n_paths = 600
    gaps = np.zeros((len(levels), n_paths))
    for i in range(n_paths):
        path = generate_path(ctrl, seed=83, path_index=i)
        mv = mutual_variation(path, e1, e2)

        def mv_integral(n_coarse):
            part = Partition.uniform(1.0, n_coarse)
            eta = SimpleProcess.from_left_levels(path, e1, lambda t, b: b, partition=part)
            idx = part.indices_in(part_fine)
            return float(np.dot(eta.values, np.diff(mv[idx])))

        i_fine = float(
            np.dot(
                SimpleProcess.from_left_levels(path, e1, lambda t, b: b).values,
                np.diff(mv),
            )
        )
        for lv, n_coarse in enumerate(levels):
            gaps[lv, i] = mv_integral(n_coarse) - i_fine
    msq = (gaps**2).mean(axis=1)
    assert msq[1] <= 0.5 * msq[0]


# ---------------------------------------------------------------------------
# scenario-sup estimator
# ---------------------------------------------------------------------------


def terminal_square(path: SamplePath) -> float:
    return float(path.levels_along(A)[-1] ** 2)


def test_sup_estimator_square_payoff():
    part = Partition.uniform(1.0, 8)
    ladder = volatility_ladder(GAMMA, part, levels=3)
    res = scenario_sup_expect(terminal_square, GAMMA, ladder, 20_000, seed=5)
    assert res.argmax_index == 2
    assert abs(res.value - 1.0) <= 3.0 * res.argmax_standard_error
    neg = scenario_sup_expect(
        lambda p: -terminal_square(p), GAMMA, ladder, 20_000, seed=5
    )
    assert neg.argmax_index == 0
    assert abs(neg.value + 0.25) <= 3.0 * neg.argmax_standard_error


def test_sup_estimator_quadratic_variation_payoff():
    part = Partition.uniform(1.0, 2000)
    ladder = volatility_ladder(GAMMA, part, levels=3)
    qv_final = lambda p: float(quadratic_variation(p, A)[-1])
    res = scenario_sup_expect(qv_final, GAMMA, ladder, 500, seed=9)
    assert res.argmax_index == 2
    assert abs(res.value - 1.0) <= 0.02
    neg = scenario_sup_expect(lambda p: -qv_final(p), GAMMA, ladder, 500, seed=9)
    assert neg.argmax_index == 0
    assert abs(neg.value + 0.25) <= 0.02


def test_sup_estimator_is_dominated_by_solver_value():
    part = Partition.uniform(1.0, 8)
    ladder = volatility_ladder(GAMMA, part, levels=5)
    payoff = lambda p: float(max(p.levels_along(A)[-1], 0.0))
    res = scenario_sup_expect(payoff, GAMMA, ladder, 20_000, seed=15)
    pde_value = evaluate_pt(GAMMA, A, lambda x: np.maximum(x, 0.0), 1.0, 0.0)
    assert res.value <= pde_value + 3.0 * res.argmax_standard_error


def test_sup_estimator_reproducibility_and_reporting():
    part = Partition.uniform(1.0, 16)
    ladder = volatility_ladder(GAMMA, part, levels=2)
    res1 = scenario_sup_expect(terminal_square, GAMMA, ladder, 200, seed=77)
    res2 = scenario_sup_expect(terminal_square, GAMMA, ladder, 200, seed=77)
    assert np.array_equal(res1.means, res2.means)
    blob = res1.to_json_dict()
    assert blob["n_paths"] == 200
    assert blob["seed"] == 77
    assert len(blob["means"]) == 2
    assert blob["argmax_control"]["kind"] == "constant"


def test_sup_estimator_validation():
    part = Partition.uniform(1.0, 4)
    ladder = volatility_ladder(GAMMA, part, levels=2)
    with pytest.raises(ValueError, match="at least one control"):
        scenario_sup_expect(terminal_square, GAMMA, [], 10, seed=1)
    with pytest.raises(ValueError, match="at least two paths"):
        scenario_sup_expect(terminal_square, GAMMA, ladder, 1, seed=1)
    outlaw = ScenarioControl.constant(part, [[2.0]])
    with pytest.raises(ValueError, match="not admissible"):
        scenario_sup_expect(terminal_square, GAMMA, ladder + [outlaw], 10, seed=1)
    with pytest.raises(ValueError, match="non-finite"):
        scenario_sup_expect(lambda p: float("nan"), GAMMA, ladder, 10, seed=1)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def test_path_csv_export_round_trips():
    part = Partition.uniform(1.0, 3)
    ctrl = ScenarioControl.constant(part, np.diag([1.0, 0.5]))
    path = generate_path(ctrl, seed=19)
    text = path_to_csv_text(path)
    lines = text.strip().split("\n")
    assert lines[0] == "t,B1,B2"
    assert len(lines) == 5
    parsed = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.array_equal(parsed[:, 1:], path.levels())
    assert np.array_equal(parsed[:, 0], np.asarray(part.points))
