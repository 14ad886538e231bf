"""Acceptance battery: the package's headline guarantees as pass/fail checks.

Every criterion pins its own parameters and tolerance, runs one focused
experiment, and reports the measured numbers alongside the verdict. The
battery is grouped into named suites so the command line can run a slice
(axioms only, calculus only) or the whole thing.
"""

from __future__ import annotations

import math
import time
from typing import Callable, Optional, Sequence

import numpy as np

from .expectation import (
    CylinderFunctional,
    battery_from_dicts,
    conditional_expect,
    default_axiom_battery,
    lp_norm,
    verify_appendix_inequalities,
    verify_expectation_axioms,
)
from .gnormal import (
    GNormalParams,
    concave_payoff_value,
    convex_payoff_value,
    moment_abs,
    moment_even_signed,
)
from .martingale import (
    compensated_martingale_check,
    is_generator_convex,
    jensen_check,
    negated_martingale_gap,
    scalar_function_from_name,
)
from .paths import (
    Partition,
    SamplePath,
    ScenarioControl,
    SimpleProcess,
    generate_path,
    ito_integral,
    volatility_ladder,
)
from .pde import SolverConfig, advance_values, evaluate_pt, semigroup_compose, solve_gheat_1d
from .reporting import Check
from .riskdemo import RiskDemoSpec, run_risk_demo
from .sde import euler_solve, ito_residual, picard_contraction, sde_from_name
from .uncertainty import Direction, Interval1D

GAMMA = Interval1D(0.5, 1.0)
AXIS = Direction.of(1.0)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def moment_rows(
    gamma: Interval1D, t: float = 1.0, cfg: Optional[SolverConfig] = None
) -> list[tuple[int, float, float, float]]:
    """Benchmark moments: closed form against the solver, one row per order.

    The order column encodes the payoff: a positive even entry n stands for
    B^n, a negative even entry -n for -B^n, and an odd entry n for |B|^n.
    Rows are (order, closed_form, solver_value, abs_error).
    """
    if cfg is None:
        cfg = SolverConfig(n_points=2001)
    params = GNormalParams(gamma.sigma_high**2, -(gamma.sigma_low**2), t)
    rows = []
    for n in (2, -2, 4, 1, 3):
        k = abs(n)
        if k % 2 == 0:
            sign = 1 if n > 0 else -1
            closed = moment_even_signed(params, k, sign)

            def payoff(x, m=k, s=float(sign)):
                return s * np.asarray(x, dtype=float) ** m

        else:
            closed = moment_abs(params, k)

            def payoff(x, m=k):
                return np.abs(np.asarray(x, dtype=float)) ** m

        value = evaluate_pt(gamma, AXIS, payoff, t, 0.0, cfg)
        rows.append((n, closed, value, abs(value - closed)))
    return rows


def _mean_and_se(samples: np.ndarray) -> tuple[float, float]:
    n = samples.size
    return float(np.mean(samples)), float(np.std(samples, ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def criterion_1_moments() -> Check:
    """Five benchmark moments at 2001 grid points, within 2e-3 in under 10 s."""
    cfg = SolverConfig(n_points=2001)
    started = time.perf_counter()
    rows = moment_rows(GAMMA, 1.0, cfg)
    elapsed = time.perf_counter() - started
    worst = max(r[3] for r in rows)
    passed = worst <= 2e-3 and elapsed < 10.0
    return Check(
        name="moments_closed_form",
        passed=passed,
        measured={
            "worst_abs_error": worst,
            "elapsed_s": elapsed,
            "orders": [r[0] for r in rows],
            "abs_errors": [r[3] for r in rows],
        },
        detail=f"worst moment error {worst:.2e} in {elapsed:.2f}s",
    )


def criterion_2_payoffs() -> Check:
    """Call-style payoff against both closed branches, two routes each.

    The convex branch targets sqrt(1/(2 pi)) at the top variance, the
    concave branch -sqrt(0.25/(2 pi)) at the bottom one; solver values must
    sit within 1e-3 of the targets and within 2e-3 of the quadrature route.
    """
    params = GNormalParams(1.0, -0.25, 1.0)
    cfg = SolverConfig(n_points=2001)

    def call(x):
        return np.maximum(np.asarray(x, dtype=float), 0.0)

    def neg_call(x):
        return -np.maximum(np.asarray(x, dtype=float), 0.0)

    target_up = math.sqrt(1.0 / (2.0 * math.pi))
    target_dn = -math.sqrt(0.25 / (2.0 * math.pi))
    pde_up = evaluate_pt(GAMMA, AXIS, call, 1.0, 0.0, cfg)
    pde_dn = evaluate_pt(GAMMA, AXIS, neg_call, 1.0, 0.0, cfg)
    quad_up = convex_payoff_value(params, call, 0.0)
    quad_dn = concave_payoff_value(params, neg_call, 0.0)

    closed_err = max(
        abs(pde_up - target_up),
        abs(pde_dn - target_dn),
        abs(quad_up - target_up),
        abs(quad_dn - target_dn),
    )
    cross_err = max(abs(pde_up - quad_up), abs(pde_dn - quad_dn))
    passed = closed_err <= 1e-3 and cross_err <= 2e-3
    return Check(
        name="payoff_closed_forms",
        passed=passed,
        measured={
            "closed_form_error": closed_err,
            "cross_route_error": cross_err,
            "convex_value": pde_up,
            "concave_value": pde_dn,
        },
        detail=f"closed-form error {closed_err:.2e}, route gap {cross_err:.2e}",
    )


def criterion_3_semigroup() -> Check:
    """Two half-horizon stages against one full stage, sup norm on |x| <= 2."""
    cfg = SolverConfig(n_points=801)
    payoffs: Sequence[Callable] = (
        lambda x: np.maximum(np.asarray(x, dtype=float), 0.0),
        lambda x: np.maximum(np.asarray(x, dtype=float) - 0.5, 0.0),
        lambda x: np.abs(np.asarray(x, dtype=float)),
        lambda x: np.asarray(x, dtype=float) ** 2,
    )
    worst = 0.0
    for payoff in payoffs:
        composed, direct = semigroup_compose(GAMMA, AXIS, payoff, 0.5, 0.5, cfg)
        mask = np.abs(composed.grid.nodes()) <= 2.0
        gap = float(np.max(np.abs(composed.values[mask] - direct.values[mask])))
        worst = max(worst, gap)
    passed = worst <= 5e-3
    return Check(
        name="semigroup_composition",
        passed=passed,
        measured={"worst_sup_gap": worst, "battery_size": len(payoffs)},
        detail=f"worst composition gap {worst:.2e} over {len(payoffs)} payoffs",
    )


def criterion_4_axioms(
    battery_dicts: Optional[Sequence[dict]] = None, tolerance: float = 5e-3
) -> Check:
    """Sublinear-expectation laws on a functional battery, plus scheme structure.

    The law battery must stay within ``tolerance`` worst violation. The
    scheme structure gates are exact-arithmetic facts: constants are
    preserved, adding a constant to the data shifts the output by it, and
    scaling the data scales the output, all to 1e-12 over a short advance.
    """
    if battery_dicts:
        battery = battery_from_dicts(list(battery_dicts), AXIS)
    else:
        battery = default_axiom_battery(AXIS)
    report = verify_expectation_axioms(GAMMA, battery)
    worst = report.worst()

    cfg = SolverConfig(n_points=241)
    grid_radius = 4.0
    nodes = np.linspace(-grid_radius, grid_radius, 241)
    dx = nodes[1] - nodes[0]
    base = np.abs(nodes)

    const = solve_gheat_1d(
        1.0, -0.25, lambda x: np.full_like(np.asarray(x, dtype=float), 3.0), 1.0, cfg, radius=6.0
    )
    const_gap = float(np.max(np.abs(const.values - 3.0)))

    hop = 0.01
    evolved, _ = advance_values(base, 1.0, -0.25, dx, hop, cfg)
    shifted, _ = advance_values(base + 2.5, 1.0, -0.25, dx, hop, cfg)
    translation_gap = float(np.max(np.abs(shifted - (evolved + 2.5))))

    doubled, _ = advance_values(4.0 * base, 1.0, -0.25, dx, hop, cfg)
    dyadic_gap = float(np.max(np.abs(doubled - 4.0 * evolved)))
    tripled, _ = advance_values(3.0 * base, 1.0, -0.25, dx, hop, cfg)
    scale = float(np.max(np.abs(tripled))) + 1.0
    general_gap = float(np.max(np.abs(tripled - 3.0 * evolved))) / scale

    scheme_gap = max(const_gap, translation_gap, dyadic_gap, general_gap)
    passed = worst <= tolerance and scheme_gap <= 1e-12
    return Check(
        name="expectation_axioms",
        passed=passed,
        measured={
            "worst_law_violation": worst,
            "tolerance": tolerance,
            "constant_gap": const_gap,
            "translation_gap": translation_gap,
            "dyadic_scaling_gap": dyadic_gap,
            "general_scaling_gap": general_gap,
        },
        detail=f"worst law violation {worst:.2e}, scheme structure gap {scheme_gap:.2e}",
    )


def criterion_5_quadratic_variation() -> Check:
    """Square-variation moments, conditional growth rates, pathwise identity.

    The scenario engine at unit volatility (1e5 steps, 1e4 paths) must land
    the first three moments of the terminal square variation within 5%. The
    conditional engine must reproduce the two one-sided growth rates within
    5e-3. The pathwise telescoping identity must hold to rounding on every
    simulated path.
    """
    n_steps, n_paths = 100_000, 10_000
    part = Partition.uniform(1.0, n_steps)
    control = ScenarioControl.constant(part, [[1.0]])

    sums = np.zeros(3)
    max_rel_gap = 0.0
    for i in range(n_paths):
        path = generate_path(control, seed=2024, path_index=i)
        inc = path.increments_along(AXIS)
        terminal = float(np.dot(inc, inc))
        sums += (terminal, terminal**2, terminal**3)
        levels = path.levels_along(AXIS)
        riemann = float(np.dot(levels[:-1], inc))
        identity_gap = abs(terminal - (levels[-1] ** 2 - 2.0 * riemann))
        max_rel_gap = max(max_rel_gap, identity_gap / max(1.0, terminal))
    means = sums / n_paths
    moment_err = float(np.max(np.abs(means - 1.0)))

    func_up = CylinderFunctional(
        times=(0.3, 0.8),
        direction=AXIS,
        phi=lambda x, y: (y - x) ** 2,
        growth_tag="polynomial",
    )
    func_dn = CylinderFunctional(
        times=(0.3, 0.8),
        direction=AXIS,
        phi=lambda x, y: -((y - x) ** 2),
        growth_tag="polynomial",
    )
    window = 0.5
    cond_up = conditional_expect(func_up, 1, GAMMA)
    cond_dn = conditional_expect(func_dn, 1, GAMMA)
    upper_dev = float(np.max(np.abs(cond_up.values - 1.0 * window)))
    lower_dev = float(np.max(np.abs(-cond_dn.values - 0.25 * window)))

    passed = (
        moment_err <= 0.05
        and upper_dev <= 5e-3
        and lower_dev <= 5e-3
        and max_rel_gap <= 1e-9
    )
    return Check(
        name="quadratic_variation",
        passed=passed,
        measured={
            "moment_means": list(means),
            "worst_moment_rel_error": moment_err,
            "upper_rate_deviation": upper_dev,
            "lower_rate_deviation": lower_dev,
            "max_pathwise_identity_gap": max_rel_gap,
        },
        detail=(
            f"moments off by {moment_err:.3f} rel, rates off by "
            f"{max(upper_dev, lower_dev):.2e}, identity gap {max_rel_gap:.1e}"
        ),
    )


def criterion_6_integral_contracts() -> Check:
    """Forward-integral statistics per scenario at 1e4 paths.

    For a bounded adapted integrand the integral must have zero mean within
    3 standard errors under each constant scenario, match the per-scenario
    isometry within 3 standard errors, and respect the top-variance energy
    bound with the same allowance.
    """
    n_steps, n_paths = 250, 10_000
    part = Partition.uniform(1.0, n_steps)
    deltas = part.deltas()
    worst_sigmas = 0.0
    details = {}
    for idx, vol in enumerate((0.5, 1.0)):
        control = ScenarioControl.constant(part, [[vol]])
        ints = np.empty(n_paths)
        loads = np.empty(n_paths)
        for i in range(n_paths):
            path = generate_path(control, seed=77 + idx, path_index=i)
            eta = SimpleProcess.from_left_levels(
                path, AXIS, lambda t, b: np.tanh(b) + 0.5
            )
            ints[i] = ito_integral(eta, path, AXIS)
            loads[i] = float(np.dot(eta.values**2, deltas))

        mean_i, se_i = _mean_and_se(ints)
        zero_sigmas = abs(mean_i) / se_i
        iso = ints**2 - vol**2 * loads
        mean_iso, se_iso = _mean_and_se(iso)
        iso_sigmas = abs(mean_iso) / se_iso
        energy = ints**2 - GAMMA.sigma_high**2 * loads
        mean_en, se_en = _mean_and_se(energy)
        energy_sigmas = mean_en / se_en
        worst_sigmas = max(worst_sigmas, zero_sigmas, iso_sigmas, energy_sigmas)
        details[f"vol_{vol}"] = {
            "zero_mean_sigmas": zero_sigmas,
            "isometry_sigmas": iso_sigmas,
            "energy_sigmas": energy_sigmas,
        }
    passed = worst_sigmas <= 3.0
    return Check(
        name="integral_contracts",
        passed=passed,
        measured={"worst_sigmas": worst_sigmas, "per_scenario": details},
        detail=f"worst statistic at {worst_sigmas:.2f} standard errors",
    )


def criterion_7_ito_formula() -> Check:
    """Change-of-variable residual: first-order decay, quadratic exactness.

    A three-member smooth battery is evaluated on nested dyadic coarsenings
    of common fine paths; the per-member root-mean-square residual must
    shrink with empirical order at least 1. The members have positive
    derivatives on the visited range, so the deterministic part of the
    residual carries higher-order corrections of one sign and the measured
    slope approaches its first-order limit from above rather than
    straddling it. The quadratic function on a pure-noise state has
    residual exactly 0.0 on a dyadic handcrafted path and within rounding
    on random paths.
    """
    levels = (16, 32, 64, 128, 256)
    fine_n = levels[-1]
    n_paths = 1024
    part = Partition.uniform(1.0, fine_n)
    control = ScenarioControl.constant(part, [[0.9]])

    battery = (
        {
            "phi": np.exp,
            "dphi": np.exp,
            "d2phi": np.exp,
            "alpha": 0.0,
            "eta": np.array([[1.0]]),
            "beta": None,
            "x0": 0.0,
        },
        {
            "phi": lambda x: np.exp(0.5 * x),
            "dphi": lambda x: 0.5 * np.exp(0.5 * x),
            "d2phi": lambda x: 0.25 * np.exp(0.5 * x),
            "alpha": 0.0,
            "eta": np.array([[1.0]]),
            "beta": np.array([0.2]),
            "x0": 0.0,
        },
        {
            "phi": lambda x: x**3,
            "dphi": lambda x: 3.0 * x**2,
            "d2phi": lambda x: 6.0 * x,
            "alpha": 0.3,
            "eta": np.array([[0.8]]),
            "beta": np.array([0.3]),
            "x0": 0.0,
        },
    )

    squared_sums = {level: np.zeros(len(battery)) for level in levels}
    for i in range(n_paths):
        fine = generate_path(control, seed=424, path_index=i)
        for level in levels:
            factor = fine_n // level
            coarse_inc = fine.increments.reshape(level, factor, 1).sum(axis=1)
            coarse = SamplePath(
                partition=Partition.uniform(1.0, level),
                increments=coarse_inc,
                seed=fine.seed,
                path_index=fine.path_index,
            )
            for j, member in enumerate(battery):
                res = ito_residual(
                    member["phi"],
                    member["dphi"],
                    member["d2phi"],
                    coarse,
                    alpha=member["alpha"],
                    eta=member["eta"],
                    beta=member["beta"],
                    x0=member["x0"],
                )
                squared_sums[level][j] += res * res
    mean_residuals = [
        float(np.sum(np.sqrt(squared_sums[level] / n_paths))) for level in levels
    ]
    order = math.log2(mean_residuals[0] / mean_residuals[-1]) / (len(levels) - 1)

    dyadic_inc = np.array(
        [0.5, -0.25, 0.75, 0.125, -0.5, 0.0625, 0.25, -0.125]
    ).reshape(8, 1)
    dyadic = SamplePath(
        partition=Partition.uniform(1.0, 8), increments=dyadic_inc, seed=0, path_index=0
    )
    square = lambda x: x**2
    dsquare = lambda x: 2.0 * x
    d2square = lambda x: np.full_like(np.asarray(x, dtype=float), 2.0)
    exact_res = ito_residual(
        square, dsquare, d2square, dyadic, beta=np.array([1.0]), x0=0.25
    )

    random_part = Partition.uniform(1.0, 1024)
    random_path = generate_path(
        ScenarioControl.constant(random_part, [[1.0]]), seed=9, path_index=3
    )
    rand_res = ito_residual(
        square, dsquare, d2square, random_path, beta=np.array([1.0]), x0=0.0
    )
    rand_scale = max(1.0, float(random_path.levels_along(AXIS)[-1] ** 2))
    rand_rel = abs(rand_res) / rand_scale

    passed = order >= 1.0 and exact_res == 0.0 and rand_rel <= 1e-10
    return Check(
        name="ito_formula",
        passed=passed,
        measured={
            "empirical_order": order,
            "mean_residuals": mean_residuals,
            "quadratic_dyadic_residual": exact_res,
            "quadratic_random_relative": rand_rel,
        },
        detail=f"empirical order {order:.2f}, quadratic residual {exact_res!r}",
    )


def criterion_8_compensator() -> Check:
    """Compensated-process defect for unit coefficients, plus the mirror gap.

    Both signed unit coefficients must give martingale defects within 5e-3
    over the window; the mirrored process for the positive coefficient must
    fail by at least the one-sided weight spread times the window length,
    up to the same tolerance.
    """
    s, t = 0.25, 0.75
    phi = [0.4]
    rep_plus = compensated_martingale_check(1.0, phi, GAMMA, s, t)
    rep_minus = compensated_martingale_check(-1.0, phi, GAMMA, s, t)
    worst = max(rep_plus.max_violation, rep_minus.max_violation)
    gap = negated_martingale_gap(1.0, phi, GAMMA, s, t)
    spread = (GAMMA.sigma_high**2 - GAMMA.sigma_low**2) * (t - s)
    passed = worst <= 5e-3 and gap >= spread - 5e-3
    return Check(
        name="martingale_compensator",
        passed=passed,
        measured={
            "worst_defect": worst,
            "mirror_gap": gap,
            "required_mirror_gap": spread - 5e-3,
        },
        detail=f"worst defect {worst:.2e}, mirror gap {gap:.4f} vs spread {spread:.4f}",
    )


def criterion_9_jensen() -> Check:
    """Generator-convexity verdicts and the two-route Jensen comparison.

    Linear, square and exponential transforms must certify convex, the
    negated square must not. Every convex pair must show a nonnegative gap
    up to 5e-3 on both the unconditional and conditional routes, and the
    negated square must record a strictly negative gap.
    """
    verdict_spec = (("linear", True), ("square", True), ("exp", True), ("neg_square", False))
    verdicts = {}
    verdicts_ok = True
    for name, expected in verdict_spec:
        got = is_generator_convex(scalar_function_from_name(name), GAMMA).verdict
        verdicts[name] = got
        verdicts_ok = verdicts_ok and (got is expected)

    tol = 5e-3
    kw = dict(tol=tol, prefix_points=121, nested_points=101)
    identity = lambda y: np.asarray(y, dtype=float)
    absval = lambda y: np.abs(y)
    square_payoff = lambda y: np.asarray(y, dtype=float) ** 2
    half = lambda y: 0.5 * np.asarray(y, dtype=float)
    convex_pairs = (
        ("linear", identity),
        ("linear", square_payoff),
        ("square", identity),
        ("square", absval),
        ("exp", half),
        ("neg_linear", square_payoff),
    )
    min_delta = math.inf
    all_consistent = True
    for name, payoff in convex_pairs:
        rep = jensen_check(scalar_function_from_name(name), payoff, GAMMA, AXIS, 1.0, **kw)
        min_delta = min(min_delta, rep.delta)
        all_consistent = all_consistent and rep.consistent

    counter = jensen_check(
        scalar_function_from_name("neg_square"), identity, GAMMA, AXIS, 1.0, **kw
    )
    passed = (
        verdicts_ok
        and min_delta >= -tol
        and all_consistent
        and counter.delta < -1e-3
        and not counter.convexity.verdict
    )
    return Check(
        name="jensen_convexity",
        passed=passed,
        measured={
            "verdicts": verdicts,
            "min_convex_delta": min_delta,
            "counterexample_delta": counter.delta,
        },
        detail=(
            f"convex gaps >= {min_delta:.2e}, counterexample gap "
            f"{counter.delta:.3f}"
        ),
    )


def criterion_10_sde() -> Check:
    """Contraction of the solution mapping and mean preservation.

    The weighted ratio and every iterate decay factor must stay at or
    below 0.6 across at least eight rounds, the fixed-point residual must
    end below 1e-6, and the pure-noise linear state must keep its mean
    within 3 standard errors under each constant scenario.
    """
    part = Partition.uniform(1.0, 200)
    ladder = volatility_ladder(GAMMA, part, 3)
    spec = sde_from_name("linear")
    rep = picard_contraction(spec, GAMMA, ladder, 300, seed=11)
    contraction_ok = (
        rep.ratio <= 0.6
        and max(rep.iterate_factors) <= 0.6
        and len(rep.iterate_distances) >= 8
        and rep.fixed_point_residual < 1e-6
    )

    sim_part = Partition.uniform(1.0, 250)
    n_paths = 3000
    worst_sigmas = 0.0
    for idx, vol in enumerate((0.5, 1.0)):
        control = ScenarioControl.constant(sim_part, [[vol]])
        terminals = np.empty(n_paths)
        for i in range(n_paths):
            state = euler_solve(spec, generate_path(control, seed=51 + idx, path_index=i))
            terminals[i] = state.states[-1, 0]
        mean_t, se_t = _mean_and_se(terminals)
        worst_sigmas = max(worst_sigmas, abs(mean_t - 1.0) / se_t)

    passed = contraction_ok and worst_sigmas <= 3.0
    return Check(
        name="sde_picard",
        passed=passed,
        measured={
            "ratio": rep.ratio,
            "worst_iterate_factor": max(rep.iterate_factors),
            "iterations": len(rep.iterate_distances),
            "fixed_point_residual": rep.fixed_point_residual,
            "mean_preservation_sigmas": worst_sigmas,
        },
        detail=(
            f"ratio {rep.ratio:.3f}, residual {rep.fixed_point_residual:.1e}, "
            f"mean drift at {worst_sigmas:.2f} standard errors"
        ),
    )


def criterion_11_risk_demo() -> Check:
    """Two-trader square-variation demo against the supervisor bounds."""
    spec = RiskDemoSpec(gamma=Interval1D(0.49, 1.0))
    rep = run_risk_demo(spec)
    err_a = abs(rep.trader_a - 1.0)
    err_b = abs(rep.trader_b - 0.25)
    passed = err_a <= 0.02 and err_b <= 0.01 and rep.all_contained
    return Check(
        name="risk_demo",
        passed=passed,
        measured={
            "trader_a": rep.trader_a,
            "trader_b": rep.trader_b,
            "lower_bound": rep.lower_bound,
            "upper_bound": rep.upper_bound,
            "contained": rep.all_contained,
        },
        detail=(
            f"trader a at {rep.trader_a:.4f}, trader b at {rep.trader_b:.4f}, "
            f"bounds [{rep.lower_bound:.4f}, {rep.upper_bound:.4f}]"
        ),
    )


def criterion_12_inequalities() -> Check:
    """Integral inequalities on the scenario-sup estimator.

    The inequalities hold for every empirical sublinear expectation, so the
    measured violations must sit at rounding level, far inside any
    sampling-noise allowance; the 1-norm must not exceed the 2-norm on any
    battery member.
    """
    n_steps, n_paths = 400, 1500
    part = Partition.uniform(1.0, n_steps)
    per_scenario = []
    for idx, vol in enumerate((0.5, 0.75, 1.0)):
        control = ScenarioControl.constant(part, [[vol]])
        b_term = np.empty(n_paths)
        qv_term = np.empty(n_paths)
        integrals = np.empty(n_paths)
        for i in range(n_paths):
            path = generate_path(control, seed=300 + idx, path_index=i)
            inc = path.increments_along(AXIS)
            levels = path.levels_along(AXIS)
            b_term[i] = levels[-1]
            qv_term[i] = float(np.dot(inc, inc))
            integrals[i] = float(np.dot(levels[:-1], inc))
        per_scenario.append((b_term, qv_term, integrals))

    members = (
        ([s[0] for s in per_scenario], [s[1] for s in per_scenario]),
        ([np.abs(s[0]) for s in per_scenario], [s[2] for s in per_scenario]),
        ([s[0] ** 2 for s in per_scenario], [1.0 + s[0] for s in per_scenario]),
    )
    worst = -math.inf
    norm_ok = True
    for xs, ys in members:
        report = verify_appendix_inequalities([(xs, ys)], 2.0, 2.0)
        worst = max(worst, report.worst())
        for side in (xs, ys):
            norm_ok = norm_ok and lp_norm(side, 1.0) <= lp_norm(side, 2.0) + 1e-12
    passed = worst <= 1e-10 and norm_ok
    return Check(
        name="ensemble_inequalities",
        passed=passed,
        measured={"worst_violation": worst, "norm_monotonicity": norm_ok},
        detail=f"worst inequality violation {worst:.2e}",
    )


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

SUITES = {
    "acceptance": (
        criterion_1_moments,
        criterion_2_payoffs,
        criterion_3_semigroup,
        criterion_4_axioms,
        criterion_5_quadratic_variation,
        criterion_6_integral_contracts,
        criterion_7_ito_formula,
        criterion_8_compensator,
        criterion_9_jensen,
        criterion_10_sde,
        criterion_11_risk_demo,
        criterion_12_inequalities,
    ),
    "axioms": (criterion_4_axioms,),
    "calculus": (
        criterion_5_quadratic_variation,
        criterion_6_integral_contracts,
        criterion_7_ito_formula,
    ),
    "sde": (criterion_10_sde,),
    "jensen": (criterion_8_compensator, criterion_9_jensen),
}

SUITE_NAMES = tuple(SUITES)


def run_suite(
    name: str,
    *,
    battery_dicts: Optional[Sequence[dict]] = None,
    tolerance: Optional[float] = None,
) -> list[Check]:
    """Run one named suite without short-circuiting, newest check last.

    ``battery_dicts`` and ``tolerance`` reach the expectation-axiom
    criterion only; every other criterion pins its own parameters.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite: {name!r}")
    checks = []
    for fn in SUITES[name]:
        if fn is criterion_4_axioms:
            kwargs = {}
            if battery_dicts:
                kwargs["battery_dicts"] = battery_dicts
            if tolerance is not None:
                kwargs["tolerance"] = tolerance
            checks.append(fn(**kwargs))
        else:
            checks.append(fn())
    return checks
