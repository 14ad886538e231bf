"""Worst-case expectations of path functionals on finitely many time points.

A functional here looks at the driving path through one direction and at up
to three times, X = phi((a, B_t1), ..., (a, B_tm)). Its expectation is
computed by backward recursion: the last coordinate is integrated out by a
one-dimensional heat-flow solve over the increment, leaving a functional of
one fewer coordinate, until a scalar remains. Stopping the recursion early
yields the conditional expectation given the path up to an intermediate
time, sampled on a grid over the observed coordinates.

Each nested solve runs in increment coordinates: for a fixed observed
prefix ending at value v, the grid covers v + z with z spanning the
reachable range of the next increment, and the result is read off at the
exact center node z = 0. This keeps accuracy uniform across the whole
prefix grid instead of degrading toward its edges.

The module also hosts the sample-ensemble norm machinery: the worst-case
expectation is estimated from below by the maximum of per-scenario sample
means, and the classical integral inequalities transfer to that estimator
scenario by scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .pde import SolverConfig, advance_values, evaluate_pt
from .uncertainty import Direction, UncertaintySet, sigma_of

__all__ = [
    "CylinderFunctional",
    "ConditionalValue",
    "PropertyCheck",
    "PropertyReport",
    "expect",
    "conditional_expect",
    "lp_norm",
    "scenario_sup_mean",
    "default_axiom_battery",
    "functional_from_template",
    "battery_from_dicts",
    "verify_expectation_axioms",
    "verify_appendix_inequalities",
]

MAX_COORDINATES = 3

# Measurable factors in the product-split law must be bounded; values are
# clamped to this range before the positive/negative split.
ETA_CLAMP = 1e6

_DEGENERATE_RATE = 1e-12


@dataclass(frozen=True)
class CylinderFunctional:
    """phi((a, B_t1), ..., (a, B_tm)) with strictly increasing positive times.

    ``phi`` must accept m numpy arrays (broadcastable) and return an array of
    the broadcast shape. ``growth_tag`` records whether phi is bounded
    Lipschitz or polynomially growing; polynomial growth widens no grids by
    itself but is surfaced in reports.
    """

    times: tuple[float, ...]
    direction: Direction
    phi: Callable[..., np.ndarray]
    growth_tag: Literal["bounded_lipschitz", "polynomial"] = "bounded_lipschitz"

    def __post_init__(self) -> None:
        if not (1 <= len(self.times) <= MAX_COORDINATES):
            raise ValueError(
                f"functional must use 1..{MAX_COORDINATES} times, got {len(self.times)}"
            )
        prev = 0.0
        for t in self.times:
            if not (math.isfinite(t) and t > prev):
                raise ValueError(
                    f"times must be finite, positive and strictly increasing, got {self.times}"
                )
            prev = t
        if self.growth_tag not in ("bounded_lipschitz", "polynomial"):
            raise ValueError(f"unknown growth tag: {self.growth_tag!r}")

    @property
    def m(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ConditionalValue:
    """A conditional expectation as a function of the observed coordinates.

    ``value_fn`` interpolates the sampled values; ``grids`` holds the node
    arrays (one per observed coordinate) and ``values`` the samples, with
    one axis per coordinate.
    """

    at_time: float
    value_fn: Callable[..., np.ndarray]
    grids: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.at_time < 0.0 or not math.isfinite(self.at_time):
            raise ValueError(f"at_time must be nonnegative and finite, got {self.at_time}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != tuple(g.size for g in self.grids):
            raise ValueError(
                f"values shape {vals.shape} does not match grid sizes "
                f"{tuple(g.size for g in self.grids)}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("conditional values must be finite on the grid")


@dataclass(frozen=True)
class PropertyCheck:
    """Worst signed violation of one named law over its battery cases."""

    name: str
    worst_violation: float
    cases: int


@dataclass(frozen=True)
class PropertyReport:
    checks: tuple[PropertyCheck, ...]

    def worst(self) -> float:
        return max(c.worst_violation for c in self.checks)

    def by_name(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Backward recursion
# ---------------------------------------------------------------------------


def _directional_rates(gamma: UncertaintySet, a: Direction) -> tuple[float, float]:
    rank_one = a.rank_one()
    return sigma_of(gamma, rank_one), sigma_of(gamma, rank_one.scaled(-1.0))


def _odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def _centered_nodes(radius: float, n: int) -> np.ndarray:
    n = _odd(max(n, 3))
    dx = 2.0 * radius / (n - 1)
    return (np.arange(n) - (n - 1) // 2) * dx


def _interp_fn(nodes: np.ndarray, vals: np.ndarray) -> Callable:
    def fn(x):
        return np.interp(np.asarray(x, dtype=float), nodes, vals)

    return fn


def _interp_fn_2d(nodes_a: np.ndarray, nodes_b: np.ndarray, vals: np.ndarray) -> Callable:
    rgi = RegularGridInterpolator((nodes_a, nodes_b), vals, method="linear")

    def fn(x, y):
        x = np.clip(np.asarray(x, dtype=float), nodes_a[0], nodes_a[-1])
        y = np.clip(np.asarray(y, dtype=float), nodes_b[0], nodes_b[-1])
        xb, yb = np.broadcast_arrays(x, y)
        pts = np.stack([xb.ravel(), yb.ravel()], axis=-1)
        return rgi(pts).reshape(xb.shape)

    return fn


@dataclass(frozen=True)
class _ReductionPlan:
    """Grids shared by the stages of one backward recursion."""

    s_plus: float
    s_minus: float
    increments: tuple[float, ...]
    prefix_nodes: tuple[np.ndarray, ...]
    z_nodes: tuple[np.ndarray, ...]


def _make_plan(
    x_rv: CylinderFunctional,
    gamma: UncertaintySet,
    cfg: SolverConfig,
    prefix_points: int,
    nested_points: int,
) -> _ReductionPlan:
    s_plus, s_minus = _directional_rates(gamma, x_rv.direction)
    rate = max(s_plus, -s_minus)
    times = x_rv.times
    increments = (times[0],) + tuple(
        times[i] - times[i - 1] for i in range(1, len(times))
    )
    lengths = [math.sqrt(rate * tau) for tau in increments]
    mult = cfg.radius_multiplier
    prefix_nodes = []
    reach = 0.0
    for k in range(len(times)):
        reach += lengths[k]
        # the grid for coordinate k+1 must cover every prefix value plus the
        # next increment's span, so radii accumulate along the mesh
        prefix_nodes.append(_centered_nodes(max(mult * reach, 1e-3), prefix_points))
    z_nodes = tuple(
        _centered_nodes(max(mult * lengths[j], 1e-3), nested_points)
        for j in range(len(times))
    )
    return _ReductionPlan(
        s_plus=s_plus,
        s_minus=s_minus,
        increments=increments,
        prefix_nodes=tuple(prefix_nodes),
        z_nodes=z_nodes,
    )


def _eliminate_last(
    plan: _ReductionPlan,
    cfg: SolverConfig,
    data: np.ndarray,
    j: int,
) -> np.ndarray:
    """Advance sampled data over increment j and read the center z column.

    ``data`` has shape (..., nz) with the last axis the increment coordinate
    of the solve; returns the (...) array of values at z = 0.
    """
    nodes = plan.z_nodes[j]
    dz = nodes[1] - nodes[0]
    evolved, _diag = advance_values(
        data, plan.s_plus, plan.s_minus, dz, plan.increments[j], cfg
    )
    return evolved[..., nodes.size // 2]


def _reduce(
    x_rv: CylinderFunctional,
    gamma: UncertaintySet,
    cfg: SolverConfig,
    keep: int,
    prefix_points: int,
    nested_points: int,
) -> tuple[_ReductionPlan, np.ndarray]:
    """Integrate out coordinates beyond ``keep``; returns sampled values.

    The result has one axis per kept coordinate (shape () when keep == 0).
    """
    plan = _make_plan(x_rv, gamma, cfg, prefix_points, nested_points)
    m = x_rv.m
    phi = x_rv.phi

    if max(plan.s_plus, -plan.s_minus) < _DEGENERATE_RATE:
        # no diffusion: the path sits still, every future coordinate equals
        # the last observed one
        if keep == 0:
            zeros = [np.asarray(0.0)] * m
            return plan, np.asarray(float(phi(*zeros)))
        grids = plan.prefix_nodes[:keep]
        mesh = np.meshgrid(*grids, indexing="ij") if keep > 1 else [grids[0]]
        args = list(mesh) + [mesh[-1]] * (m - keep)
        vals = np.asarray(phi(*args), dtype=float)
        return plan, np.broadcast_to(vals, tuple(g.size for g in grids)).copy()

    # sample the deepest stage directly from phi
    if m == 1:
        current = None  # handled by the caller via the point evaluator
    elif m == 2:
        x1 = plan.prefix_nodes[0][:, None]
        z = plan.z_nodes[1][None, :]
        data = np.asarray(phi(x1, x1 + z), dtype=float)
        data = np.broadcast_to(data, (x1.size, z.size)).copy()
        _check_finite(data)
        current = _eliminate_last(plan, cfg, data, 1)  # shape (n1,)
    else:  # m == 3
        x1 = plan.prefix_nodes[0][:, None, None]
        x2 = plan.prefix_nodes[1][None, :, None]
        z = plan.z_nodes[2][None, None, :]
        data = np.asarray(phi(x1, x2, x2 + z), dtype=float)
        data = np.broadcast_to(data, (x1.size, x2.shape[1], z.shape[2])).copy()
        _check_finite(data)
        current = _eliminate_last(plan, cfg, data, 2)  # shape (n1, n2)
        if keep == 2:
            return plan, current
        # eliminate the middle coordinate: rows need values at x1 + z
        x1n = plan.prefix_nodes[0]
        zn = plan.z_nodes[1]
        data = np.empty((x1n.size, zn.size))
        for i, xv in enumerate(x1n):
            data[i] = np.interp(xv + zn, plan.prefix_nodes[1], current[i])
        current = _eliminate_last(plan, cfg, data, 1)  # shape (n1,)

    if keep == 1:
        if m == 1:
            raise AssertionError("keep == 1 is unreachable for one-coordinate functionals")
        return plan, current

    # keep == 0: integrate the first coordinate from time 0
    if m == 1:
        raise AssertionError("the single-coordinate case is served by the point evaluator")
    nodes = plan.prefix_nodes[0]
    dz = nodes[1] - nodes[0]
    evolved, _diag = advance_values(
        current, plan.s_plus, plan.s_minus, dz, plan.increments[0], cfg
    )
    return plan, np.asarray(evolved[nodes.size // 2])


def _check_finite(data: np.ndarray) -> None:
    if not np.all(np.isfinite(data)):
        raise ValueError("functional produced non-finite values on the evaluation grid")


def expect(
    x_rv: CylinderFunctional,
    gamma: UncertaintySet,
    cfg: Optional[SolverConfig] = None,
    *,
    prefix_points: int = 201,
    nested_points: int = 121,
) -> float:
    """Worst-case expectation of the functional under the volatility set.

    Single-coordinate functionals go through the point evaluator (the same
    code path as direct heat-flow evaluation); longer meshes run the
    backward recursion over increment grids.
    """
    if cfg is None:
        cfg = SolverConfig()
    if x_rv.m == 1:
        return evaluate_pt(gamma, x_rv.direction, x_rv.phi, x_rv.times[0], 0.0, cfg)
    _plan, value = _reduce(x_rv, gamma, cfg, 0, prefix_points, nested_points)
    return float(value)


def conditional_expect(
    x_rv: CylinderFunctional,
    k: int,
    gamma: UncertaintySet,
    cfg: Optional[SolverConfig] = None,
    *,
    prefix_points: int = 201,
    nested_points: int = 121,
) -> ConditionalValue:
    """Expectation given the path up to the k-th mesh time, 1 <= k < m.

    Returns the sampled function of the observed coordinates; its grid
    covers the reachable range of those coordinates under the top
    volatility.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not (1 <= k < x_rv.m):
        raise ValueError(f"k must satisfy 1 <= k < {x_rv.m}, got {k}")
    s_plus, s_minus = _directional_rates(gamma, x_rv.direction)
    if max(s_plus, -s_minus) < _DEGENERATE_RATE:
        raise ValueError("conditional expectation needs a nonzero diffusion direction")
    plan, values = _reduce(x_rv, gamma, cfg, k, prefix_points, nested_points)
    grids = tuple(plan.prefix_nodes[:k])
    if k == 1:
        fn = _interp_fn(grids[0], values)
    else:
        fn = _interp_fn_2d(grids[0], grids[1], values)
    return ConditionalValue(
        at_time=x_rv.times[k - 1], value_fn=fn, grids=grids, values=values
    )


# ---------------------------------------------------------------------------
# Ensemble norms
# ---------------------------------------------------------------------------


def scenario_sup_mean(scenario_samples: Sequence[np.ndarray]) -> float:
    """Largest per-scenario sample mean: the ensemble estimate of the
    worst-case expectation."""
    if len(scenario_samples) == 0:
        raise ValueError("need at least one scenario")
    means = []
    for s in scenario_samples:
        arr = np.asarray(s, dtype=float)
        if arr.size == 0:
            raise ValueError("scenario sample sets must be nonempty")
        means.append(float(np.mean(arr)))
    return max(means)


def lp_norm(scenario_samples: Sequence[np.ndarray], p: float) -> float:
    """(sup-over-scenarios E|X|^p)^(1/p) on an empirical ensemble."""
    if not (math.isfinite(p) and p >= 1.0):
        raise ValueError(f"p must be at least 1, got {p}")
    moment = scenario_sup_mean(
        [np.abs(np.asarray(s, dtype=float)) ** p for s in scenario_samples]
    )
    return moment ** (1.0 / p)


# ---------------------------------------------------------------------------
# Law batteries
# ---------------------------------------------------------------------------


def default_axiom_battery(direction: Optional[Direction] = None) -> list[
    tuple[CylinderFunctional, CylinderFunctional]
]:
    """Functional pairs exercising every law: each pair shares its time mesh
    and direction, and the second member dominates the first pointwise."""
    a = direction if direction is not None else Direction.of(1.0)

    def pair(times, lo, hi, tag="polynomial"):
        return (
            CylinderFunctional(times=times, direction=a, phi=lo, growth_tag=tag),
            CylinderFunctional(times=times, direction=a, phi=hi, growth_tag=tag),
        )

    return [
        pair((1.0,), lambda x: np.abs(x), lambda x: np.abs(x) + 0.5 + 0.2 * np.sin(x)),
        pair(
            (0.5, 1.0),
            lambda x, y: x * (y - x),
            lambda x, y: x * (y - x) + 0.3 * (y - x) ** 2 + 0.1,
        ),
        pair(
            (0.5, 1.0),
            lambda x, y: np.maximum(y, 0.0) - np.abs(x),
            lambda x, y: np.maximum(y, 0.0) + 0.25 * np.cos(x),
        ),
        pair(
            (0.5, 1.0, 1.5),
            lambda x, y, z: (z - y) ** 2 - 0.5 * np.abs(y - x),
            lambda x, y, z: (z - y) ** 2 + 0.2 * np.sin(x) + 0.7,
        ),
    ]


def functional_from_template(
    template: str,
    times: Sequence[float],
    *,
    direction: Optional[Direction] = None,
    coeffs: Optional[Sequence[float]] = None,
    strike: float = 0.0,
    power: int = 1,
    shift: float = 0.0,
) -> CylinderFunctional:
    """Build a functional from a named symbolic template.

    Supported templates, with ``last`` the final coordinate and ``incr`` the
    last increment of the mesh:

    - ``poly_last``: sum of coeffs[j] * last**j
    - ``call``: max(last - strike, 0) + shift
    - ``put``: max(strike - last, 0) + shift
    - ``abs_last``: abs(last) + shift
    - ``increment_power``: incr**power + shift
    - ``increment_product``: first * incr**power + shift
    """
    a = direction if direction is not None else Direction.of(1.0)
    times = tuple(float(t) for t in times)

    if template == "poly_last":
        if coeffs is None:
            raise ValueError("poly_last needs coeffs")
        cs = tuple(float(c) for c in coeffs)

        def phi(*args):
            y = args[-1]
            acc = np.zeros_like(np.asarray(y, dtype=float))
            for j, c in enumerate(cs):
                acc = acc + c * np.asarray(y, dtype=float) ** j
            return acc

        tag = "polynomial"
    elif template == "call":
        phi = lambda *args: np.maximum(args[-1] - strike, 0.0) + shift
        tag = "bounded_lipschitz"
    elif template == "put":
        phi = lambda *args: np.maximum(strike - args[-1], 0.0) + shift
        tag = "bounded_lipschitz"
    elif template == "abs_last":
        phi = lambda *args: np.abs(args[-1]) + shift
        tag = "bounded_lipschitz"
    elif template == "increment_power":
        if len(times) < 2:
            raise ValueError("increment templates need at least two times")
        phi = lambda *args: (args[-1] - args[-2]) ** power + shift
        tag = "polynomial"
    elif template == "increment_product":
        if len(times) < 2:
            raise ValueError("increment templates need at least two times")
        phi = lambda *args: args[0] * (args[-1] - args[-2]) ** power + shift
        tag = "polynomial"
    else:
        raise ValueError(f"unknown functional template: {template!r}")
    return CylinderFunctional(times=times, direction=a, phi=phi, growth_tag=tag)


def battery_from_dicts(
    entries: Sequence[dict], direction: Optional[Direction] = None
) -> list[tuple[CylinderFunctional, CylinderFunctional]]:
    """Assemble a battery from structured pair descriptions.

    Each entry carries ``times`` plus ``lower`` and ``upper`` template
    tables (keys: template, and that template's parameters). Both members
    share the entry's times and direction.
    """
    battery = []
    for entry in entries:
        if "times" not in entry or "lower" not in entry or "upper" not in entry:
            raise ValueError("battery entries need times, lower and upper")
        times = entry["times"]
        pair = []
        for side in ("lower", "upper"):
            desc = dict(entry[side])
            name = desc.pop("template", None)
            if name is None:
                raise ValueError(f"{side} table needs a template name")
            pair.append(
                functional_from_template(name, times, direction=direction, **desc)
            )
        battery.append((pair[0], pair[1]))
    return battery


def _phi_leq(
    f: CylinderFunctional, g: CylinderFunctional, span: float, probes: int = 7
) -> bool:
    axes = [np.linspace(-span, span, probes)] * f.m
    mesh = np.meshgrid(*axes, indexing="ij")
    return bool(np.all(np.asarray(f.phi(*mesh)) <= np.asarray(g.phi(*mesh)) + 1e-12))


def _with_phi(base: CylinderFunctional, phi: Callable) -> CylinderFunctional:
    return CylinderFunctional(
        times=base.times, direction=base.direction, phi=phi, growth_tag="polynomial"
    )


def verify_expectation_axioms(
    gamma: UncertaintySet,
    battery: Sequence[tuple[CylinderFunctional, CylinderFunctional]],
    cfg: Optional[SolverConfig] = None,
    *,
    prefix_points: int = 101,
    nested_points: int = 101,
) -> PropertyReport:
    """Run the sublinear-expectation laws over a battery of functional pairs.

    Each check reports its worst signed violation (positive means the law
    failed by that much). Unconditional laws run on every pair;
    conditional laws run on the pairs with at least two mesh times; the
    nested-mesh laws need a three-time pair.
    """
    if cfg is None:
        cfg = SolverConfig()
    if len(battery) == 0:
        raise ValueError("battery must be nonempty")
    kw = dict(prefix_points=prefix_points, nested_points=nested_points)

    # battery members recur across laws; memoize their solves. Entries keep
    # a reference to the functional so an id is never recycled mid-run.
    ev_cache: dict[int, tuple[CylinderFunctional, float]] = {}
    cond_cache: dict[tuple[int, int], tuple[CylinderFunctional, ConditionalValue]] = {}

    def ev(f: CylinderFunctional) -> float:
        key = id(f)
        if key not in ev_cache:
            ev_cache[key] = (f, expect(f, gamma, cfg, **kw))
        return ev_cache[key][1]

    def cond(f: CylinderFunctional, k: int = 1) -> ConditionalValue:
        key = (id(f), k)
        if key not in cond_cache:
            cond_cache[key] = (f, conditional_expect(f, k, gamma, cfg, **kw))
        return cond_cache[key][1]

    s_plus, _ = _directional_rates(gamma, battery[0][0].direction)
    checks: list[PropertyCheck] = []

    def add(name: str, violations: Sequence[float]) -> None:
        worst = max(violations) if violations else float("-inf")
        checks.append(PropertyCheck(name=name, worst_violation=worst, cases=len(violations)))

    # constants: E[c] == c through a full solve
    v = []
    for c in (-1.5, 0.0, 2.25):
        base = battery[0][0]
        got = ev(_with_phi(base, lambda *args, c=c: np.full_like(args[0], c)))
        v.append(abs(got - c))
    add("constants_preserved", v)

    # monotonicity on dominated pairs
    v = []
    for f, g in battery:
        span = 3.0 * math.sqrt(max(s_plus, 1e-12) * f.times[-1])
        if _phi_leq(f, g, span):
            v.append(ev(f) - ev(g))
    add("monotonicity", v)

    # subadditivity, homogeneity, translation on every pair
    sub, hom, tra = [], [], []
    for f, g in battery:
        ef, eg = ev(f), ev(g)
        esum = ev(_with_phi(f, lambda *args, p=f.phi, q=g.phi: p(*args) + q(*args)))
        sub.append(esum - (ef + eg))
        for lam in (0.5, 2.0):
            got = ev(_with_phi(f, lambda *args, p=f.phi, lam=lam: lam * p(*args)))
            hom.append(abs(got - lam * ef))
        for c in (-0.7, 1.3):
            got = ev(_with_phi(f, lambda *args, p=f.phi, c=c: p(*args) + c))
            tra.append(abs(got - (ef + c)))
    add("subadditivity", sub)
    add("positive_homogeneity", hom)
    add("constant_translation", tra)

    pairs2 = [(f, g) for f, g in battery if f.m >= 2]
    # conditional identity: a functional of the first coordinate only passes
    # through conditioning unchanged
    v = []
    for f, _ in pairs2:
        eta = lambda x: np.sin(x) + 0.3 * x
        cv = cond(_with_phi(f, lambda *args, e=eta: e(args[0]) + 0.0 * args[-1]))
        v.append(float(np.max(np.abs(cv.values - eta(cv.grids[0])))))
    add("conditional_identity", v)

    # conditional monotonicity and subadditivity, pointwise on the grid
    mono, csub = [], []
    for f, g in pairs2:
        cf, cg = cond(f), cond(g)
        span = 3.0 * math.sqrt(max(s_plus, 1e-12) * f.times[-1])
        if _phi_leq(f, g, span):
            mono.append(float(np.max(cf.values - cg.values)))
        cdiff = cond(_with_phi(f, lambda *args, p=f.phi, q=g.phi: p(*args) - q(*args)))
        csub.append(float(np.max(cf.values - cg.values - cdiff.values)))
    add("conditional_monotonicity", mono)
    add("conditional_subadditivity", csub)

    # tower: scalar form E[E[X|.]] == E[X] for every conditionable k
    v = []
    nested_gap: list[float] = []
    for f, _ in pairs2:
        for k in range(1, f.m):
            cv = cond(f, k)
            if k == 1:
                outer = CylinderFunctional(
                    times=(f.times[0],),
                    direction=f.direction,
                    phi=cv.value_fn,
                    growth_tag="polynomial",
                )
            else:
                outer = CylinderFunctional(
                    times=f.times[:2],
                    direction=f.direction,
                    phi=cv.value_fn,
                    growth_tag="polynomial",
                )
            v.append(abs(ev(outer) - ev(f)))
        if f.m == 3:
            # nested meshes: conditioning at the middle time then at the
            # first must match conditioning at the first directly
            mid = cond(f, 2)
            two_step = cond(
                CylinderFunctional(
                    times=f.times[:2],
                    direction=f.direction,
                    phi=mid.value_fn,
                    growth_tag="polynomial",
                )
            )
            direct = cond(f, 1)
            half = two_step.grids[0].size // 4
            sl = slice(half, -half)  # compare on the shared inner region
            gap = np.max(
                np.abs(
                    two_step.values[sl]
                    - np.interp(two_step.grids[0][sl], direct.grids[0], direct.values)
                )
            )
            nested_gap.append(float(gap))
    add("tower_scalar", v)
    add("tower_nested", nested_gap)

    # translation by a function of the observed coordinate
    v = []
    for f, _ in pairs2:
        eta = lambda x: 0.4 * np.cos(x) - 0.2 * x
        shifted = cond(_with_phi(f, lambda *args, p=f.phi, e=eta: p(*args) + e(args[0])))
        base = cond(f)
        v.append(float(np.max(np.abs(shifted.values - (base.values + eta(base.grids[0]))))))
    add("measurable_translation", v)

    # bounded measurable factor splits into positive and negative parts
    v = []
    for f, _ in pairs2:
        eta = lambda x: np.clip(np.sin(2.0 * x) - 0.2, -ETA_CLAMP, ETA_CLAMP)
        prod = cond(_with_phi(f, lambda *args, p=f.phi, e=eta: e(args[0]) * p(*args)))
        plus = cond(f)
        minus = cond(_with_phi(f, lambda *args, p=f.phi: -p(*args)))
        ev_eta = eta(prod.grids[0])
        want = np.maximum(ev_eta, 0.0) * plus.values + np.minimum(ev_eta, 0.0) * (
            -minus.values
        )
        v.append(float(np.max(np.abs(prod.values - want))))
    add("measurable_factor_split", v)

    # functionals of future increments ignore the observed prefix
    v = []
    psis = [lambda u: np.maximum(u, 0.0), lambda u: u**2, lambda u: np.abs(u)]
    f0 = pairs2[0][0] if pairs2 else None
    if f0 is not None:
        t1, t2 = f0.times[0], f0.times[1]
        for psi in psis:
            cv = cond(
                CylinderFunctional(
                    times=(t1, t2),
                    direction=f0.direction,
                    phi=lambda x, y, ps=psi: ps(y - x),
                    growth_tag="polynomial",
                )
            )
            scalar = expect(
                CylinderFunctional(
                    times=(t2 - t1,),
                    direction=f0.direction,
                    phi=psi,
                    growth_tag="polynomial",
                ),
                gamma,
                cfg,
                **kw,
            )
            v.append(float(np.max(np.abs(cv.values - scalar))))
    add("independence_of_future_increments", v)

    # increments are stationary in law
    v = []
    if f0 is not None:
        for psi in psis:
            for shift, span in [(0.25, 0.5), (0.5, 1.0)]:
                moved = expect(
                    CylinderFunctional(
                        times=(shift, shift + span),
                        direction=f0.direction,
                        phi=lambda x, y, ps=psi: ps(y - x),
                        growth_tag="polynomial",
                    ),
                    gamma,
                    cfg,
                    **kw,
                )
                fresh = expect(
                    CylinderFunctional(
                        times=(span,),
                        direction=f0.direction,
                        phi=psi,
                        growth_tag="polynomial",
                    ),
                    gamma,
                    cfg,
                    **kw,
                )
                v.append(abs(moved - fresh))
    add("stationary_increments", v)

    return PropertyReport(checks=tuple(checks))


def verify_appendix_inequalities(
    ensemble: Sequence[tuple[Sequence[np.ndarray], Sequence[np.ndarray]]],
    p: float,
    q: float,
) -> PropertyReport:
    """Integral inequalities on the scenario-sup estimator.

    ``ensemble`` pairs up per-scenario sample arrays for X and Y; samples
    within a scenario are paired (common draws), so products and sums are
    well defined sample by sample. Checks the power-mean bound
    E|X+Y|^r <= C_r (E|X|^r + E|Y|^r) for r in {1, 2, p}, the conjugate
    product bound E|XY| <= |X|_p |Y|_q, and the triangle inequality for
    the p-norm.
    """
    if not (p > 1.0 and q > 1.0):
        raise ValueError(f"exponents must exceed 1, got p={p}, q={q}")
    if abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
        raise ValueError(f"exponents are not conjugate: 1/{p} + 1/{q} != 1")
    if len(ensemble) == 0:
        raise ValueError("ensemble must be nonempty")

    power_v, holder_v, triangle_v = [], [], []
    for xs, ys in ensemble:
        xs = [np.asarray(s, dtype=float) for s in xs]
        ys = [np.asarray(s, dtype=float) for s in ys]
        if len(xs) != len(ys) or any(a.shape != b.shape for a, b in zip(xs, ys)):
            raise ValueError("X and Y must share the scenario layout")
        sums = [a + b for a, b in zip(xs, ys)]
        for r in sorted({1.0, 2.0, float(p)}):
            c_r = max(1.0, 2.0 ** (r - 1.0))
            lhs = scenario_sup_mean([np.abs(s) ** r for s in sums])
            rhs = c_r * (
                scenario_sup_mean([np.abs(s) ** r for s in xs])
                + scenario_sup_mean([np.abs(s) ** r for s in ys])
            )
            power_v.append(lhs - rhs)
        holder_v.append(
            scenario_sup_mean([np.abs(a * b) for a, b in zip(xs, ys)])
            - lp_norm(xs, p) * lp_norm(ys, q)
        )
        triangle_v.append(lp_norm(sums, p) - (lp_norm(xs, p) + lp_norm(ys, p)))
    return PropertyReport(
        checks=(
            PropertyCheck("power_mean_bound", max(power_v), len(power_v)),
            PropertyCheck("conjugate_product_bound", max(holder_v), len(holder_v)),
            PropertyCheck("norm_triangle", max(triangle_v), len(triangle_v)),
        )
    )
