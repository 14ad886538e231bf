"""Martingale defects and convexity certificates for the worst-case operator.

A process assembled from a stochastic integral and a quadratic-variation
integral needs a deterministic drain before the worst-case conditional
expectation leaves it flat. The drain rate is the worst-case quadratic
weight of the variation coefficient, ``sigma_of(eta)`` per unit time, and
the flatness is one-sided in an essential way: the mirrored process keeps a
strictly positive defect whenever the volatility interval has interior.
The checks below measure both effects through the conditional solver, and
a probe battery certifies the generator-compatible notion of convexity
that decides the direction of the Jensen comparison.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial

from .expectation import CylinderFunctional, conditional_expect, expect
from .pde import SolverConfig, evaluate_pt
from .uncertainty import (
    DiagonalBox,
    Direction,
    SymMatrix,
    UncertaintySet,
    g_value,
    sigma_of,
)

__all__ = [
    "CONDITIONAL_TOL",
    "ScalarFunction2",
    "ConvexityReport",
    "JensenReport",
    "StepMatrixProcess",
    "MartingaleReport",
    "SubmartingaleReport",
    "scalar_function_from_name",
    "default_probe_battery",
    "is_generator_convex",
    "jensen_check",
    "compensated_martingale_check",
    "negated_martingale_gap",
    "submartingale_check",
]

# Conditional identities inherit the grid error of the evolution scheme, so
# the default tolerance matches the one observed in the grid-convergence
# study rather than the much tighter algebraic floors.
CONDITIONAL_TOL = 5e-3

_CONVEXITY_FLOOR = -1e-10


@dataclass(frozen=True)
class ScalarFunction2:
    """A twice differentiable scalar function with supplied derivatives.

    ``fn``, ``grad`` and ``curv`` must each map arrays to arrays of the
    same shape. No symbolic differentiation happens anywhere; wrong
    derivatives produce wrong verdicts, so ``spot_check`` offers a cheap
    finite-difference consistency pass.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    curv: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    def __post_init__(self) -> None:
        for name, f in (("fn", self.fn), ("grad", self.grad), ("curv", self.curv)):
            if not callable(f):
                raise ValueError(f"{name} must be callable, derivatives are required")

    def spot_check(self, lo: float = -3.0, hi: float = 3.0, n: int = 201) -> float:
        """Confirm finiteness on [lo, hi] and that the supplied derivatives
        track finite differences of their antiderivatives; returns the
        largest difference quotient of ``curv`` as a Lipschitz estimate.
        """
        if not (lo < hi) or n < 3:
            raise ValueError("need lo < hi and at least three sample points")
        ys = np.linspace(lo, hi, n)
        vals = {}
        for name, f in (("fn", self.fn), ("grad", self.grad), ("curv", self.curv)):
            out = np.asarray(f(ys), dtype=float)
            if out.shape != ys.shape or not np.all(np.isfinite(out)):
                raise ValueError(f"{name} must be finite and shape-preserving on the range")
            vals[name] = out
        h = ys[1] - ys[0]
        mid_grad = (vals["fn"][2:] - vals["fn"][:-2]) / (2.0 * h)
        mid_curv = (vals["fn"][2:] - 2.0 * vals["fn"][1:-1] + vals["fn"][:-2]) / (h * h)
        # centered differences carry O(h^2) truncation error relative to the
        # size of the function family, so anything far beyond that is a
        # wrong derivative rather than discretization noise
        scale = 1.0 + max(float(np.max(np.abs(v))) for v in vals.values())
        budget = 25.0 * h * h * scale + 1e-9
        if np.max(np.abs(mid_grad - vals["grad"][1:-1])) > budget:
            raise ValueError("grad disagrees with finite differences of fn")
        if np.max(np.abs(mid_curv - vals["curv"][1:-1])) > 100.0 * budget:
            raise ValueError("curv disagrees with finite differences of fn")
        return float(np.max(np.abs(np.diff(vals["curv"])) / h))


def scalar_function_from_name(
    name: str, coefficients: Optional[Sequence[float]] = None
) -> ScalarFunction2:
    """Catalog of test functions for the convexity and Jensen checks.

    ``poly`` interprets ``coefficients`` in ascending degree order; every
    other name ignores them.
    """
    if name == "poly":
        if coefficients is None or len(coefficients) == 0:
            raise ValueError("poly needs at least one coefficient")
        p = Polynomial(np.asarray(coefficients, dtype=float))
        return ScalarFunction2(p, p.deriv(1), p.deriv(2), label="poly")
    catalog = {
        "linear": (lambda y: y, lambda y: np.ones_like(y), lambda y: np.zeros_like(y)),
        "neg_linear": (
            lambda y: -y,
            lambda y: -np.ones_like(y),
            lambda y: np.zeros_like(y),
        ),
        "square": (lambda y: y * y, lambda y: 2.0 * y, lambda y: np.full_like(y, 2.0)),
        "neg_square": (
            lambda y: -y * y,
            lambda y: -2.0 * y,
            lambda y: np.full_like(y, -2.0),
        ),
        "exp": (np.exp, np.exp, np.exp),
    }
    if name not in catalog:
        known = ", ".join(sorted(catalog) + ["poly"])
        raise ValueError(f"unknown scalar function {name!r}, expected one of {known}")
    fn, grad, curv = catalog[name]
    return ScalarFunction2(fn, grad, curv, label=name)


# ---------------------------------------------------------------------------
# Convexity under the worst-case generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of probing the defining inequality of generator convexity.

    The verdict is a numeric certificate over the probe set only, not a
    proof over all admissible triples.
    """

    label: str
    min_value: float
    n_probes: int
    worst_probe: tuple[float, tuple[float, ...], tuple[tuple[float, ...], ...]]

    @property
    def verdict(self) -> bool:
        return self.min_value >= _CONVEXITY_FLOOR

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "min_value": self.min_value,
            "n_probes": self.n_probes,
            "verdict": self.verdict,
            "worst_probe": {
                "y": self.worst_probe[0],
                "z": list(self.worst_probe[1]),
                "a": [list(row) for row in self.worst_probe[2]],
            },
        }


def default_probe_battery(
    dim: int, y_values: Sequence[float] = (-2.0, -1.0, 0.0, 1.0, 2.0)
) -> list[tuple[float, np.ndarray, SymMatrix]]:
    """Probe triples (y, z, A) for the convexity inequality.

    The inequality is positively homogeneous in the pair (z z^T, A), so
    bounded probes with both orientations already walk the whole constraint
    cone. The zero vector and the zero matrix isolate the two derivative
    weights from each other, which is what catches concave candidates.
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if len(y_values) == 0:
        raise ValueError("need at least one y probe")
    z_list = [np.zeros(dim)]
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        z_list.append(e)
    mats = [SymMatrix.diagonal([0.0] * dim)]
    for i in range(dim):
        d = [0.0] * dim
        d[i] = 1.0
        unit = SymMatrix.diagonal(d)
        mats.append(unit)
        mats.append(unit.scaled(-1.0))
    slope = np.ones(dim) / math.sqrt(dim)
    ramp = SymMatrix.outer(slope)
    mats.append(ramp)
    mats.append(ramp.scaled(-1.0))
    return [
        (float(y), z.copy(), m) for y in y_values for z in z_list for m in mats
    ]


def is_generator_convex(
    h: ScalarFunction2,
    gamma: UncertaintySet,
    probes: Optional[Sequence[tuple[float, np.ndarray, SymMatrix]]] = None,
) -> ConvexityReport:
    """Probe g_value(h'(y) A + h''(y) z z^T) - h'(y) g_value(A) >= 0.

    Returns the smallest probed value and the probe that attains it. A
    verdict of True certifies the inequality on the probes only.
    """
    if probes is None:
        probes = default_probe_battery(gamma.dim)
    probe_list = list(probes)
    if len(probe_list) == 0:
        raise ValueError("probe battery must be nonempty")
    best = math.inf
    worst: Optional[tuple[float, np.ndarray, SymMatrix]] = None
    for y, z, a_mat in probe_list:
        y_arr = np.asarray(y, dtype=float)
        hp = float(np.asarray(h.grad(y_arr)))
        hpp = float(np.asarray(h.curv(y_arr)))
        if not (math.isfinite(hp) and math.isfinite(hpp)):
            raise ValueError(f"derivatives must be finite at y={y}")
        z_arr = np.asarray(z, dtype=float)
        combined = SymMatrix.from_array(
            hp * a_mat.as_array() + hpp * np.outer(z_arr, z_arr)
        )
        value = g_value(gamma, combined) - hp * g_value(gamma, a_mat)
        if value < best:
            best = value
            worst = (y, z_arr, a_mat)
    assert worst is not None
    a_rows = tuple(tuple(row) for row in worst[2].as_array())
    return ConvexityReport(
        label=h.label,
        min_value=best,
        n_probes=len(probe_list),
        worst_probe=(float(worst[0]), tuple(float(v) for v in worst[1]), a_rows),
    )


# ---------------------------------------------------------------------------
# Jensen comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JensenReport:
    """Both sides of the Jensen comparison for one (h, payoff) pair.

    ``delta`` is the unconditional gap E[h(payoff)] - h(E[payoff]);
    ``conditional_min_margin`` is the smallest pointwise gap of the
    conditional version on the prefix grid. ``consistent`` means the signs
    agree with the convexity verdict: a certified-convex h must not show a
    gap below -tol, while a non-convex h carries no requirement.
    """

    h_label: str
    convexity: ConvexityReport
    delta: float
    conditional_min_margin: float
    tol: float

    @property
    def consistent(self) -> bool:
        if not self.convexity.verdict:
            return True
        return self.delta >= -self.tol and self.conditional_min_margin >= -self.tol

    def to_json_dict(self) -> dict:
        return {
            "h": self.h_label,
            "generator_convex": self.convexity.verdict,
            "convexity_min_value": self.convexity.min_value,
            "delta": self.delta,
            "conditional_min_margin": self.conditional_min_margin,
            "tol": self.tol,
            "consistent": self.consistent,
        }


def jensen_check(
    h: ScalarFunction2,
    payoff: Callable[[np.ndarray], np.ndarray],
    gamma: UncertaintySet,
    a: Direction,
    horizon: float,
    cfg: Optional[SolverConfig] = None,
    *,
    prefix_time: Optional[float] = None,
    tol: float = CONDITIONAL_TOL,
    prefix_points: int = 201,
    nested_points: int = 121,
) -> JensenReport:
    """Compare E[h(payoff(B_T))] against h(E[payoff(B_T)]).

    The unconditional gap comes from two heat-flow evaluations at the
    origin. The conditional version conditions at ``prefix_time`` (half the
    horizon by default) and compares pointwise on the prefix grid, which is
    identical for both sides because grid construction depends only on the
    mesh times and rates, never on the integrand.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise ValueError(f"horizon must be positive and finite, got {horizon}")
    s = 0.5 * horizon if prefix_time is None else prefix_time
    if not (0.0 < s < horizon):
        raise ValueError(f"prefix_time must lie strictly inside (0, {horizon}), got {s}")
    convexity = is_generator_convex(h, gamma)

    def outer_payoff(x: np.ndarray) -> np.ndarray:
        return np.asarray(h.fn(np.asarray(payoff(x), dtype=float)), dtype=float)

    e_inner = evaluate_pt(gamma, a, payoff, horizon, 0.0, cfg)
    e_outer = evaluate_pt(gamma, a, outer_payoff, horizon, 0.0, cfg)
    delta = e_outer - float(np.asarray(h.fn(np.asarray(e_inner, dtype=float))))

    kw = {"prefix_points": prefix_points, "nested_points": nested_points}
    inner_two = CylinderFunctional(
        (s, horizon),
        a,
        lambda x, y: np.asarray(payoff(y), dtype=float) + np.zeros_like(x),
        growth_tag="polynomial",
    )
    outer_two = CylinderFunctional(
        (s, horizon),
        a,
        lambda x, y: outer_payoff(y) + np.zeros_like(x),
        growth_tag="polynomial",
    )
    cond_outer = conditional_expect(outer_two, 1, gamma, cfg, **kw)
    cond_inner = conditional_expect(inner_two, 1, gamma, cfg, **kw)
    margins = cond_outer.values - np.asarray(h.fn(cond_inner.values), dtype=float)
    return JensenReport(
        h_label=h.label,
        convexity=convexity,
        delta=float(delta),
        conditional_min_margin=float(np.min(margins)),
        tol=tol,
    )


# ---------------------------------------------------------------------------
# Compensated processes on two-time windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepMatrixProcess:
    """Right-continuous piecewise constant symmetric-matrix path.

    ``values[k]`` applies on [breaks[k], breaks[k+1]) and the final value
    from the last breakpoint onward. The first breakpoint must be zero so
    the path is total on the nonnegative axis.
    """

    breaks: tuple[float, ...]
    values: tuple[SymMatrix, ...]

    def __post_init__(self) -> None:
        if len(self.breaks) == 0 or len(self.breaks) != len(self.values):
            raise ValueError("need one value per breakpoint, both nonempty")
        if self.breaks[0] != 0.0:
            raise ValueError(f"first breakpoint must be 0.0, got {self.breaks[0]}")
        prev = -math.inf
        for b in self.breaks:
            if not math.isfinite(b) or b <= prev:
                raise ValueError("breakpoints must be finite and strictly increasing")
            prev = b
        dims = {v.dim for v in self.values}
        if len(dims) != 1:
            raise ValueError(f"all step values must share one dimension, got {dims}")

    @classmethod
    def of(cls, pairs: Sequence[tuple[float, SymMatrix]]) -> "StepMatrixProcess":
        return cls(
            breaks=tuple(float(p[0]) for p in pairs),
            values=tuple(p[1] for p in pairs),
        )

    @property
    def dim(self) -> int:
        return self.values[0].dim

    def value_at(self, u: float) -> SymMatrix:
        if u < 0.0 or not math.isfinite(u):
            raise ValueError(f"time must be nonnegative and finite, got {u}")
        return self.values[bisect.bisect_right(self.breaks, u) - 1]

    def switch_times_within(self, s: float, t: float) -> list[float]:
        return [b for b in self.breaks if s < b < t]


@dataclass(frozen=True)
class MartingaleReport:
    """Flatness measurements of a compensated process over one time window.

    One entry per constant stretch of the variation coefficient between the
    requested times. ``compensator_rates`` holds the per-stretch drain
    rates, already the worst-case quadratic weight per unit time.
    """

    max_violation: float
    windows: tuple[tuple[float, float], ...]
    window_violations: tuple[float, ...]
    compensator_rates: tuple[float, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_json_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "windows": [list(w) for w in self.windows],
            "window_violations": list(self.window_violations),
            "compensator_rates": list(self.compensator_rates),
            "tol": self.tol,
            "passed": self.passed,
        }


MatrixInput = Union[StepMatrixProcess, SymMatrix, Sequence, np.ndarray, float]


def _as_step(eta: MatrixInput) -> StepMatrixProcess:
    if isinstance(eta, StepMatrixProcess):
        return eta
    if isinstance(eta, SymMatrix):
        return StepMatrixProcess(breaks=(0.0,), values=(eta,))
    arr = np.asarray(eta, dtype=float)
    if arr.ndim == 0:
        return StepMatrixProcess(breaks=(0.0,), values=(SymMatrix.scalar(float(arr)),))
    if arr.ndim == 2:
        return StepMatrixProcess(breaks=(0.0,), values=(SymMatrix.from_array(arr),))
    raise ValueError(
        "variation coefficient must be a scalar, a square matrix or a step process"
    )


def _component_weights(
    mat: SymMatrix, phi: np.ndarray, gamma: UncertaintySet
) -> list[tuple[Direction, float, float]]:
    """Split the window functional into independent scalar components.

    A one-dimensional set needs no splitting. A diagonal box factors into
    independent axes, so a diagonal coefficient matrix splits axis by axis;
    anything richer has no faithful scalar reduction here and is refused.
    """
    d = gamma.dim
    if d == 1:
        return [(Direction.of(1.0), float(phi[0]), mat.entry(0, 0))]
    if not isinstance(gamma, DiagonalBox):
        raise ValueError(
            "multidimensional window checks need a diagonal-box scenario set"
        )
    off = max(
        abs(mat.entry(i, j)) for i in range(d) for j in range(d) if i != j
    )
    if off > 1e-12:
        raise ValueError(
            "diagonal-box window checks need a diagonal variation coefficient, "
            f"largest off-diagonal entry is {off}"
        )
    comps = []
    for i in range(d):
        if gamma.highs[i] == 0.0:
            continue
        e = [0.0] * d
        e[i] = 1.0
        comps.append((Direction(tuple(e)), float(phi[i]), mat.entry(i, i)))
    return comps


def _window_values(
    a: Direction,
    db_weight: float,
    qv_weight: float,
    gamma: UncertaintySet,
    u: float,
    v: float,
    cfg: SolverConfig,
    prefix_points: int,
    nested_points: int,
) -> np.ndarray:
    """Conditional values of db_weight*(increment) + qv_weight*(increment)^2.

    The squared increment carries the same conditional weight as the
    quadratic-variation increment, so this one functional covers both
    integral parts of the window."""
    if db_weight == 0.0 and qv_weight == 0.0:
        return np.zeros(1)
    if u == 0.0:
        one = CylinderFunctional(
            (v,),
            a,
            lambda y: db_weight * y + qv_weight * y * y,
            growth_tag="polynomial",
        )
        return np.asarray(
            [expect(one, gamma, cfg, prefix_points=prefix_points,
                    nested_points=nested_points)]
        )
    two = CylinderFunctional(
        (u, v),
        a,
        lambda x, y: db_weight * (y - x) + qv_weight * (y - x) ** 2,
        growth_tag="polynomial",
    )
    cond = conditional_expect(
        two, 1, gamma, cfg, prefix_points=prefix_points, nested_points=nested_points
    )
    return cond.values


def _validate_window(s: float, t: float) -> None:
    if not (math.isfinite(s) and math.isfinite(t)) or not (0.0 <= s < t):
        raise ValueError(f"need 0 <= s < t with finite endpoints, got s={s}, t={t}")


def compensated_martingale_check(
    eta: MatrixInput,
    phi_vec: Union[Sequence[float], np.ndarray, float],
    gamma: UncertaintySet,
    s: float,
    t: float,
    cfg: Optional[SolverConfig] = None,
    *,
    tol: float = CONDITIONAL_TOL,
    prefix_points: int = 161,
    nested_points: int = 121,
) -> MartingaleReport:
    """Measure the martingale defect of the drained process over [s, t].

    The process accumulates ``phi_vec`` against the driving path,
    ``eta`` against its quadratic variation, and drains at
    ``sigma_of(eta)`` per unit time. Between the given times the
    coefficient path is cut at its switch points and each constant stretch
    is checked through the conditional solver; the report collects the
    largest deviation from flatness per stretch.
    """
    if cfg is None:
        cfg = SolverConfig()
    _validate_window(s, t)
    step = _as_step(eta)
    phi = np.atleast_1d(np.asarray(phi_vec, dtype=float))
    if phi.shape != (gamma.dim,):
        raise ValueError(
            f"phi_vec must have {gamma.dim} components, got shape {phi.shape}"
        )
    if not np.all(np.isfinite(phi)):
        raise ValueError("phi_vec entries must be finite")
    if step.dim != gamma.dim:
        raise ValueError(
            f"coefficient dimension {step.dim} does not match the set dimension {gamma.dim}"
        )
    cuts = [s] + step.switch_times_within(s, t) + [t]
    windows = []
    violations = []
    rates = []
    for u, v in zip(cuts, cuts[1:]):
        mat = step.value_at(u)
        rate = sigma_of(gamma, mat)
        target = rate * (v - u)
        lo_sum = 0.0
        hi_sum = 0.0
        for a, w_db, w_qv in _component_weights(mat, phi, gamma):
            vals = _window_values(
                a, w_db, w_qv, gamma, u, v, cfg, prefix_points, nested_points
            )
            lo_sum += float(np.min(vals))
            hi_sum += float(np.max(vals))
        violations.append(max(abs(lo_sum - target), abs(hi_sum - target)))
        windows.append((u, v))
        rates.append(rate)
    return MartingaleReport(
        max_violation=max(violations),
        windows=tuple(windows),
        window_violations=tuple(violations),
        compensator_rates=tuple(rates),
        tol=tol,
    )


def negated_martingale_gap(
    eta: MatrixInput,
    phi_vec: Union[Sequence[float], np.ndarray, float],
    gamma: UncertaintySet,
    s: float,
    t: float,
    cfg: Optional[SolverConfig] = None,
    *,
    prefix_points: int = 161,
    nested_points: int = 121,
) -> float:
    """Martingale defect of the mirrored process, positive when it fails.

    Mirroring flips both integrands but keeps the original drain, so the
    defect over a window is the conditional value of the flipped functional
    plus the drain. For a variation coefficient with a definite sign this
    equals the spread between the two one-sided quadratic weights times the
    window length; a degenerate volatility interval collapses it to zero.
    """
    if cfg is None:
        cfg = SolverConfig()
    _validate_window(s, t)
    step = _as_step(eta)
    phi = np.atleast_1d(np.asarray(phi_vec, dtype=float))
    if phi.shape != (gamma.dim,) or not np.all(np.isfinite(phi)):
        raise ValueError(f"phi_vec must be finite with {gamma.dim} components")
    if step.dim != gamma.dim:
        raise ValueError(
            f"coefficient dimension {step.dim} does not match the set dimension {gamma.dim}"
        )
    cuts = [s] + step.switch_times_within(s, t) + [t]
    total = 0.0
    for u, v in zip(cuts, cuts[1:]):
        mat = step.value_at(u)
        drain = sigma_of(gamma, mat) * (v - u)
        window = 0.0
        for a, w_db, w_qv in _component_weights(mat, phi, gamma):
            vals = _window_values(
                a, -w_db, -w_qv, gamma, u, v, cfg, prefix_points, nested_points
            )
            window += float(np.min(vals))
        total += window + drain
    return total


# ---------------------------------------------------------------------------
# Submartingale comparison along a mesh
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubmartingaleReport:
    """Pointwise comparison of E[h(E[X|later])|earlier] against h(E[X|earlier])."""

    min_margin: float
    max_abs_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tol

    def to_json_dict(self) -> dict:
        return {
            "min_margin": self.min_margin,
            "max_abs_gap": self.max_abs_gap,
            "tol": self.tol,
            "passed": self.passed,
        }


def submartingale_check(
    h: ScalarFunction2,
    x_rv: CylinderFunctional,
    gamma: UncertaintySet,
    s_index: int,
    t_index: int,
    cfg: Optional[SolverConfig] = None,
    *,
    tol: float = CONDITIONAL_TOL,
    prefix_points: int = 161,
    nested_points: int = 121,
) -> SubmartingaleReport:
    """Check that h applied inside the conditional chain only gains value.

    ``s_index < t_index`` pick mesh times of the functional (1-based prefix
    lengths; ``t_index == m`` means conditioning on everything, which turns
    the left side into the plain conditional of h(X)). Both sides are
    sampled on the same prefix grid, so the comparison is entrywise. For
    certified-convex h the margin must stay above ``-tol``; for linear h
    the max absolute gap doubles as a tower-property check.
    """
    if cfg is None:
        cfg = SolverConfig()
    m = x_rv.m
    if not (1 <= s_index < t_index <= m):
        raise ValueError(
            f"need 1 <= s_index < t_index <= {m}, got s_index={s_index}, t_index={t_index}"
        )
    kw = {"prefix_points": prefix_points, "nested_points": nested_points}

    if t_index == m:
        later = CylinderFunctional(
            x_rv.times,
            x_rv.direction,
            lambda *xs: np.asarray(h.fn(np.asarray(x_rv.phi(*xs), dtype=float)), dtype=float),
            growth_tag="polynomial",
        )
    else:
        inner = conditional_expect(x_rv, t_index, gamma, cfg, **kw)
        later = CylinderFunctional(
            x_rv.times[:t_index],
            x_rv.direction,
            lambda *xs: np.asarray(h.fn(np.asarray(inner.value_fn(*xs), dtype=float)), dtype=float),
            growth_tag="polynomial",
        )
    lhs = conditional_expect(later, s_index, gamma, cfg, **kw)
    outer = conditional_expect(x_rv, s_index, gamma, cfg, **kw)
    if lhs.values.shape != outer.values.shape:
        raise RuntimeError(
            "prefix grids of the two sides disagree, cannot compare pointwise"
        )
    rhs_vals = np.asarray(h.fn(outer.values), dtype=float)
    margins = lhs.values - rhs_vals
    return SubmartingaleReport(
        min_margin=float(np.min(margins)),
        max_abs_gap=float(np.max(np.abs(margins))),
        tol=tol,
    )
