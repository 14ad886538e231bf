"""Euler dynamics under scenario noise and the contraction behind them.

State equations driven by an uncertain path have three differentials: time,
the path itself, and its realized quadratic variation. The Euler step here
uses the realized product of increments for the variation part, which keeps
the discrete second-order calculus identities exact at partition level
instead of holding only in the mean.

The solution map is tested the way the existence argument runs: apply the
integral mapping to two candidate processes and measure the ratio of
exponentially weighted distances. The weight constant is computed from the
Lipschitz bound and the top variance rate; with it, one application must
shrink the squared weighted distance by about half, and iterating drives
successive distances to zero geometrically.

Everything is per scenario: norms are estimated by Monte Carlo means under
a family of admissible controls with common random numbers across all
candidate processes, and the sup over the family stands in for the
worst-case expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .paths import Partition, SamplePath, ScenarioControl, generate_path
from .uncertainty import Direction, UncertaintySet, sigma_of

__all__ = [
    "FieldFn",
    "SdeSpec",
    "StatePath",
    "PicardReport",
    "euler_solve",
    "picard_contraction",
    "ito_residual",
    "sde_from_name",
    "state_path_to_csv_text",
    "lipschitz_spot_check",
]

FieldFn = Callable[[np.ndarray], np.ndarray]

BLOWUP_GUARD = 1e12


@dataclass(frozen=True)
class SdeSpec:
    """Coefficients of a state equation with n-dimensional state.

    Vector fields map state arrays of shape (..., n) to arrays of the same
    shape and must broadcast over leading axes. ``qv_fields[i][j]`` scales
    the realized increment product of driving components i and j;
    ``noise_fields[j]`` scales the j-th driving increment. ``None`` entries
    mean zero. ``lipschitz_bound`` is the caller's bound K for all fields.
    """

    dim_state: int
    x0: tuple[float, ...]
    drift: Optional[FieldFn] = None
    qv_fields: Optional[tuple[tuple[Optional[FieldFn], ...], ...]] = None
    noise_fields: Optional[tuple[Optional[FieldFn], ...]] = None
    lipschitz_bound: float = 1.0

    def __post_init__(self) -> None:
        if self.dim_state < 1:
            raise ValueError(f"state dimension must be positive, got {self.dim_state}")
        if len(self.x0) != self.dim_state:
            raise ValueError(
                f"x0 has {len(self.x0)} components for state dimension {self.dim_state}"
            )
        if not all(math.isfinite(v) for v in self.x0):
            raise ValueError("x0 must be finite")
        if not (math.isfinite(self.lipschitz_bound) and self.lipschitz_bound > 0.0):
            raise ValueError(
                f"lipschitz_bound must be positive and finite, got {self.lipschitz_bound}"
            )
        if self.qv_fields is not None:
            rows = {len(r) for r in self.qv_fields}
            if len(rows) != 1 or rows.pop() != len(self.qv_fields):
                raise ValueError("qv_fields must be a square grid of fields")

    @property
    def dim_driving(self) -> Optional[int]:
        if self.noise_fields is not None:
            return len(self.noise_fields)
        if self.qv_fields is not None:
            return len(self.qv_fields)
        return None

    def x0_array(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)


@dataclass(frozen=True, eq=False)
class StatePath:
    """States of one solved path at every partition node."""

    partition: Partition
    states: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.states, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] != len(self.partition.points):
            raise ValueError(
                f"states must have shape (n_nodes, n), got {np.shape(self.states)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("states must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "states", arr)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def terminal(self) -> np.ndarray:
        return self.states[-1]


def _eval_field(fn: Optional[FieldFn], x: np.ndarray) -> Optional[np.ndarray]:
    if fn is None:
        return None
    out = np.asarray(fn(x), dtype=float)
    if out.shape != x.shape:
        raise ValueError(
            f"field returned shape {out.shape} for input shape {x.shape}"
        )
    return out


def _basis_increments(path: SamplePath, a_basis: Optional[Sequence[Direction]]) -> np.ndarray:
    if a_basis is None:
        return path.increments
    cols = [path.increments_along(a) for a in a_basis]
    return np.stack(cols, axis=-1)


def _check_driving_dim(spec: SdeSpec, d: int) -> None:
    want = spec.dim_driving
    if want is not None and want != d:
        raise ValueError(
            f"coefficients expect {want} driving components, path supplies {d}"
        )


def euler_solve(
    spec: SdeSpec,
    path: SamplePath,
    a_basis: Optional[Sequence[Direction]] = None,
) -> StatePath:
    """Forward Euler along one path.

    Each step adds drift * dt, the noise fields against the driving
    increments, and the variation fields against realized increment
    products. Aborts when any state component passes the blow-up guard.
    """
    inc = _basis_increments(path, a_basis)
    _check_driving_dim(spec, inc.shape[1])
    deltas = path.partition.deltas()
    n_steps = inc.shape[0]
    d = inc.shape[1]
    states = np.empty((n_steps + 1, spec.dim_state))
    states[0] = spec.x0_array()
    x = states[0].copy()
    for k in range(n_steps):
        step = np.zeros(spec.dim_state)
        bval = _eval_field(spec.drift, x)
        if bval is not None:
            step += bval * deltas[k]
        if spec.noise_fields is not None:
            for j in range(d):
                sval = _eval_field(spec.noise_fields[j], x)
                if sval is not None:
                    step += sval * inc[k, j]
        if spec.qv_fields is not None:
            for i in range(d):
                for j in range(d):
                    hval = _eval_field(spec.qv_fields[i][j], x)
                    if hval is not None:
                        step += hval * (inc[k, i] * inc[k, j])
        x = x + step
        if np.max(np.abs(x)) > BLOWUP_GUARD:
            raise RuntimeError(
                f"state blew up at step {k + 1} of {n_steps} "
                f"(|x| > {BLOWUP_GUARD:.0e}); check coefficients or mesh"
            )
        states[k + 1] = x
    return StatePath(partition=path.partition, states=states)


# ---------------------------------------------------------------------------
# Contraction of the solution mapping
# ---------------------------------------------------------------------------


def _lambda_map(
    spec: SdeSpec, y: np.ndarray, inc: np.ndarray, deltas: np.ndarray
) -> np.ndarray:
    """Integral mapping applied to candidate processes, batched over paths.

    ``y`` has shape (paths, nodes, n); the output starts at x0 and
    accumulates left-endpoint Riemann sums of the three differentials.
    """
    left = y[:, :-1, :]
    contrib = np.zeros_like(left)
    bval = _eval_field(spec.drift, left)
    if bval is not None:
        contrib += bval * deltas[None, :, None]
    d = inc.shape[2]
    if spec.noise_fields is not None:
        for j in range(d):
            sval = _eval_field(spec.noise_fields[j], left)
            if sval is not None:
                contrib += sval * inc[:, :, j : j + 1]
    if spec.qv_fields is not None:
        for i in range(d):
            for j in range(d):
                hval = _eval_field(spec.qv_fields[i][j], left)
                if hval is not None:
                    contrib += hval * (inc[:, :, i] * inc[:, :, j])[:, :, None]
    out = np.empty_like(y)
    out[:, 0, :] = spec.x0_array()
    np.cumsum(contrib, axis=1, out=out[:, 1:, :])
    out[:, 1:, :] += spec.x0_array()
    return out


def default_contraction_weight(spec: SdeSpec, gamma: UncertaintySet, horizon: float) -> float:
    """Weight constant from the Lipschitz bound and the top variance rate.

    Built from the three integral estimates the contraction proof combines:
    the time integral contributes a factor T, the noise integral the top
    rate, and the variation integral its square.
    """
    d = spec.dim_driving or 1
    rates = []
    for j in range(d):
        comps = tuple(1.0 if i == j else 0.0 for i in range(d))
        rates.append(sigma_of(gamma, Direction.of(*comps).rank_one()))
    s_max = max(rates)
    k = spec.lipschitz_bound
    return 3.0 * k * k * (horizon + s_max + s_max * s_max)


def _weighted_sq_distance(
    diffs_per_control: Sequence[np.ndarray],
    points: np.ndarray,
    weight: float,
) -> float:
    """sup over controls of the time integral of the mean squared gap,
    discounted at rate 2 * weight; trapezoid in time."""
    decay = np.exp(-2.0 * weight * points)
    best = -math.inf
    for diff in diffs_per_control:
        sq = np.mean(np.sum(diff * diff, axis=2), axis=0)
        best = max(best, float(np.trapezoid(sq * decay, points)))
    return best


@dataclass(frozen=True)
class PicardReport:
    """One application of the solution mapping plus an iteration trail."""

    ratio: float
    weight: float
    status: Literal["contractive", "inconclusive", "non_contractive", "zero_initial_distance"]
    distance_before: float
    distance_after: float
    iterate_distances: tuple[float, ...]
    iterate_factors: tuple[float, ...]
    fixed_point_residual: float
    n_paths: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "weight": self.weight,
            "status": self.status,
            "distance_before": self.distance_before,
            "distance_after": self.distance_after,
            "iterate_distances": list(self.iterate_distances),
            "iterate_factors": list(self.iterate_factors),
            "fixed_point_residual": self.fixed_point_residual,
            "n_paths": self.n_paths,
            "seed": self.seed,
        }


def picard_contraction(
    spec: SdeSpec,
    gamma: UncertaintySet,
    controls: Sequence[ScenarioControl],
    n_paths: int,
    seed: int,
    *,
    weight: Optional[float] = None,
    y_start: Optional[np.ndarray] = None,
    y_other: Optional[np.ndarray] = None,
    iterations: int = 8,
    convergence_target: float = 1e-6,
    max_iterations: int = 32,
) -> PicardReport:
    """Measure the contraction of the integral mapping over a control family.

    ``ratio`` compares the squared weighted distances before and after one
    application to the two candidates (defaults: the constant-x0 process
    and the zero process), matching the squared-integral form of the
    contraction estimate. ``iterate_distances`` are square roots, i.e.
    proper norms of successive iterate gaps starting from the constant-x0
    candidate, with their geometric decay factors alongside.

    All candidates see identical increments (common random numbers), so
    the ratio is free of independent-sampling noise. Iteration runs at
    least ``iterations`` rounds and continues until the last move falls
    under ``convergence_target`` (or ``max_iterations`` is reached); the
    final move is the fixed-point residual.
    """
    if len(controls) == 0:
        raise ValueError("need at least one control")
    if n_paths < 2:
        raise ValueError(f"need at least two paths, got {n_paths}")
    if iterations < 1:
        raise ValueError(f"need at least one iteration, got {iterations}")
    if max_iterations < iterations:
        raise ValueError(
            f"max_iterations {max_iterations} is below the minimum {iterations}"
        )
    part = controls[0].partition
    for c in controls[1:]:
        if c.partition.points != part.points:
            raise ValueError("all controls must share one partition")
    points = np.asarray(part.points, dtype=float)
    deltas = part.deltas()
    n_nodes = points.size
    n = spec.dim_state
    if weight is None:
        weight = default_contraction_weight(spec, gamma, part.horizon)

    inc_sets = []
    for c_idx, control in enumerate(controls):
        _check_driving_dim(spec, control.dim)
        block = np.empty((n_paths, n_nodes - 1, control.dim))
        base = c_idx * n_paths
        for i in range(n_paths):
            block[i] = generate_path(control, seed, path_index=base + i).increments
        inc_sets.append(block)

    def broadcast_candidate(value: Optional[np.ndarray], fallback: np.ndarray) -> np.ndarray:
        if value is None:
            value = fallback
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 1:
            arr = np.broadcast_to(arr[None, None, :], (n_paths, n_nodes, n))
        elif arr.ndim == 2:
            arr = np.broadcast_to(arr[None, :, :], (n_paths, n_nodes, n))
        if arr.shape != (n_paths, n_nodes, n):
            raise ValueError(
                f"candidate process must broadcast to {(n_paths, n_nodes, n)}, got {arr.shape}"
            )
        return arr

    y_a = broadcast_candidate(y_start, spec.x0_array())
    y_b = broadcast_candidate(y_other, np.zeros(n))

    dist_before = _weighted_sq_distance([y_a - y_b] * len(controls), points, weight)
    out_a = [_lambda_map(spec, y_a, inc, deltas) for inc in inc_sets]
    out_b = [_lambda_map(spec, y_b, inc, deltas) for inc in inc_sets]
    dist_after = _weighted_sq_distance(
        [pa - pb for pa, pb in zip(out_a, out_b)], points, weight
    )

    if dist_before == 0.0:
        status = "zero_initial_distance"
        ratio = 0.0
    else:
        ratio = dist_after / dist_before
        if ratio <= 0.6:
            status = "contractive"
        elif ratio <= 1.0:
            status = "inconclusive"
        else:
            status = "non_contractive"

    # iterate at least `iterations` times, then keep going until the move
    # drops under the convergence target (bounded by max_iterations)
    iterate_distances: list[float] = []
    current = [y_a.copy() for _ in controls]
    while True:
        nxt = [_lambda_map(spec, cur, inc, deltas) for cur, inc in zip(current, inc_sets)]
        gap_sq = _weighted_sq_distance(
            [b - a for a, b in zip(current, nxt)], points, weight
        )
        iterate_distances.append(math.sqrt(max(gap_sq, 0.0)))
        current = nxt
        done_minimum = len(iterate_distances) >= iterations
        converged = iterate_distances[-1] < convergence_target
        if (done_minimum and converged) or len(iterate_distances) >= max_iterations:
            break
    factors = tuple(
        iterate_distances[i + 1] / iterate_distances[i]
        if iterate_distances[i] > 0.0
        else 0.0
        for i in range(len(iterate_distances) - 1)
    )
    return PicardReport(
        ratio=float(ratio),
        weight=float(weight),
        status=status,
        distance_before=float(dist_before),
        distance_after=float(dist_after),
        iterate_distances=tuple(iterate_distances),
        iterate_factors=factors,
        fixed_point_residual=float(iterate_distances[-1]),
        n_paths=n_paths,
        seed=seed,
    )


def lipschitz_spot_check(
    spec: SdeSpec, box_radius: float, n_pairs: int = 200, seed: int = 0
) -> float:
    """Largest observed difference quotient of any coefficient field over
    random state pairs in a box; should not exceed the declared bound."""
    if not (box_radius > 0.0 and math.isfinite(box_radius)):
        raise ValueError(f"box_radius must be positive and finite, got {box_radius}")
    rng = np.random.default_rng(seed)
    n = spec.dim_state
    xs = rng.uniform(-box_radius, box_radius, size=(n_pairs, n))
    ys = rng.uniform(-box_radius, box_radius, size=(n_pairs, n))
    gaps = np.linalg.norm(xs - ys, axis=1)
    keep = gaps > 1e-9
    xs, ys, gaps = xs[keep], ys[keep], gaps[keep]
    fields: list[FieldFn] = []
    if spec.drift is not None:
        fields.append(spec.drift)
    for group in (spec.noise_fields or ()):
        if group is not None:
            fields.append(group)
    for row in (spec.qv_fields or ()):
        for fn in row:
            if fn is not None:
                fields.append(fn)
    worst = 0.0
    for fn in fields:
        fx = np.asarray(fn(xs), dtype=float)
        fy = np.asarray(fn(ys), dtype=float)
        worst = max(worst, float(np.max(np.linalg.norm(fx - fy, axis=1) / gaps)))
    return worst


# ---------------------------------------------------------------------------
# Second-order pathwise residual
# ---------------------------------------------------------------------------


def ito_residual(
    phi: Callable[[np.ndarray], np.ndarray],
    dphi: Callable[[np.ndarray], np.ndarray],
    d2phi: Callable[[np.ndarray], np.ndarray],
    path: SamplePath,
    *,
    alpha: float | np.ndarray = 0.0,
    eta: Optional[np.ndarray] = None,
    beta: Optional[np.ndarray] = None,
    x0: float = 0.0,
) -> float:
    """Gap in the second-order change-of-variable formula on one path.

    The scalar state is built at partition level from bounded step
    ingredients: each step adds alpha * dt, eta[i, j] times the realized
    increment product, and beta[j] times the j-th driving increment. The
    residual is phi at the endpoints minus the three forward sums (the
    gradient against the state differentials plus half the second
    derivative against beta-contracted increment products). It vanishes
    identically for linear phi, vanishes to rounding for quadratic phi
    with constant beta and no drift, and shrinks at first order in the
    mesh otherwise.

    ``alpha`` is a scalar or per-step array; ``eta`` has shape (d, d) or
    (steps, d, d); ``beta`` has shape (d,) or (steps, d). ``phi``,
    ``dphi`` and ``d2phi`` must be vectorized over arrays of states.
    """
    inc = path.increments
    n_steps, d = inc.shape
    deltas = path.partition.deltas()

    alpha_arr = np.broadcast_to(np.asarray(alpha, dtype=float), (n_steps,))
    if eta is None:
        eta_arr = np.zeros((n_steps, d, d))
    else:
        eta_arr = np.broadcast_to(np.asarray(eta, dtype=float), (n_steps, d, d))
    if beta is None:
        beta_arr = np.zeros((n_steps, d))
    else:
        beta_arr = np.broadcast_to(np.asarray(beta, dtype=float), (n_steps, d))

    products = inc[:, :, None] * inc[:, None, :]
    steps = (
        alpha_arr * deltas
        + np.einsum("kij,kij->k", eta_arr, products)
        + np.einsum("kj,kj->k", beta_arr, inc)
    )
    states = np.full(n_steps + 1, float(x0))
    states[1:] += np.cumsum(steps)

    # the state differential already collects all three first-order terms,
    # so the gradient multiplies the realized step directly
    left = states[:-1]
    grad = np.asarray(dphi(left), dtype=float)
    curv = np.asarray(d2phi(left), dtype=float)
    beta_products = np.einsum("ki,kj,kij->k", beta_arr, beta_arr, products)
    rhs = float(np.sum(grad * steps + 0.5 * curv * beta_products))
    lhs = float(phi(states[-1:])[0] - phi(states[:1])[0])
    return lhs - rhs


# ---------------------------------------------------------------------------
# Named coefficient library and export
# ---------------------------------------------------------------------------


def sde_from_name(name: str, x0: float = 1.0, **params) -> SdeSpec:
    """Scalar-state coefficient presets selectable from configuration.

    - ``linear``: noise equal to the state
    - ``affine``: drift a + b x, noise c + e x
    - ``geometric``: drift mu x, noise sigma x
    - ``sine_perturbed``: drift sin(x), noise 1 + amplitude sin(x)
    """
    if name == "linear":
        return SdeSpec(
            dim_state=1,
            x0=(x0,),
            noise_fields=(lambda x: x,),
            lipschitz_bound=1.0,
        )
    if name == "affine":
        a = float(params.pop("drift_const", 0.0))
        b = float(params.pop("drift_slope", 0.2))
        c = float(params.pop("noise_const", 0.1))
        e = float(params.pop("noise_slope", 0.5))
        _reject_extras(name, params)
        return SdeSpec(
            dim_state=1,
            x0=(x0,),
            drift=lambda x: a + b * x,
            noise_fields=(lambda x: c + e * x,),
            lipschitz_bound=max(abs(b), abs(e), 1e-6),
        )
    if name == "geometric":
        mu = float(params.pop("mu", 0.5))
        sig = float(params.pop("sigma_coef", 0.3))
        _reject_extras(name, params)
        return SdeSpec(
            dim_state=1,
            x0=(x0,),
            drift=lambda x: mu * x,
            noise_fields=(lambda x: sig * x,),
            lipschitz_bound=max(abs(mu), abs(sig), 1e-6),
        )
    if name == "sine_perturbed":
        amp = float(params.pop("amplitude", 0.5))
        _reject_extras(name, params)
        return SdeSpec(
            dim_state=1,
            x0=(x0,),
            drift=lambda x: np.sin(x),
            noise_fields=(lambda x: 1.0 + amp * np.sin(x),),
            lipschitz_bound=max(1.0, abs(amp)),
        )
    raise ValueError(f"unknown coefficient preset: {name!r}")


def _reject_extras(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameters for {name!r}: {sorted(params)}")


def state_path_to_csv_text(state_path: StatePath) -> str:
    header = "t," + ",".join(f"X{i + 1}" for i in range(state_path.dim))
    lines = [header]
    for t, row in zip(state_path.partition.points, state_path.states):
        lines.append(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
