"""Scenario simulation of volatility-uncertain paths and their calculus.

The expectation side of the package never builds paths; this module is the
sampling bridge. A scenario control picks one admissible volatility matrix
per subinterval, each control induces a classical diffusion whose
expectation is dominated by the worst-case value, and simulating a family
of controls gives a lower-bound estimate of that value together with the
control that attains the maximum.

On top of sampled paths it provides the discrete stochastic calculus:
forward (non-anticipating) integrals of step processes, running quadratic
and mutual variation, and integrals against the variation process. The
pathwise algebraic identities among these hold at rounding level on every
single path, not merely in distribution.

Randomness is counter-based: path ``i`` of seed ``s`` draws from a
dedicated counter block, so any path can be regenerated in isolation and
ensembles are reproducible bit for bit regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .uncertainty import (
    DiagonalBox,
    Direction,
    FiniteMatrixSet,
    Interval1D,
    UncertaintySet,
)

__all__ = [
    "Partition",
    "ScenarioControl",
    "SamplePath",
    "SimpleProcess",
    "ScenarioSupResult",
    "generate_path",
    "ito_integral",
    "bochner_integral",
    "quadratic_variation",
    "mutual_variation",
    "integral_wrt_qv",
    "control_within",
    "volatility_ladder",
    "bang_bang_control",
    "scenario_sup_expect",
    "path_to_csv_text",
]

_COUNTER_BLOCK = 2**128

_MATCH_ATOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """Finite ordered time grid 0 = t_0 < t_1 < ... < t_N."""

    points: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("partition needs at least two points")
        if self.points[0] != 0.0:
            raise ValueError(f"partition must start at 0, got {self.points[0]}")
        arr = np.asarray(self.points, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("partition points must be finite")
        if not np.all(np.diff(arr) > 0.0):
            raise ValueError("partition points must be strictly increasing")

    @classmethod
    def uniform(cls, horizon: float, n_intervals: int) -> "Partition":
        if not (math.isfinite(horizon) and horizon > 0.0):
            raise ValueError(f"horizon must be positive and finite, got {horizon}")
        if n_intervals < 1:
            raise ValueError(f"need at least one interval, got {n_intervals}")
        pts = np.linspace(0.0, horizon, n_intervals + 1)
        pts[-1] = horizon
        return cls(points=tuple(float(p) for p in pts))

    @property
    def horizon(self) -> float:
        return self.points[-1]

    @property
    def n_intervals(self) -> int:
        return len(self.points) - 1

    def deltas(self) -> np.ndarray:
        return np.diff(np.asarray(self.points, dtype=float))

    @property
    def mesh(self) -> float:
        return float(np.max(self.deltas()))

    def indices_in(self, finer: "Partition") -> np.ndarray:
        """Positions of this partition's points inside a finer one.

        Raises if any point is missing, i.e. if ``finer`` does not refine
        this partition.
        """
        coarse = np.asarray(self.points, dtype=float)
        fine = np.asarray(finer.points, dtype=float)
        idx = np.searchsorted(fine, coarse)
        idx = np.clip(idx, 0, fine.size - 1)
        left = np.clip(idx - 1, 0, fine.size - 1)
        use_left = np.abs(fine[left] - coarse) < np.abs(fine[idx] - coarse)
        idx = np.where(use_left, left, idx)
        if not np.all(np.abs(fine[idx] - coarse) <= _MATCH_ATOL * np.maximum(1.0, np.abs(coarse))):
            raise ValueError(
                "partition mismatch: the path partition does not contain every "
                "process partition point"
            )
        return idx.astype(np.intp)


@dataclass(frozen=True, eq=False)
class ScenarioControl:
    """One admissible volatility matrix per subinterval of a partition."""

    partition: Partition
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim == 1:
            mats = mats.reshape(-1, 1, 1)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(
                f"matrices must have shape (n_intervals, d, d), got {mats.shape}"
            )
        if mats.shape[0] != self.partition.n_intervals:
            raise ValueError(
                f"need one matrix per subinterval: {self.partition.n_intervals} "
                f"intervals but {mats.shape[0]} matrices"
            )
        if not np.all(np.isfinite(mats)):
            raise ValueError("control matrices must be finite")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def constant(cls, partition: Partition, matrix) -> "ScenarioControl":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        mats = np.broadcast_to(m, (partition.n_intervals,) + m.shape)
        return cls(partition=partition, matrices=mats)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.matrices == self.matrices[0]))

    def describe(self) -> dict:
        desc = {
            "n_intervals": self.partition.n_intervals,
            "horizon": self.partition.horizon,
            "dim": self.dim,
        }
        if self.is_constant:
            desc["kind"] = "constant"
            desc["matrix"] = self.matrices[0].tolist()
        else:
            desc["kind"] = "piecewise"
            desc["distinct_matrices"] = int(
                len({m.tobytes() for m in self.matrices})
            )
        return desc


def control_within(control: ScenarioControl, gamma: UncertaintySet) -> bool:
    """Whether every matrix of the control is admissible for the set."""
    mats = control.matrices
    if isinstance(gamma, Interval1D):
        if control.dim != 1:
            return False
        vals = mats[:, 0, 0]
        return bool(
            np.all(vals >= gamma.sigma_low - _MATCH_ATOL)
            and np.all(vals <= gamma.sigma_high + _MATCH_ATOL)
        )
    if isinstance(gamma, DiagonalBox):
        if control.dim != len(gamma.lows):
            return False
        off = mats.copy()
        for i in range(control.dim):
            off[:, i, i] = 0.0
        if np.max(np.abs(off)) > _MATCH_ATOL:
            return False
        lows = np.asarray(gamma.lows)
        highs = np.asarray(gamma.highs)
        diag = np.diagonal(mats, axis1=1, axis2=2)
        return bool(
            np.all(diag >= lows - _MATCH_ATOL) and np.all(diag <= highs + _MATCH_ATOL)
        )
    if isinstance(gamma, FiniteMatrixSet):
        members = [np.asarray(g, dtype=float) for g in gamma.matrices]
        if control.dim != members[0].shape[0]:
            return False
        for m in mats:
            if not any(np.max(np.abs(m - g)) <= _MATCH_ATOL for g in members):
                return False
        return True
    raise ValueError(f"unsupported uncertainty set: {type(gamma).__name__}")


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Increments of one simulated path on a partition."""

    partition: Partition
    increments: np.ndarray = field(repr=False)
    seed: int
    path_index: int = 0

    def __post_init__(self) -> None:
        inc = np.array(self.increments, dtype=float)
        if inc.ndim == 1:
            inc = inc.reshape(-1, 1)
        if inc.ndim != 2 or inc.shape[0] != self.partition.n_intervals:
            raise ValueError(
                f"increments must have shape (n_intervals, d), got {inc.shape}"
            )
        if not np.all(np.isfinite(inc)):
            raise ValueError("increments must be finite")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @property
    def dim(self) -> int:
        return self.increments.shape[1]

    def levels(self) -> np.ndarray:
        """Path values at all partition points, starting from the origin."""
        out = np.zeros((self.increments.shape[0] + 1, self.dim))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out

    def increments_along(self, a: Direction) -> np.ndarray:
        self._check_direction(a)
        return self.increments @ np.asarray(a.components, dtype=float)

    def levels_along(self, a: Direction) -> np.ndarray:
        inc = self.increments_along(a)
        out = np.zeros(inc.size + 1)
        np.cumsum(inc, out=out[1:])
        return out

    def _check_direction(self, a: Direction) -> None:
        if a.dim != self.dim:
            raise ValueError(
                f"direction dimension {a.dim} does not match path dimension {self.dim}"
            )


def generate_path(
    control: ScenarioControl, seed: int, path_index: int = 0
) -> SamplePath:
    """Simulate one path: each increment is matrix * sqrt(dt) * standard normal.

    The draw for (seed, path_index, step) is fixed by construction: path
    ``path_index`` reads from its own counter block of a counter-based
    generator keyed by ``seed``, independent of how many other paths exist.
    """
    if path_index < 0:
        raise ValueError(f"path_index must be nonnegative, got {path_index}")
    bit_gen = np.random.Philox(key=seed, counter=path_index * _COUNTER_BLOCK)
    rng = np.random.Generator(bit_gen)
    n = control.partition.n_intervals
    z = rng.standard_normal((n, control.dim))
    scaled = np.einsum("kij,kj->ki", control.matrices, z)
    scaled *= np.sqrt(control.partition.deltas())[:, None]
    return SamplePath(
        partition=control.partition, increments=scaled, seed=seed, path_index=path_index
    )


@dataclass(frozen=True, eq=False)
class SimpleProcess:
    """Step process: one value per subinterval, frozen at the left endpoint.

    Adaptedness is structural. The provided constructors compute each value
    from the path level at the subinterval's left endpoint, so no value can
    peek at the increment it multiplies.
    """

    partition: Partition
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        if vals.ndim not in (1, 2) or vals.shape[0] != self.partition.n_intervals:
            raise ValueError(
                f"values must have shape (n_intervals,) or (n_intervals, d), "
                f"got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("process values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, partition: Partition, value: float) -> "SimpleProcess":
        return cls(partition=partition, values=np.full(partition.n_intervals, float(value)))

    @classmethod
    def from_left_levels(
        cls,
        path: SamplePath,
        a: Direction,
        fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
        partition: Optional[Partition] = None,
    ) -> "SimpleProcess":
        """Build values as fn(t_k, path level at t_k along a).

        With ``partition`` given (a coarsening of the path's), values are
        frozen at that partition's left endpoints instead.
        """
        part = partition if partition is not None else path.partition
        idx = part.indices_in(path.partition)
        levels = path.levels_along(a)[idx[:-1]]
        t_left = np.asarray(part.points[:-1], dtype=float)
        vals = np.asarray(fn(t_left, levels), dtype=float)
        vals = np.broadcast_to(vals, t_left.shape).copy()
        return cls(partition=part, values=vals)

    def _require_scalar(self, op: str) -> np.ndarray:
        if self.values.ndim != 1:
            raise ValueError(f"{op} needs a scalar-valued process")
        return self.values


def ito_integral(eta: SimpleProcess, path: SamplePath, a: Direction) -> float:
    """Forward Riemann sum of the step process against the path along a."""
    vals = eta._require_scalar("the forward integral")
    idx = eta.partition.indices_in(path.partition)
    levels = path.levels_along(a)[idx]
    return float(np.dot(vals, np.diff(levels)))


def bochner_integral(eta: SimpleProcess, path: SamplePath) -> Union[float, np.ndarray]:
    """Time integral of the step process: sum of value * dt per subinterval."""
    eta.partition.indices_in(path.partition)
    deltas = eta.partition.deltas()
    if eta.values.ndim == 1:
        return float(np.dot(eta.values, deltas))
    return eta.values.T @ deltas


def quadratic_variation(path: SamplePath, a: Direction) -> np.ndarray:
    """Running sum of squared increments along a, at all partition points."""
    inc = path.increments_along(a)
    out = np.zeros(inc.size + 1)
    np.cumsum(inc * inc, out=out[1:])
    return out


def mutual_variation(path: SamplePath, a: Direction, abar: Direction) -> np.ndarray:
    """Running cross variation along two directions via termwise polarization.

    Each term is (d_plus^2 - d_minus^2) / 4 with d_plus, d_minus the
    increments along a + abar and a - abar; this equals the increment
    product up to rounding, and reduces bitwise to the quadratic variation
    when the directions coincide (or to its negative when opposed).
    """
    if abar.dim != a.dim:
        raise ValueError(f"direction dimensions differ: {a.dim} vs {abar.dim}")
    comp = np.asarray(a.components, dtype=float)
    comp_bar = np.asarray(abar.components, dtype=float)
    d_plus = path.increments @ (comp + comp_bar)
    d_minus = path.increments @ (comp - comp_bar)
    terms = 0.25 * (d_plus * d_plus - d_minus * d_minus)
    out = np.zeros(terms.size + 1)
    np.cumsum(terms, out=out[1:])
    return out


def integral_wrt_qv(eta: SimpleProcess, path: SamplePath, a: Direction) -> float:
    """Step-process integral against the running quadratic variation."""
    vals = eta._require_scalar("the variation integral")
    idx = eta.partition.indices_in(path.partition)
    qv = quadratic_variation(path, a)[idx]
    return float(np.dot(vals, np.diff(qv)))


# ---------------------------------------------------------------------------
# Control families and the scenario-sup estimator
# ---------------------------------------------------------------------------


def volatility_ladder(
    gamma: Interval1D, partition: Partition, levels: int = 5
) -> list[ScenarioControl]:
    """Constant controls spanning the volatility interval, low to high."""
    if levels < 1:
        raise ValueError(f"need at least one ladder level, got {levels}")
    if levels == 1 or gamma.sigma_high == gamma.sigma_low:
        rungs = [gamma.sigma_high]
    else:
        rungs = np.linspace(gamma.sigma_low, gamma.sigma_high, levels).tolist()
    return [ScenarioControl.constant(partition, [[float(r)]]) for r in rungs]


def bang_bang_control(
    gamma: Interval1D,
    partition: Partition,
    proxy: Callable[[np.ndarray], np.ndarray],
) -> ScenarioControl:
    """Two-level control: top volatility where the convexity proxy is
    nonnegative at the subinterval's left endpoint, bottom volatility
    elsewhere."""
    t_left = np.asarray(partition.points[:-1], dtype=float)
    sign = np.asarray(proxy(t_left), dtype=float)
    sign = np.broadcast_to(sign, t_left.shape)
    vals = np.where(sign >= 0.0, gamma.sigma_high, gamma.sigma_low)
    return ScenarioControl(partition=partition, matrices=vals.reshape(-1, 1, 1))


@dataclass(frozen=True)
class ScenarioSupResult:
    """Maximum of per-control Monte Carlo means; a lower-bound estimate of
    the worst-case expectation."""

    value: float
    argmax_index: int
    argmax_control: ScenarioControl
    means: np.ndarray
    standard_errors: np.ndarray
    n_paths: int
    seed: int

    @property
    def argmax_standard_error(self) -> float:
        return float(self.standard_errors[self.argmax_index])

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "argmax_index": self.argmax_index,
            "argmax_control": self.argmax_control.describe(),
            "means": self.means.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "n_paths": self.n_paths,
            "seed": self.seed,
        }


def scenario_sup_expect(
    x_rv: Callable[[SamplePath], float],
    gamma: UncertaintySet,
    controls: Sequence[ScenarioControl],
    n_paths: int,
    seed: int,
) -> ScenarioSupResult:
    """Estimate the worst-case expectation from below over a control family.

    Every control must be admissible for the set. Path ``i`` under control
    ``c`` uses counter block ``c * n_paths + i``, so the ensemble is
    reproducible path by path.
    """
    if len(controls) == 0:
        raise ValueError("need at least one control")
    if n_paths < 2:
        raise ValueError(f"need at least two paths for a standard error, got {n_paths}")
    for c_idx, control in enumerate(controls):
        if not control_within(control, gamma):
            raise ValueError(f"control {c_idx} is not admissible for the set")
    means = np.empty(len(controls))
    errs = np.empty(len(controls))
    for c_idx, control in enumerate(controls):
        samples = np.empty(n_paths)
        base = c_idx * n_paths
        for i in range(n_paths):
            path = generate_path(control, seed, path_index=base + i)
            samples[i] = x_rv(path)
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"functional produced non-finite values under control {c_idx}")
        means[c_idx] = samples.mean()
        errs[c_idx] = samples.std(ddof=1) / math.sqrt(n_paths)
    best = int(np.argmax(means))
    return ScenarioSupResult(
        value=float(means[best]),
        argmax_index=best,
        argmax_control=controls[best],
        means=means,
        standard_errors=errs,
        n_paths=n_paths,
        seed=seed,
    )


def path_to_csv_text(path: SamplePath) -> str:
    header = "t," + ",".join(f"B{i + 1}" for i in range(path.dim))
    lines = [header]
    levels = path.levels()
    for t, row in zip(path.partition.points, levels):
        lines.append(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
