"""Volatility uncertainty sets and the sublinear generator they induce.

A model with volatility uncertainty replaces the single diffusion matrix of
the classical theory with a bounded set of candidate matrices. Every
symmetric matrix ``A`` then gets the worst-case quadratic weight

    g_value(set, A) = 1/2 * sup over candidates gamma of tr(gamma gamma^T A),

which is sublinear and positively homogeneous in ``A`` and collapses to the
classical linear value when the set is a single matrix. Three set shapes are
supported:

* ``Interval1D``: scalar volatilities in a closed interval,
* ``DiagonalBox``: diagonal matrices with per-axis interval entries,
* ``FiniteMatrixSet``: an explicit finite list of square matrices.

The first two admit exact closed forms (the box objective separates across
axes because only diagonal entries of ``A`` couple to diagonal candidates);
the finite list is evaluated directly. All types are immutable value
objects, safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Iterable, Sequence, Union

import math

import numpy as np

__all__ = [
    "SymMatrix",
    "Direction",
    "Interval1D",
    "DiagonalBox",
    "FiniteMatrixSet",
    "UncertaintySet",
    "DominationReport",
    "g_value",
    "sigma_of",
    "g_directional",
    "check_domination",
    "uncertainty_to_dict",
    "uncertainty_from_dict",
]


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymMatrix:
    """A real symmetric matrix stored as its upper triangle.

    Storing only the upper triangle makes the symmetry invariant structural:
    ``entry(i, j)`` and ``entry(j, i)`` read the same stored float, so they
    are equal exactly, not merely up to rounding.

    Attributes:
        dim: Matrix dimension ``d``.
        upper: Row-major upper triangle including the diagonal,
            length ``d * (d + 1) // 2``.
    """

    dim: int
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        expected = self.dim * (self.dim + 1) // 2
        if len(self.upper) != expected:
            raise ValueError(
                f"upper triangle of a {self.dim}x{self.dim} matrix needs "
                f"{expected} entries, got {len(self.upper)}"
            )
        if not all(math.isfinite(v) for v in self.upper):
            raise ValueError("matrix entries must be finite")

    @classmethod
    def from_array(cls, arr: Sequence[Sequence[float]] | np.ndarray) -> "SymMatrix":
        """Build from a full matrix, requiring exact symmetry."""
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix is not exactly symmetric")
        d = a.shape[0]
        upper = tuple(float(a[i, j]) for i in range(d) for j in range(i, d))
        return cls(dim=d, upper=upper)

    @classmethod
    def scalar(cls, value: float) -> "SymMatrix":
        """The 1x1 matrix [value]."""
        return cls(dim=1, upper=(float(value),))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "SymMatrix":
        d = len(values)
        a = np.zeros((d, d))
        np.fill_diagonal(a, values)
        return cls.from_array(a)

    @classmethod
    def outer(cls, vec: Sequence[float]) -> "SymMatrix":
        """The rank-one matrix v v^T (exactly symmetric by commutativity)."""
        v = np.asarray(vec, dtype=float)
        d = v.size
        upper = tuple(float(v[i] * v[j]) for i in range(d) for j in range(i, d))
        return cls(dim=d, upper=upper)

    def entry(self, i: int, j: int) -> float:
        if j < i:
            i, j = j, i
        # offset of row i within the packed upper triangle
        base = i * self.dim - i * (i - 1) // 2
        return self.upper[base + (j - i)]

    def as_array(self) -> np.ndarray:
        a = np.empty((self.dim, self.dim))
        k = 0
        for i in range(self.dim):
            for j in range(i, self.dim):
                a[i, j] = self.upper[k]
                a[j, i] = self.upper[k]
                k += 1
        return a

    def diagonal_entries(self) -> tuple[float, ...]:
        return tuple(self.entry(i, i) for i in range(self.dim))

    def scaled(self, factor: float) -> "SymMatrix":
        return SymMatrix(self.dim, tuple(factor * v for v in self.upper))

    def plus(self, other: "SymMatrix") -> "SymMatrix":
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return SymMatrix(self.dim, tuple(a + b for a, b in zip(self.upper, other.upper)))


@dataclass(frozen=True)
class Direction:
    """A direction vector in R^d used for rank-one reductions.

    The zero vector is allowed; every generator value along it is zero.
    """

    components: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.components) == 0:
            raise ValueError("direction needs at least one component")
        if not all(math.isfinite(v) for v in self.components):
            raise ValueError("direction components must be finite")

    @classmethod
    def of(cls, *components: float) -> "Direction":
        return cls(tuple(float(c) for c in components))

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.components)

    def rank_one(self) -> SymMatrix:
        """The matrix a a^T for this direction a."""
        return SymMatrix.outer(self.components)


# ---------------------------------------------------------------------------
# Uncertainty sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval1D:
    """Scalar volatilities gamma in [sigma_low, sigma_high], 0 <= low <= high."""

    sigma_low: float
    sigma_high: float

    kind: ClassVar[str] = "interval1d"

    def __post_init__(self) -> None:
        lo, hi = self.sigma_low, self.sigma_high
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo < 0.0:
            raise ValueError(f"sigma_low must be nonnegative, got {lo}")
        if hi <= 0.0:
            raise ValueError(f"sigma_high must be positive, got {hi}")
        if lo > hi:
            raise ValueError(f"need sigma_low <= sigma_high, got [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class DiagonalBox:
    """Diagonal volatility matrices with per-axis entries in [lows[i], highs[i]]."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]

    kind: ClassVar[str] = "diagonal_box"

    def __post_init__(self) -> None:
        if len(self.lows) == 0 or len(self.lows) != len(self.highs):
            raise ValueError("lows and highs must be nonempty and equal length")
        for i, (lo, hi) in enumerate(zip(self.lows, self.highs)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"axis {i}: interval endpoints must be finite")
            if lo < 0.0 or lo > hi:
                raise ValueError(f"axis {i}: need 0 <= low <= high, got [{lo}, {hi}]")

    @classmethod
    def of(cls, intervals: Iterable[tuple[float, float]]) -> "DiagonalBox":
        pairs = list(intervals)
        return cls(
            lows=tuple(float(p[0]) for p in pairs),
            highs=tuple(float(p[1]) for p in pairs),
        )

    @property
    def dim(self) -> int:
        return len(self.lows)


@dataclass(frozen=True, eq=False)
class FiniteMatrixSet:
    """An explicit, nonempty list of d x d volatility matrices."""

    matrices: tuple[np.ndarray, ...]

    kind: ClassVar[str] = "matrix_set"

    def __init__(self, matrices: Iterable[Sequence[Sequence[float]] | np.ndarray]):
        mats = []
        for m in matrices:
            a = np.array(m, dtype=float)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError(f"expected square matrices, got shape {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError("matrix entries must be finite")
            a.setflags(write=False)
            mats.append(a)
        if not mats:
            raise ValueError("matrix set must be nonempty")
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise ValueError(f"all matrices must share one dimension, got {sorted(dims)}")
        object.__setattr__(self, "matrices", tuple(mats))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMatrixSet):
            return NotImplemented
        return len(self.matrices) == len(other.matrices) and all(
            np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices)
        )

    @property
    def dim(self) -> int:
        return int(self.matrices[0].shape[0])


UncertaintySet = Union[Interval1D, DiagonalBox, FiniteMatrixSet]


# ---------------------------------------------------------------------------
# Generator evaluation
# ---------------------------------------------------------------------------


def _require_dim(gamma: UncertaintySet, dim: int, what: str) -> None:
    if gamma.dim != dim:
        raise ValueError(
            f"dimension mismatch: uncertainty set is {gamma.dim}-dimensional, "
            f"{what} is {dim}-dimensional"
        )


def g_value(gamma: UncertaintySet, a_mat: SymMatrix) -> float:
    """Worst-case half quadratic weight of ``a_mat`` over the set.

    Returns ``1/2 * sup tr(g g^T A)`` with the sup over the candidate
    matrices ``g``. Interval and box shapes use exact closed forms; a finite
    list is scanned directly.

    Raises:
        ValueError: on dimension mismatch.
    """
    _require_dim(gamma, a_mat.dim, "the symmetric matrix")
    if isinstance(gamma, Interval1D):
        a = a_mat.entry(0, 0)
        hi2 = gamma.sigma_high * gamma.sigma_high
        lo2 = gamma.sigma_low * gamma.sigma_low
        return 0.5 * (hi2 * max(a, 0.0) - lo2 * max(-a, 0.0))
    if isinstance(gamma, DiagonalBox):
        total = 0.0
        for lo, hi, aii in zip(gamma.lows, gamma.highs, a_mat.diagonal_entries()):
            total += hi * hi * max(aii, 0.0) - lo * lo * max(-aii, 0.0)
        return 0.5 * total
    if isinstance(gamma, FiniteMatrixSet):
        a = a_mat.as_array()
        return max(0.5 * float(np.trace(m @ m.T @ a)) for m in gamma.matrices)
    raise TypeError(f"unsupported uncertainty set type: {type(gamma).__name__}")


def sigma_of(gamma: UncertaintySet, a_mat: SymMatrix) -> float:
    """Worst-case quadratic weight ``sup tr(g g^T A)``, exactly twice g_value."""
    return 2.0 * g_value(gamma, a_mat)


def g_directional(gamma: UncertaintySet, a: Direction, beta: float) -> float:
    """Generator value along a single direction: g_value of ``beta * a a^T``.

    Splitting ``beta`` into positive and negative parts gives the exact
    one-dimensional form used by the rank-one reduction of the evolution
    equation: with ``s_plus = sigma_of(a a^T)`` and
    ``s_minus = sigma_of(-a a^T)`` (always ``<= 0``),

        0.5 * (s_plus * max(beta, 0) + s_minus * max(-beta, 0)).
    """
    _require_dim(gamma, a.dim, "the direction")
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    if a.is_zero:
        return 0.0
    rank_one = a.rank_one()
    s_plus = sigma_of(gamma, rank_one)
    s_minus = sigma_of(gamma, rank_one.scaled(-1.0))
    return 0.5 * (s_plus * max(beta, 0.0) + s_minus * max(-beta, 0.0))


@dataclass(frozen=True)
class DominationReport:
    """Per-sample generator values for a nested pair of uncertainty sets."""

    values_sub: tuple[float, ...]
    values_sup: tuple[float, ...]
    max_violation: float

    @property
    def dominated(self) -> bool:
        return self.max_violation <= 0.0


def check_domination(
    sub: UncertaintySet,
    sup: UncertaintySet,
    samples: Sequence[SymMatrix],
) -> DominationReport:
    """Check that the smaller set's generator never exceeds the larger set's.

    The caller supplies the pair with ``sub`` contained in ``sup``; the check
    evaluates both generators on each sample matrix and reports the largest
    value of ``g_sub - g_sup``, which should be nonpositive up to rounding.
    """
    if sub.dim != sup.dim:
        raise ValueError(f"dimension mismatch: {sub.dim} vs {sup.dim}")
    vals_sub = tuple(g_value(sub, a) for a in samples)
    vals_sup = tuple(g_value(sup, a) for a in samples)
    violations = [a - b for a, b in zip(vals_sub, vals_sup)]
    return DominationReport(
        values_sub=vals_sub,
        values_sup=vals_sup,
        max_violation=max(violations) if violations else float("-inf"),
    )


# ---------------------------------------------------------------------------
# Serialization (structured-config schema)
# ---------------------------------------------------------------------------


def uncertainty_to_dict(gamma: UncertaintySet) -> dict:
    """Serialize to the structured-config schema (plain dict, TOML friendly)."""
    if isinstance(gamma, Interval1D):
        return {
            "kind": "interval1d",
            "sigma_low": gamma.sigma_low,
            "sigma_high": gamma.sigma_high,
        }
    if isinstance(gamma, DiagonalBox):
        return {"kind": "diagonal_box", "lows": list(gamma.lows), "highs": list(gamma.highs)}
    if isinstance(gamma, FiniteMatrixSet):
        return {"kind": "matrix_set", "matrices": [m.tolist() for m in gamma.matrices]}
    raise TypeError(f"unsupported uncertainty set type: {type(gamma).__name__}")


def uncertainty_from_dict(data: dict) -> UncertaintySet:
    """Parse the structured-config schema back into an uncertainty set."""
    try:
        kind = data["kind"]
    except KeyError:
        raise ValueError("uncertainty set dict is missing the 'kind' field") from None
    try:
        if kind == "interval1d":
            return Interval1D(float(data["sigma_low"]), float(data["sigma_high"]))
        if kind == "diagonal_box":
            return DiagonalBox(
                lows=tuple(float(v) for v in data["lows"]),
                highs=tuple(float(v) for v in data["highs"]),
            )
        if kind == "matrix_set":
            return FiniteMatrixSet(data["matrices"])
    except KeyError as exc:
        raise ValueError(f"uncertainty set dict is missing field {exc}") from None
    raise ValueError(f"unknown uncertainty set kind: {kind!r}")
