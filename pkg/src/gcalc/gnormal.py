"""Closed-form values for the worst-case normal law.

These are the analytic counterparts of the heat-flow solver: absolute and
even signed moments, convex and concave payoff integrals, and quadratic
forms. Convex payoffs feel the upper quadratic weight, concave payoffs the
lower one, and the two coincide in the classical case. The functions here
are deliberately independent of the finite-difference machinery so the two
routes can be cross-checked against each other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .uncertainty import SymMatrix, UncertaintySet, g_value

__all__ = [
    "GNormalParams",
    "QuadratureError",
    "moment_abs",
    "moment_even_signed",
    "convex_payoff_value",
    "concave_payoff_value",
    "quadratic_form_value",
]

# Exact integer double factorials keep moments bit-reproducible; the cap is
# the contract boundary, not an arithmetic limit.
MAX_MOMENT_ORDER = 20

_QUAD_HALF_WIDTH_SIGMAS = 10.0
_QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class GNormalParams:
    """Directional quadratic weights and the elapsed square variation.

    sigma_plus is the worst-case variance rate for convex curvature,
    sigma_minus (nonpositive) the signed rate for concave curvature. The
    upper rate dominating the lower in magnitude is not required here; it
    is checked where a specific volatility set guarantees it.
    """

    sigma_plus: float
    sigma_minus: float
    t: float

    def __post_init__(self) -> None:
        if not (
            math.isfinite(self.sigma_plus)
            and math.isfinite(self.sigma_minus)
            and math.isfinite(self.t)
        ):
            raise ValueError("parameters must be finite")
        if self.sigma_plus < 0.0:
            raise ValueError(f"sigma_plus must be nonnegative, got {self.sigma_plus}")
        if self.sigma_minus > 0.0:
            raise ValueError(f"sigma_minus must be nonpositive, got {self.sigma_minus}")
        if self.t < 0.0:
            raise ValueError(f"t must be nonnegative, got {self.t}")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge; carries the best estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (best estimate {estimate!r})")
        self.estimate = estimate


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _check_order(n: int) -> None:
    if n < 0:
        raise ValueError(f"moment order must be nonnegative, got {n}")
    if n > MAX_MOMENT_ORDER:
        raise ValueError(
            f"moment order {n} exceeds the supported maximum {MAX_MOMENT_ORDER}"
        )


def moment_abs(params: GNormalParams, n: int) -> float:
    """E|X|^n at variance sigma_plus * t.

    Even orders give (n-1)!! * v^(n/2); odd orders n = 2k+1 give
    2^k * k! * sqrt(2/pi) * v^(n/2). Order zero is 1 regardless of the
    parameters.
    """
    _check_order(n)
    if n == 0:
        return 1.0
    variance = params.sigma_plus * params.t
    if n % 2 == 0:
        return _double_factorial(n - 1) * variance ** (n // 2)
    k = (n - 1) // 2
    return (2.0**k) * math.factorial(k) * math.sqrt(2.0 / math.pi) * variance ** (n / 2.0)


def moment_even_signed(params: GNormalParams, n: int, sign: int) -> float:
    """E[X^n] (sign +1) or E[-X^n] (sign -1) for even n.

    The positive branch uses the upper variance rate, the negative branch
    the magnitude of the lower one:

        +1 -> (n-1)!! * (sigma_plus * t)^(n/2)
        -1 -> -(n-1)!! * (|sigma_minus| * t)^(n/2)
    """
    _check_order(n)
    if n <= 0 or n % 2 != 0:
        raise ValueError(f"n must be a positive even integer, got {n}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if sign == 1:
        return _double_factorial(n - 1) * (params.sigma_plus * params.t) ** (n // 2)
    return -_double_factorial(n - 1) * (-params.sigma_minus * params.t) ** (n // 2)


def _gaussian_quadrature(
    payoff: Callable[[float], float], variance: float, x: float
) -> float:
    sd = math.sqrt(variance)
    norm = 1.0 / (sd * math.sqrt(2.0 * math.pi))

    def integrand(y: float) -> float:
        z = (y - x) / sd
        return float(payoff(np.asarray(y, dtype=float))) * math.exp(-0.5 * z * z) * norm

    lo = x - _QUAD_HALF_WIDTH_SIGMAS * sd
    hi = x + _QUAD_HALF_WIDTH_SIGMAS * sd
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abs_err = integrate.quad(
                integrand, lo, hi, epsabs=_QUAD_ABS_TOL, epsrel=1e-10, limit=200
            )
        except integrate.IntegrationWarning as exc:
            # re-run without the error filter to recover the estimate
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                value, _ = integrate.quad(
                    integrand, lo, hi, epsabs=_QUAD_ABS_TOL, epsrel=1e-10, limit=200
                )
            raise QuadratureError(f"quadrature did not converge: {exc}", value) from None
    if not math.isfinite(value):
        raise QuadratureError("quadrature produced a non-finite value", value)
    return value


def convex_payoff_value(
    params: GNormalParams, payoff: Callable[[np.ndarray], np.ndarray], x: float
) -> float:
    """Worst-case value of a convex payoff: Gaussian integral at variance
    sigma_plus * t, centered at x. A vanishing variance degenerates to the
    point mass at x."""
    variance = params.sigma_plus * params.t
    if variance == 0.0:
        return float(payoff(np.asarray(x, dtype=float)))
    return _gaussian_quadrature(payoff, variance, x)


def concave_payoff_value(
    params: GNormalParams, payoff: Callable[[np.ndarray], np.ndarray], x: float
) -> float:
    """Worst-case value of a concave payoff: Gaussian integral at variance
    |sigma_minus| * t; sigma_minus == 0 gives the point mass value payoff(x)."""
    variance = -params.sigma_minus * params.t
    if variance == 0.0:
        return float(payoff(np.asarray(x, dtype=float)))
    return _gaussian_quadrature(payoff, variance, x)


def quadratic_form_value(gamma: UncertaintySet, a_mat: SymMatrix, t: float) -> float:
    """E[(A X_t, X_t)] for the worst-case law: twice the generator value, times t."""
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError(f"t must be nonnegative and finite, got {t}")
    return 2.0 * g_value(gamma, a_mat) * t
