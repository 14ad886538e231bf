"""Two traders pricing the same variation claim under different scenarios.

Trader ``a`` prices under a constant unit volatility, trader ``b`` under a
constant half volatility. Both scenarios are admissible for the configured
volatility interval, so a supervisor evaluating the claim with the
worst-case operator brackets both prices: the upper bound is the worst-case
expectation of the claim, the lower bound the negated worst-case
expectation of its negation. For the realized-variance claim the brackets
have closed forms, the interval endpoints squared times the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .paths import Partition, ScenarioControl, generate_path, quadratic_variation
from .pde import SolverConfig, evaluate_pt
from .uncertainty import Direction, Interval1D

__all__ = ["RiskDemoSpec", "RiskDemoReport", "run_risk_demo"]

_TRADER_RATES = {"a": 1.0, "b": 0.5}


@dataclass(frozen=True)
class RiskDemoSpec:
    """Volatility interval, claim choice and simulation sizes for the demo.

    The interval must contain both trader scenarios with room to spare:
    the low end sits strictly below one half and the high end at or above
    one. ``claim`` selects the realized variance of the driving path at the
    horizon or its negation.
    """

    gamma: Interval1D
    horizon: float = 1.0
    claim: Literal["qv", "neg_qv"] = "qv"
    n_steps: int = 2000
    n_paths: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.gamma.sigma_low < 0.5):
            raise ValueError(
                f"sigma_low must lie in [0, 0.5), got {self.gamma.sigma_low}"
            )
        if self.gamma.sigma_high < 1.0:
            raise ValueError(
                f"sigma_high must be at least 1, got {self.gamma.sigma_high}"
            )
        if not (math.isfinite(self.horizon) and self.horizon >= 0.0):
            raise ValueError(f"horizon must be nonnegative and finite, got {self.horizon}")
        if self.claim not in ("qv", "neg_qv"):
            raise ValueError(f"claim must be 'qv' or 'neg_qv', got {self.claim!r}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be positive, got {self.n_steps}")
        if self.n_paths < 2:
            raise ValueError(f"need at least two paths, got {self.n_paths}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")


@dataclass(frozen=True)
class RiskDemoReport:
    """Scenario prices with standard errors against the supervisor bracket.

    ``closed_form_*`` are the analytic targets for the realized-variance
    claim; containment is judged with a three-standard-error allowance
    because the scenario prices are sample means while the bracket itself
    comes from the deterministic solver.
    """

    trader_a: float
    trader_b: float
    se_a: float
    se_b: float
    lower_bound: float
    upper_bound: float
    closed_form_a: float
    closed_form_b: float
    closed_lower: float
    closed_upper: float
    contained_a: bool
    contained_b: bool

    @property
    def all_contained(self) -> bool:
        return self.contained_a and self.contained_b

    def to_json_dict(self) -> dict:
        return {
            "trader_a": self.trader_a,
            "trader_b": self.trader_b,
            "se_a": self.se_a,
            "se_b": self.se_b,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "closed_form_a": self.closed_form_a,
            "closed_form_b": self.closed_form_b,
            "closed_lower": self.closed_lower,
            "closed_upper": self.closed_upper,
            "contained_a": self.contained_a,
            "contained_b": self.contained_b,
            "all_contained": self.all_contained,
        }


def _scenario_price(
    spec: RiskDemoSpec, rate: float, sign: float, block: int
) -> tuple[float, float]:
    """Sample mean and standard error of the claim under one constant rate."""
    part = Partition.uniform(spec.horizon, spec.n_steps)
    control = ScenarioControl.constant(part, [[rate]])
    a = Direction.of(1.0)
    base = block * spec.n_paths
    samples = np.empty(spec.n_paths)
    for i in range(spec.n_paths):
        path = generate_path(control, spec.seed, path_index=base + i)
        samples[i] = sign * quadratic_variation(path, a)[-1]
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(spec.n_paths))


def run_risk_demo(spec: RiskDemoSpec, cfg: Optional[SolverConfig] = None) -> RiskDemoReport:
    """Price the claim under both trader scenarios and bracket them.

    A zero horizon is the degenerate case where every quantity is zero and
    containment holds trivially; no simulation runs.
    """
    if cfg is None:
        cfg = SolverConfig()
    sign = 1.0 if spec.claim == "qv" else -1.0
    t = spec.horizon
    hi2 = spec.gamma.sigma_high**2
    lo2 = spec.gamma.sigma_low**2
    if t == 0.0:
        return RiskDemoReport(
            trader_a=0.0,
            trader_b=0.0,
            se_a=0.0,
            se_b=0.0,
            lower_bound=0.0,
            upper_bound=0.0,
            closed_form_a=0.0,
            closed_form_b=0.0,
            closed_lower=0.0,
            closed_upper=0.0,
            contained_a=True,
            contained_b=True,
        )
    e_a, se_a = _scenario_price(spec, _TRADER_RATES["a"], sign, block=0)
    e_b, se_b = _scenario_price(spec, _TRADER_RATES["b"], sign, block=1)
    a = Direction.of(1.0)
    # the claim's terminal law matches the squared level, so the bracket
    # comes from two quadratic heat-flow evaluations
    plus = evaluate_pt(spec.gamma, a, lambda x: sign * x * x, t, 0.0, cfg)
    minus = evaluate_pt(spec.gamma, a, lambda x: -sign * x * x, t, 0.0, cfg)
    upper = plus
    lower = -minus
    contained_a = lower - 3.0 * se_a <= e_a <= upper + 3.0 * se_a
    contained_b = lower - 3.0 * se_b <= e_b <= upper + 3.0 * se_b
    return RiskDemoReport(
        trader_a=e_a,
        trader_b=e_b,
        se_a=se_a,
        se_b=se_b,
        lower_bound=lower,
        upper_bound=upper,
        closed_form_a=sign * _TRADER_RATES["a"] ** 2 * t,
        closed_form_b=sign * _TRADER_RATES["b"] ** 2 * t,
        closed_lower=(lo2 * t) if sign > 0 else (-hi2 * t),
        closed_upper=(hi2 * t) if sign > 0 else (-lo2 * t),
        contained_a=contained_a,
        contained_b=contained_b,
    )
