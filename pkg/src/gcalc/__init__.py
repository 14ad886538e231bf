"""Numerical engine for sublinear expectations driven by volatility uncertainty.

The package prices terminal payoffs by the worst case over a set of
volatility scenarios, simulates the driving paths under explicit scenario
controls, and checks the calculus that connects the two: operator axioms,
integral contracts, the chain rule with its second-order correction, and a
contracting fixed-point construction for state equations.

The usual entry points:

- ``Interval1D``, ``DiagonalBox``, ``FiniteMatrixSet``: volatility sets.
- ``evaluate_pt``, ``solve_gheat_1d``: worst-case heat flow solvers.
- ``expect``, ``conditional_expect``: functional expectations.
- ``generate_path``, ``ito_integral``, ``quadratic_variation``: paths.
- ``sde_from_name``, ``euler_solve``, ``picard_contraction``: equations.
- ``run_suite``: the named check suites behind ``gcalc suite``.
"""

from .acceptance import SUITE_NAMES, run_suite
from .config import ConfigError, default_config, load_config
from .expectation import (
    CylinderFunctional,
    conditional_expect,
    expect,
    verify_expectation_axioms,
)
from .gnormal import GNormalParams, moment_abs, moment_even_signed
from .martingale import is_generator_convex, jensen_check
from .paths import (
    Partition,
    SamplePath,
    ScenarioControl,
    generate_path,
    ito_integral,
    quadratic_variation,
    scenario_sup_expect,
    volatility_ladder,
)
from .pde import SolverConfig, evaluate_pt, solve_gheat_1d
from .riskdemo import RiskDemoSpec, run_risk_demo
from .sde import SdeSpec, euler_solve, picard_contraction, sde_from_name
from .uncertainty import DiagonalBox, Direction, FiniteMatrixSet, Interval1D

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SUITE_NAMES",
    "run_suite",
    "ConfigError",
    "default_config",
    "load_config",
    "CylinderFunctional",
    "conditional_expect",
    "expect",
    "verify_expectation_axioms",
    "GNormalParams",
    "moment_abs",
    "moment_even_signed",
    "is_generator_convex",
    "jensen_check",
    "Partition",
    "SamplePath",
    "ScenarioControl",
    "generate_path",
    "ito_integral",
    "quadratic_variation",
    "scenario_sup_expect",
    "volatility_ladder",
    "SolverConfig",
    "evaluate_pt",
    "solve_gheat_1d",
    "RiskDemoSpec",
    "run_risk_demo",
    "SdeSpec",
    "euler_solve",
    "picard_contraction",
    "sde_from_name",
    "DiagonalBox",
    "Direction",
    "FiniteMatrixSet",
    "Interval1D",
]
