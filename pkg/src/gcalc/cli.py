"""Command line front end for the worst-case expectation engine.

Every subcommand resolves its configuration through the same layering
(built-in defaults, then the TOML file, then GCALC_ environment variables,
then flags), prints a deterministic report to stdout, and with ``--out``
snapshots the report plus a manifest that records content hashes for every
file written. Exit codes: 0 for success, 1 for a failed check, 2 for a
configuration or parameter error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Callable, Optional

import numpy as np

from . import __version__
from .acceptance import SUITE_NAMES, moment_rows, run_suite
from .config import ConfigError, gamma_from_config, load_config, solver_from_config
from .manifest import RunManifest, write_manifest, write_text_outputs
from .martingale import jensen_check, scalar_function_from_name
from .paths import (
    Partition,
    generate_path,
    path_to_csv_text,
    quadratic_variation,
    scenario_sup_expect,
    volatility_ladder,
)
from .pde import evaluate_pt
from .reporting import check_line, checks_to_report, csv_table_text, json_report_text
from .riskdemo import RiskDemoSpec, run_risk_demo
from .sde import euler_solve, picard_contraction, sde_from_name, state_path_to_csv_text
from .uncertainty import Direction, Interval1D

AXIS = Direction.of(1.0)

_TABULAR_COMMANDS = ("price", "moments", "qv")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML configuration file")
    common.add_argument(
        "--seed", type=int, metavar="N", help="override paths.seed and sde.seed"
    )
    common.add_argument(
        "--out", metavar="DIR", help="write the report, data files and a manifest here"
    )
    common.add_argument(
        "--grid-points", type=int, metavar="N", help="override pde.n_points"
    )
    common.add_argument(
        "--paths", type=int, metavar="N", help="override paths.n_paths and sde.n_paths"
    )
    common.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="report format; csv applies to price, moments and qv",
    )

    parser = argparse.ArgumentParser(
        prog="gcalc",
        description="Worst-case expectations under volatility uncertainty.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser(
        "price", parents=[common], help="worst-case value of a terminal payoff"
    )
    p_price.add_argument(
        "--payoff", choices=("call", "put", "abs", "poly"), default="call"
    )
    p_price.add_argument("--strike", type=float, default=0.0)
    p_price.add_argument(
        "--coeffs",
        metavar="C0,C1,...",
        help="polynomial coefficients for --payoff poly, ascending degree",
    )
    p_price.add_argument(
        "--t", type=float, help="horizon (default: paths.horizon from the config)"
    )
    p_price.add_argument(
        "--x", type=float, default=0.0, help="spot level along the main direction"
    )

    p_moments = sub.add_parser(
        "moments", parents=[common], help="benchmark moment table against closed forms"
    )
    p_moments.add_argument(
        "--t", type=float, help="horizon (default: paths.horizon from the config)"
    )

    p_qv = sub.add_parser(
        "qv", parents=[common], help="scenario statistics of the square variation"
    )
    p_qv.add_argument(
        "--power", type=int, default=1, help="moment of the terminal square variation"
    )
    p_qv.add_argument(
        "--ladder", type=int, default=5, help="number of constant volatility scenarios"
    )

    sub.add_parser(
        "sde",
        parents=[common],
        help="contraction diagnostics for the configured state equation",
    )

    p_jensen = sub.add_parser(
        "jensen", parents=[common], help="generator convexity and the Jensen gap"
    )
    p_jensen.add_argument(
        "--function",
        default="square",
        help="transform name: linear, neg_linear, square, neg_square, exp or poly",
    )
    p_jensen.add_argument(
        "--coefficients",
        metavar="C0,C1,...",
        help="coefficients for --function poly, ascending degree",
    )
    p_jensen.add_argument(
        "--payoff", choices=("identity", "abs", "square"), default="identity"
    )

    p_risk = sub.add_parser(
        "risk-demo",
        parents=[common],
        help="two-trader square-variation demo against the supervisor bracket",
    )
    p_risk.add_argument("--horizon", type=float, default=1.0)
    p_risk.add_argument("--claim", choices=("qv", "neg-qv"), default="qv")
    p_risk.add_argument(
        "--sigma-low", type=float, default=0.49, help="bottom volatility of the demo set"
    )
    p_risk.add_argument(
        "--sigma-high", type=float, default=1.0, help="top volatility of the demo set"
    )

    p_suite = sub.add_parser("suite", parents=[common], help="run a named check suite")
    p_suite.add_argument("name", choices=SUITE_NAMES)
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides.setdefault("paths", {})["seed"] = args.seed
        overrides.setdefault("sde", {})["seed"] = args.seed
    if args.grid_points is not None:
        overrides.setdefault("pde", {})["n_points"] = args.grid_points
    if args.paths is not None:
        overrides.setdefault("paths", {})["n_paths"] = args.paths
        overrides.setdefault("sde", {})["n_paths"] = args.paths
    return overrides


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers, got {text!r}")
    if not values:
        raise ConfigError(f"{what} must name at least one number")
    return values


def _require_interval(gamma) -> Interval1D:
    if not isinstance(gamma, Interval1D):
        raise ConfigError(
            "this command needs gamma.kind = 'interval1d' in the configuration"
        )
    return gamma


def _price_payoff(args: argparse.Namespace) -> tuple[Callable, str]:
    strike = float(args.strike)
    if args.payoff == "call":
        return (
            lambda x: np.maximum(np.asarray(x, dtype=float) - strike, 0.0),
            f"call(strike={strike})",
        )
    if args.payoff == "put":
        return (
            lambda x: np.maximum(strike - np.asarray(x, dtype=float), 0.0),
            f"put(strike={strike})",
        )
    if args.payoff == "abs":
        return (lambda x: np.abs(np.asarray(x, dtype=float)), "abs")
    if args.coeffs is None:
        raise ConfigError("--payoff poly needs --coeffs")
    coeffs = _parse_floats(args.coeffs, "--coeffs")

    def poly(x):
        y = np.asarray(x, dtype=float)
        acc = np.zeros_like(y)
        for c in reversed(coeffs):
            acc = acc * y + c
        return acc

    return poly, f"poly({' '.join(repr(c) for c in coeffs)})"


def _finish(
    args: argparse.Namespace,
    config: dict,
    command: str,
    report: dict,
    started: float,
    *,
    table: Optional[tuple[list, list]] = None,
    extras: Optional[dict] = None,
    stdout_lines: Optional[list[str]] = None,
) -> None:
    """Print the report and, with --out, snapshot outputs plus a manifest."""
    as_csv = args.format == "csv" and table is not None
    if stdout_lines is not None:
        for line in stdout_lines:
            print(line)
    elif as_csv:
        sys.stdout.write(csv_table_text(*table))
    else:
        sys.stdout.write(json_report_text(report))

    if not args.out:
        return
    texts = {}
    if as_csv:
        texts["report.csv"] = csv_table_text(*table)
    else:
        texts["report.json"] = json_report_text(report)
    if extras:
        texts.update(extras)
    records = write_text_outputs(args.out, texts)
    manifest = RunManifest(
        command=command,
        config=config,
        seeds={"paths": config["paths"]["seed"], "sde": config["sde"]["seed"]},
        version=__version__,
        wall_time_s=time.perf_counter() - started,
        outputs=records,
    )
    write_manifest(args.out, manifest)


def cmd_price(args, config, command, started) -> int:
    gamma = gamma_from_config(config)
    cfg = solver_from_config(config)
    horizon = args.t if args.t is not None else config["paths"]["horizon"]
    payoff, label = _price_payoff(args)
    value = evaluate_pt(gamma, AXIS, payoff, horizon, args.x, cfg)
    report = {
        "command": "price",
        "payoff": label,
        "t": horizon,
        "x": args.x,
        "value": value,
        "config": config,
    }
    table = (["payoff", "t", "x", "value"], [[label, horizon, args.x, value]])
    _finish(args, config, command, report, started, table=table)
    return 0


def cmd_moments(args, config, command, started) -> int:
    gamma = _require_interval(gamma_from_config(config))
    cfg = solver_from_config(config)
    horizon = args.t if args.t is not None else config["paths"]["horizon"]
    rows = moment_rows(gamma, horizon, cfg)
    header = ["order", "closed_form", "solver_value", "abs_error"]
    report = {
        "command": "moments",
        "t": horizon,
        "rows": [dict(zip(header, row)) for row in rows],
        "config": config,
    }
    table = (header, [list(row) for row in rows])
    _finish(args, config, command, report, started, table=table)
    return 0


def cmd_qv(args, config, command, started) -> int:
    gamma = _require_interval(gamma_from_config(config))
    if args.power < 1:
        raise ConfigError(f"--power must be at least 1, got {args.power}")
    paths_cfg = config["paths"]
    part = Partition.uniform(paths_cfg["horizon"], paths_cfg["n_steps"])
    ladder = volatility_ladder(gamma, part, args.ladder)
    power = args.power

    def terminal_qv_power(path) -> float:
        return float(quadratic_variation(path, AXIS)[-1]) ** power

    result = scenario_sup_expect(
        terminal_qv_power, gamma, ladder, paths_cfg["n_paths"], paths_cfg["seed"]
    )
    closed = (gamma.sigma_high**2 * paths_cfg["horizon"]) ** power
    report = {
        "command": "qv",
        "power": power,
        "estimate": result.value,
        "closed_form": closed,
        "scenario": result.to_json_dict(),
        "config": config,
    }
    header = ["scenario", "mean", "standard_error"]
    table_rows = [
        [i, float(m), float(se)]
        for i, (m, se) in enumerate(zip(result.means, result.standard_errors))
    ]
    extras = {
        "sample_path.csv": path_to_csv_text(
            generate_path(result.argmax_control, paths_cfg["seed"], 0)
        )
    }
    _finish(
        args, config, command, report, started, table=(header, table_rows), extras=extras
    )
    return 0


def cmd_sde(args, config, command, started) -> int:
    gamma = _require_interval(gamma_from_config(config))
    sde_cfg = config["sde"]
    x0 = sde_cfg["x0"]
    if isinstance(x0, list):
        if len(x0) != 1:
            raise ConfigError("sde: the named presets take a scalar x0")
        x0 = x0[0]
    spec = sde_from_name(sde_cfg["name"], x0=float(x0), **sde_cfg["params"])
    part = Partition.uniform(config["paths"]["horizon"], sde_cfg["n_steps"])
    ladder = volatility_ladder(gamma, part, 3)
    picard = picard_contraction(
        spec,
        gamma,
        ladder,
        sde_cfg["n_paths"],
        sde_cfg["seed"],
        iterations=sde_cfg["iterations"],
    )
    state = euler_solve(spec, generate_path(ladder[-1], sde_cfg["seed"], 0))
    report = {"command": "sde", "picard": picard.to_json_dict(), "config": config}
    extras = {"state_path.csv": state_path_to_csv_text(state)}
    _finish(args, config, command, report, started, extras=extras)
    return 0 if picard.status in ("contractive", "zero_initial_distance") else 1


def cmd_jensen(args, config, command, started) -> int:
    gamma = gamma_from_config(config)
    if gamma.dim != 1:
        raise ConfigError("jensen needs a one-dimensional volatility set")
    coefficients = None
    if args.coefficients is not None:
        coefficients = _parse_floats(args.coefficients, "--coefficients")
    h = scalar_function_from_name(args.function, coefficients)
    payoffs = {
        "identity": lambda y: np.asarray(y, dtype=float),
        "abs": lambda y: np.abs(np.asarray(y, dtype=float)),
        "square": lambda y: np.asarray(y, dtype=float) ** 2,
    }
    result = jensen_check(
        h,
        payoffs[args.payoff],
        gamma,
        AXIS,
        config["paths"]["horizon"],
        solver_from_config(config),
        prefix_points=121,
        nested_points=101,
    )
    report = {
        "command": "jensen",
        "function": h.label,
        "payoff": args.payoff,
        "jensen": result.to_json_dict(),
        "config": config,
    }
    _finish(args, config, command, report, started)
    return 0 if result.consistent else 1


def cmd_risk_demo(args, config, command, started) -> int:
    paths_cfg = config["paths"]
    spec = RiskDemoSpec(
        gamma=Interval1D(args.sigma_low, args.sigma_high),
        horizon=args.horizon,
        claim="qv" if args.claim == "qv" else "neg_qv",
        n_steps=paths_cfg["n_steps"],
        n_paths=paths_cfg["n_paths"],
        seed=paths_cfg["seed"],
    )
    result = run_risk_demo(spec)
    report = {
        "command": "risk_demo",
        "claim": spec.claim,
        "horizon": spec.horizon,
        "result": result.to_json_dict(),
        "config": config,
    }
    _finish(args, config, command, report, started)
    return 0 if result.all_contained else 1


def cmd_suite(args, config, command, started) -> int:
    suite_cfg = config["suite"]
    checks = run_suite(
        args.name,
        battery_dicts=suite_cfg["battery"],
        tolerance=suite_cfg["tolerance"],
    )
    lines = [check_line(c) for c in checks]
    report = checks_to_report(args.name, checks, config)
    _finish(args, config, command, report, started, stdout_lines=lines)
    return 0 if all(c.passed for c in checks) else 1


_HANDLERS = {
    "price": cmd_price,
    "moments": cmd_moments,
    "qv": cmd_qv,
    "sde": cmd_sde,
    "jensen": cmd_jensen,
    "risk-demo": cmd_risk_demo,
    "suite": cmd_suite,
}


def main(argv: Optional[list[str]] = None) -> int:
    tokens = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(tokens)
    command = " ".join(["gcalc"] + tokens)
    started = time.perf_counter()
    try:
        config = load_config(
            args.config, environ=os.environ, cli_overrides=_overrides_from_args(args)
        )
        return _HANDLERS[args.command](args, config, command, started)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
