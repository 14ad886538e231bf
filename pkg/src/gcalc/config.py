"""Layered run configuration: defaults, file, environment, command line.

The document is a TOML file with five fixed sections. Later layers override
earlier ones key by key: built-in defaults, then the ``--config`` file, then
``GCALC_<SECTION>_<KEY>`` environment variables, then command-line flags.
Environment values are parsed as TOML literals, with a bare-word fallback so
``GCALC_GAMMA_KIND=interval1d`` works without quoting.

The serializer is the exact inverse of the parser on this document family:
``parse(serialize(parse(text)))`` equals ``parse(text)`` for any accepted
``text``.
"""

from __future__ import annotations

import copy
import json
import os
import re
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import tomli

from .pde import SolverConfig
from .uncertainty import UncertaintySet, uncertainty_from_dict

__all__ = [
    "CONFIG_SECTIONS",
    "ENV_PREFIX",
    "ConfigError",
    "default_config",
    "parse_config_text",
    "serialize_config",
    "env_overrides",
    "merge_config",
    "load_config",
    "validate_config",
    "gamma_from_config",
    "solver_from_config",
]

CONFIG_SECTIONS = ("gamma", "pde", "paths", "sde", "suite")
ENV_PREFIX = "GCALC_"

# keys whose contents are free-form: gamma holds whatever the named kind
# needs, sde.params feeds the coefficient preset, suite.battery rows feed
# the functional templates
_SECTION_KEYS = {
    "gamma": None,
    "pde": {"n_points", "cfl_factor", "boundary_policy", "radius_multiplier"},
    "paths": {"horizon", "n_steps", "n_paths", "seed"},
    "sde": {"name", "x0", "params", "n_steps", "n_paths", "seed", "iterations"},
    "suite": {"battery", "tolerance"},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def default_config() -> dict:
    return {
        "gamma": {"kind": "interval1d", "sigma_low": 0.5, "sigma_high": 1.0},
        "pde": {
            "n_points": 401,
            "cfl_factor": 0.5,
            "boundary_policy": "linear_extrapolation",
            "radius_multiplier": 6.0,
        },
        "paths": {"horizon": 1.0, "n_steps": 1000, "n_paths": 10000, "seed": 0},
        "sde": {
            "name": "linear",
            "x0": 1.0,
            "params": {},
            "n_steps": 200,
            "n_paths": 300,
            "seed": 0,
            "iterations": 8,
        },
        "suite": {"battery": [], "tolerance": 5e-3},
    }


def parse_config_text(text: str) -> dict:
    """Parse a TOML document and reject unknown sections and keys."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    for section, body in doc.items():
        if section not in CONFIG_SECTIONS:
            raise ConfigError(
                f"unknown section [{section}], expected one of {', '.join(CONFIG_SECTIONS)}"
            )
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table, got {type(body).__name__}")
        allowed = _SECTION_KEYS[section]
        if allowed is None:
            continue
        for key in body:
            if key not in allowed:
                raise ConfigError(
                    f"unknown key {section}.{key}, expected one of {', '.join(sorted(allowed))}"
                )
    return doc


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _format_scalar(value: Any, where: str) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # repr is shortest round-trip text and valid TOML for finite floats
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise ConfigError(f"{where}: cannot serialize value of type {type(value).__name__}")


_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")


def _format_key(key: str) -> str:
    return key if _BARE_KEY.match(key) else json.dumps(key)


def _format_value(value: Any, where: str) -> str:
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ", ".join(
            f"{_format_key(k)} = {_format_value(value[k], f'{where}.{k}')}"
            for k in sorted(value)
        )
        return "{ " + inner + " }"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v, where) for v in value) + "]"
    return _format_scalar(value, where)


def serialize_config(doc: Mapping[str, Any]) -> str:
    """Emit the document as TOML with a stable section and key order."""
    lines: list[str] = []
    for section in CONFIG_SECTIONS:
        if section not in doc:
            continue
        body = doc[section]
        plain = {k: v for k, v in body.items() if not _is_structured(v)}
        tables = {k: v for k, v in body.items() if isinstance(v, dict)}
        rows = {
            k: v
            for k, v in body.items()
            if isinstance(v, (list, tuple)) and len(v) > 0 and all(isinstance(e, dict) for e in v)
        }
        lines.append(f"[{section}]")
        for key in sorted(plain):
            lines.append(f"{key} = {_format_value(plain[key], f'{section}.{key}')}")
        for key in sorted(tables):
            lines.append(f"[{section}.{key}]")
            for sub in sorted(tables[key]):
                lines.append(
                    f"{sub} = {_format_value(tables[key][sub], f'{section}.{key}.{sub}')}"
                )
        for key in sorted(rows):
            for entry in rows[key]:
                lines.append(f"[[{section}.{key}]]")
                for sub in sorted(entry):
                    lines.append(
                        f"{sub} = {_format_value(entry[sub], f'{section}.{key}.{sub}')}"
                    )
        lines.append("")
    return "\n".join(lines)


def _is_structured(value: Any) -> bool:
    if isinstance(value, dict):
        return True
    return (
        isinstance(value, (list, tuple))
        and len(value) > 0
        and all(isinstance(e, dict) for e in value)
    )


# ---------------------------------------------------------------------------
# Layering
# ---------------------------------------------------------------------------


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> dict:
    """Collect GCALC_<SECTION>_<KEY> overrides as a partial document."""
    if environ is None:
        environ = os.environ
    out: dict = {}
    for key in sorted(environ):
        if not key.startswith(ENV_PREFIX):
            continue
        rest = key[len(ENV_PREFIX):]
        section, _, field = rest.partition("_")
        section = section.lower()
        field = field.lower()
        if section not in CONFIG_SECTIONS or not field:
            raise ConfigError(
                f"environment variable {key} does not name a config field "
                f"(expected {ENV_PREFIX}<SECTION>_<KEY>)"
            )
        out.setdefault(section, {})[field] = _parse_env_value(environ[key])
    return out


def _parse_env_value(raw: str) -> Any:
    try:
        return tomli.loads(f"v = {raw}")["v"]
    except tomli.TOMLDecodeError:
        return raw


def merge_config(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict:
    """Deep merge: tables merge key by key, everything else is replaced."""
    out = copy.deepcopy(dict(base))
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = merge_config(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(
    path: Optional[Union[str, Path]] = None,
    environ: Optional[Mapping[str, str]] = None,
    cli_overrides: Optional[Mapping[str, Any]] = None,
) -> dict:
    """Assemble the effective document from all layers and validate it."""
    doc = default_config()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        doc = merge_config(doc, parse_config_text(p.read_text()))
    doc = merge_config(doc, env_overrides(environ))
    if cli_overrides:
        doc = merge_config(doc, cli_overrides)
    validate_config(doc)
    return doc


# ---------------------------------------------------------------------------
# Validation and typed accessors
# ---------------------------------------------------------------------------


def _need_number(doc: dict, section: str, key: str, *, minimum=None, strict=False) -> float:
    value = doc[section].get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if minimum is not None:
        if strict and not value > minimum:
            raise ConfigError(f"{section}.{key} must be greater than {minimum}, got {value}")
        if not strict and not value >= minimum:
            raise ConfigError(f"{section}.{key} must be at least {minimum}, got {value}")
    return float(value)


def _need_int(doc: dict, section: str, key: str, *, minimum: int) -> int:
    value = doc[section].get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{section}.{key} must be at least {minimum}, got {value}")
    return value


def validate_config(doc: dict) -> dict:
    """Check types and ranges across all sections; returns the document."""
    for section in CONFIG_SECTIONS:
        if section not in doc or not isinstance(doc[section], dict):
            raise ConfigError(f"missing section [{section}]")
    gamma_from_config(doc)
    solver_from_config(doc)
    _need_number(doc, "paths", "horizon", minimum=0.0, strict=True)
    _need_int(doc, "paths", "n_steps", minimum=1)
    _need_int(doc, "paths", "n_paths", minimum=2)
    _need_int(doc, "paths", "seed", minimum=0)
    if not isinstance(doc["sde"].get("name"), str):
        raise ConfigError(f"sde.name must be a string, got {doc['sde'].get('name')!r}")
    x0 = doc["sde"].get("x0")
    if isinstance(x0, (list, tuple)):
        if len(x0) == 0 or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in x0):
            raise ConfigError("sde.x0 must be a number or a nonempty list of numbers")
    elif isinstance(x0, bool) or not isinstance(x0, (int, float)):
        raise ConfigError("sde.x0 must be a number or a nonempty list of numbers")
    if not isinstance(doc["sde"].get("params"), dict):
        raise ConfigError("sde.params must be a table")
    _need_int(doc, "sde", "n_steps", minimum=1)
    _need_int(doc, "sde", "n_paths", minimum=2)
    _need_int(doc, "sde", "seed", minimum=0)
    _need_int(doc, "sde", "iterations", minimum=1)
    _need_number(doc, "suite", "tolerance", minimum=0.0, strict=True)
    battery = doc["suite"].get("battery")
    if not isinstance(battery, list) or any(not isinstance(e, dict) for e in battery):
        raise ConfigError("suite.battery must be an array of tables")
    return doc


def gamma_from_config(doc: dict) -> UncertaintySet:
    try:
        return uncertainty_from_dict(doc["gamma"])
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"gamma: {exc}") from exc


def solver_from_config(doc: dict) -> SolverConfig:
    pde = doc["pde"]
    try:
        return SolverConfig(
            cfl_factor=float(pde["cfl_factor"]),
            boundary_policy=pde["boundary_policy"],
            radius_multiplier=float(pde["radius_multiplier"]),
            n_points=int(pde["n_points"]),
        )
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"pde: {exc}") from exc
