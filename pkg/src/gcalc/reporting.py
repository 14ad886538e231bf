"""Deterministic text artifacts: JSON reports, CSV tables, check lines.

Everything here is a pure function of its inputs. Reports carry no
timestamps, keys are sorted, and floats use shortest round-trip text, so a
repeated run with the same configuration and seeds produces byte-identical
files.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "Check",
    "json_report_text",
    "csv_table_text",
    "sha256_of_text",
    "check_line",
    "checks_to_report",
]


@dataclass(frozen=True)
class Check:
    """One named pass/fail measurement with its supporting numbers."""

    name: str
    passed: bool
    measured: Mapping[str, float] = field(default_factory=dict)
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": dict(self.measured),
            "detail": self.detail,
        }


def _normalize(obj: Any) -> Any:
    """Coerce report trees to plain JSON types with deterministic text.

    Non-finite floats become their repr strings rather than failing the
    whole report; a failed measurement still deserves a written record.
    """
    if isinstance(obj, Mapping):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def json_report_text(obj: Any) -> str:
    return json.dumps(_normalize(obj), sort_keys=True, indent=2) + "\n"


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    text = str(value)
    if any(ch in text for ch in ",\n\r\""):
        raise ValueError(f"CSV cell may not contain separators or quotes: {text!r}")
    return text


def csv_table_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Fixed column order, one header line, repr floats, trailing newline."""
    width = len(header)
    lines = [",".join(str(h) for h in header)]
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
        lines.append(",".join(_csv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def check_line(check: Check) -> str:
    verdict = "PASS" if check.passed else "FAIL"
    suffix = f"  {check.detail}" if check.detail else ""
    return f"{verdict}  {check.name}{suffix}"


def checks_to_report(suite_name: str, checks: Sequence[Check], config: Mapping) -> dict:
    return {
        "suite": suite_name,
        "all_passed": all(c.passed for c in checks),
        "checks": [c.to_json_dict() for c in checks],
        "config": dict(config),
    }
