"""Run manifests: the record needed to reproduce an invocation bit-exactly.

A manifest snapshots the resolved command, the effective configuration, the
seeds in play, the tool version, and a content hash for every file written.
Re-running the same command with the snapshotted configuration must
reproduce each output with the same hash; wall time is bookkeeping and is
excluded from that contract.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

from .reporting import json_report_text

__all__ = ["OutputRecord", "RunManifest", "hash_file", "write_text_outputs", "write_manifest"]

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class OutputRecord:
    """A written file, addressed relative to the manifest's directory."""

    path: str
    sha256: str

    def to_json_dict(self) -> dict:
        return {"path": self.path, "sha256": self.sha256}


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    seeds: dict
    version: str
    wall_time_s: float
    outputs: tuple[OutputRecord, ...]

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seeds": dict(self.seeds),
            "version": self.version,
            "wall_time_s": self.wall_time_s,
            "outputs": [o.to_json_dict() for o in self.outputs],
        }


def hash_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_text_outputs(
    out_dir: Union[str, Path], named_texts: Mapping[str, str]
) -> tuple[OutputRecord, ...]:
    """Write each text under its file name and return hash records."""
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    records = []
    for name in sorted(named_texts):
        target = base / name
        target.write_text(named_texts[name], encoding="utf-8")
        records.append(OutputRecord(path=name, sha256=hash_file(target)))
    return tuple(records)


def write_manifest(out_dir: Union[str, Path], manifest: RunManifest) -> Path:
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    target = base / MANIFEST_NAME
    target.write_text(json_report_text(manifest.to_json_dict()), encoding="utf-8")
    return target
