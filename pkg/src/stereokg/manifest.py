"""Run manifests for reproducible pipeline executions.

The manifest content is deterministic: configuration hash, seed, tool
version, and per-stage paths, counts and drop reasons. Wall-clock timings
go to a sidecar file so manifests from identical runs compare byte-equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import DataError


@dataclass
class StageRecord:
    name: str
    inputs: list[str]
    outputs: list[str]
    count_in: int
    count_out: int
    drops: dict[str, int] = field(default_factory=dict)


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    tool_version: str = __version__
    stages: list[StageRecord] = field(default_factory=list)

    def add_stage(self, name: str, inputs: list[str], outputs: list[str],
                  count_in: int, count_out: int, drops: dict[str, int] | None = None) -> None:
        self.stages.append(
            StageRecord(
                name=name,
                inputs=list(inputs),
                outputs=list(outputs),
                count_in=count_in,
                count_out=count_out,
                drops=dict(sorted((drops or {}).items())),
            )
        )

    def check_telescoping(self) -> None:
        """Whenever a stage reads a file another stage produced, the consumer
        must see exactly the record count the producer declared."""
        produced: dict[str, tuple[str, int]] = {}
        for stage in self.stages:
            for inp in stage.inputs:
                if inp in produced:
                    producer, count = produced[inp]
                    if stage.count_in != count:
                        raise DataError(
                            f"stage {stage.name} read {stage.count_in} records from {inp}, "
                            f"but stage {producer} wrote {count}"
                        )
            for out in stage.outputs:
                produced[out] = (stage.name, stage.count_out)

    def as_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "stages": [
                {
                    "name": s.name,
                    "inputs": s.inputs,
                    "outputs": s.outputs,
                    "count_in": s.count_in,
                    "count_out": s.count_out,
                    "drops": s.drops,
                }
                for s in self.stages
            ],
        }

    def save(self, path: str | Path) -> None:
        self.check_telescoping()
        Path(path).write_text(
            json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def load_manifest(path: str | Path) -> RunManifest:
    path = Path(path)
    if not path.exists():
        raise DataError(f"expected run manifest {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    manifest = RunManifest(
        config_hash=doc["config_hash"], seed=doc["seed"], tool_version=doc["tool_version"]
    )
    for s in doc["stages"]:
        manifest.add_stage(
            s["name"], s["inputs"], s["outputs"], s["count_in"], s["count_out"], s.get("drops")
        )
    return manifest
