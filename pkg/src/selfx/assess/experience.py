"""Durable experience log: one JSON record per line.

Each line is exactly {"behavior": str, "features": {name: number, ...},
"outcome": 0|1}; unknown keys are rejected. Records for one behavior must
all carry the same feature names, so a behavior's log slice is always
trainable. Feature order is normalized to sorted names when reading, which
keeps vector layout independent of how producers ordered their JSON keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

RECORD_KEYS = {"behavior", "features", "outcome"}


class ExperienceLogError(Exception):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f" (log line {line})" if line else ""
        super().__init__(message + where)


@dataclass
class ExperienceRecord:
    behavior: str
    features: dict[str, float]  # insertion order is the vector order
    outcome: int  # 1 when the human was detected correctly

    def to_json(self) -> str:
        return json.dumps({
            "behavior": self.behavior,
            "features": {k: self.features[k] for k in sorted(self.features)},
            "outcome": self.outcome,
        })


def _validate(raw: dict, line: Optional[int] = None) -> ExperienceRecord:
    if not isinstance(raw, dict):
        raise ExperienceLogError("record must be a JSON object", line)
    extra = set(raw) - RECORD_KEYS
    if extra:
        raise ExperienceLogError(f"unknown record keys: {sorted(extra)}", line)
    missing = RECORD_KEYS - set(raw)
    if missing:
        raise ExperienceLogError(f"missing record keys: {sorted(missing)}", line)
    behavior = raw["behavior"]
    if not isinstance(behavior, str) or not behavior:
        raise ExperienceLogError("behavior must be a non-empty string", line)
    features = raw["features"]
    if not isinstance(features, dict) or not features:
        raise ExperienceLogError("features must be a non-empty object", line)
    clean: dict[str, float] = {}
    for name in sorted(features):
        value = features[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ExperienceLogError(f"feature {name!r} must be a number", line)
        clean[name] = float(value)
    outcome = raw["outcome"]
    if isinstance(outcome, bool) or outcome not in (0, 1):
        raise ExperienceLogError("outcome must be 0 or 1", line)
    return ExperienceRecord(behavior, clean, int(outcome))


def read_log(path: Union[str, Path]) -> list[ExperienceRecord]:
    records = []
    shapes: dict[str, frozenset] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExperienceLogError(f"bad JSON: {exc.msg}", lineno)
        record = _validate(raw, lineno)
        shape = frozenset(record.features)
        if record.behavior in shapes and shapes[record.behavior] != shape:
            raise ExperienceLogError(
                f"feature names for behavior {record.behavior!r} changed", lineno)
        shapes.setdefault(record.behavior, shape)
        records.append(record)
    return records


def records_for(records: list[ExperienceRecord], behavior: str) -> list[ExperienceRecord]:
    return [r for r in records if r.behavior == behavior]


def append_experience(path: Union[str, Path],
                      record: Union[ExperienceRecord, dict]) -> int:
    """Validate, append one record, return the new record count for its behavior.

    Callers that keep a trained map for the behavior should retrain from
    the grown log; maps are immutable snapshots.
    """
    if isinstance(record, dict):
        record = _validate(record)
    else:
        record = _validate({"behavior": record.behavior,
                            "features": record.features,
                            "outcome": record.outcome})
    path = Path(path)
    existing: list[ExperienceRecord] = []
    if path.exists():
        existing = read_log(path)
        same = records_for(existing, record.behavior)
        if same and frozenset(same[0].features) != frozenset(record.features):
            raise ExperienceLogError(
                f"feature names do not match the existing log for "
                f"behavior {record.behavior!r}")
    with path.open("a", encoding="utf-8") as fh:
        fh.write(record.to_json() + "\n")
    return len(records_for(existing, record.behavior)) + 1
