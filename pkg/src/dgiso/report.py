"""Structured verification results and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "to_dict"):
        return _jsonable(value.to_dict())
    return str(value)


@dataclass
class VerificationReport:
    """Outcome of one named check.

    ``check`` is a stable identifier such as ``"rays_optimal"``;
    ``witnesses`` holds whatever numbers justify the verdict.
    """

    check: str
    parameters: dict[str, Any]
    passed: bool
    witnesses: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_dict(self, *, timing: bool = True) -> dict[str, Any]:
        out = {
            "check": self.check,
            "parameters": self.parameters,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "tolerances": self.tolerances,
            "notes": self.notes,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return _jsonable(out)

    def to_json(self, *, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing=timing), sort_keys=True)


REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["check", "parameters", "passed", "witnesses", "tolerances", "notes"],
    "properties": {
        "check": {"type": "string", "minLength": 1},
        "parameters": {"type": "object"},
        "passed": {"type": "boolean"},
        "witnesses": {"type": "object"},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": ["number", "string"]},
        },
        "notes": {"type": "array", "items": {"type": "string"}},
        "wall_time": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

SUITE_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["passed", "n_reports", "n_failed", "failed_checks", "config", "reports"],
    "properties": {
        "passed": {"type": "boolean"},
        "n_reports": {"type": "integer", "minimum": 0},
        "n_failed": {"type": "integer", "minimum": 0},
        "failed_checks": {"type": "array", "items": {"type": "string"}},
        "config": {"type": "object"},
        "reports": {"type": "array", "items": REPORT_SCHEMA},
    },
    "additionalProperties": False,
}
