"""Structured records for inequality checks and certificates.

Every check in the package returns a VerificationReport rather than a bare
bool: the two sides of the inequality, the worst margin, the tolerance it
was judged against, and enough parameters to replay the check.  Reports
serialize to plain JSON so batteries can be archived and diffed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["VerificationReport"]


def _jsonify(obj):
    # numpy scalars/arrays leak into details; JSON needs builtins
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


@dataclass
class VerificationReport:
    """Outcome of one numerical inequality check.

    margin is rhs - lhs for single comparisons, or the minimum such gap
    over all points/components of a compound check; passed means
    margin >= -tolerance.
    """

    check: str
    parameters: dict[str, Any]
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    seed: int | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "parameters": _jsonify(self.parameters),
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
            "seed": self.seed,
            "details": _jsonify(self.details),
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "VerificationReport":
        return cls(
            check=doc["check"],
            parameters=dict(doc.get("parameters", {})),
            lhs=float(doc["lhs"]),
            rhs=float(doc["rhs"]),
            margin=float(doc["margin"]),
            tolerance=float(doc["tolerance"]),
            passed=bool(doc["passed"]),
            seed=doc.get("seed"),
            details=dict(doc.get("details", {})),
        )
