"""Bound-check reports shared by all pipelines."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


@dataclass
class ReportEntry:
    name: str
    value: float
    bound: float | None = None
    slack: float = 0.0
    tag: str = ""  # which estimate this entry checks
    warn_only: bool = False  # violations are recorded but never fail the run

    @property
    def ratio(self):
        if self.bound is None or self.bound == 0:
            return None if self.value == 0 else float("inf")
        return self.value / self.bound

    @property
    def within_bound(self) -> bool:
        if self.bound is None:
            return True
        return self.value <= self.bound * (1 + self.slack) + 1e-15

    @property
    def passed(self) -> bool:
        return True if self.warn_only else self.within_bound

    def to_dict(self):
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "ratio": self.ratio, "pass": self.passed,
                "within_bound": self.within_bound, "slack": self.slack,
                "tag": self.tag, "warn_only": self.warn_only}


@dataclass
class EnergyReport:
    entries: list[ReportEntry] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def add(self, name, value, bound=None, slack=0.0, tag="", warn_only=False):
        e = ReportEntry(name=name, value=float(value),
                        bound=None if bound is None else float(bound),
                        slack=slack, tag=tag, warn_only=warn_only)
        self.entries.append(e)
        return e

    def get(self, name) -> ReportEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self):
        return {"entries": [e.to_dict() for e in self.entries],
                "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2,
                          default=_jsonable)


def _jsonable(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def scenario_hash(obj) -> str:
    """Stable hash of a JSON-serializable scenario description."""
    blob = json.dumps(obj, sort_keys=True, default=_jsonable).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
