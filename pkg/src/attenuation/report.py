"""Structured verification results."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any


@dataclass
class ExperimentReport:
    """Table of results plus the violations found while producing it.

    A report passes exactly when ``violations`` is empty. Each violation is a
    ``(location, magnitude)`` pair where ``location`` names the row or check.
    """

    name: str
    inputs: dict[str, str]
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    violations: list[tuple[str, float]] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    artifacts: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def summary(self) -> str:
        head = f"[{self.verdict.upper()}] {self.name}: {len(self.rows)} rows"
        if self.violations:
            loc, mag = self.violations[0]
            head += f", {len(self.violations)} violation(s); first at {loc} (magnitude {mag:.3g})"
        return head


def provenance(config: dict[str, Any]) -> dict[str, Any]:
    """Hash of a JSON-serialisable config, alongside the config itself."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return {"config_hash": hashlib.sha256(blob).hexdigest()[:16], **config}
