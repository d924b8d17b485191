"""Structured, deterministic relation reports.

A report is a list of checks in a fixed construction order; two runs with
the same configuration serialize to byte-identical JSON.  Wall-clock
timing is kept on the object for interactive display but deliberately
excluded from the serialized form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ASSERTED = "asserted"
FLAGGED = "flagged"
STUDY = "study"


@dataclass
class Check:
    check_id: str
    status: str                 # pass | fail | skipped
    severity: str = ASSERTED    # asserted | flagged | study
    modes: tuple | None = None
    probe: str | None = None
    detail: dict | None = None
    residual: list | None = None

    def to_json(self):
        d = {"id": self.check_id, "status": self.status, "severity": self.severity}
        if self.modes is not None:
            d["modes"] = list(self.modes)
        if self.probe is not None:
            d["probe"] = self.probe
        if self.detail:
            d["detail"] = self.detail
        if self.residual is not None:
            d["residual"] = self.residual
        return d


@dataclass
class RelationReport:
    relation: str
    params: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    elapsed_s: float | None = None  # in-memory only, never serialized

    def add(self, check: Check):
        self.checks.append(check)

    def extend(self, other: "RelationReport"):
        self.checks.extend(other.checks)

    @property
    def summary(self):
        s = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            if c.severity == ASSERTED:
                s[c.status] += 1
        s["flagged"] = sum(1 for c in self.checks if c.severity == FLAGGED)
        s["study"] = sum(1 for c in self.checks if c.severity == STUDY)
        return s

    def all_passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks if c.severity == ASSERTED)

    def failed_checks(self):
        return [c for c in self.checks if c.severity == ASSERTED and c.status == "fail"]

    def to_json_dict(self):
        return {
            "relation": self.relation,
            "params": self.params,
            "checks": [c.to_json() for c in self.checks],
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def merge_reports(relation: str, params: dict, reports) -> RelationReport:
    out = RelationReport(relation, params)
    for r in reports:
        out.checks.extend(r.checks)
    return out
