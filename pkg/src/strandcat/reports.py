"""Structured pass/fail reports emitted by the verification suites."""
from __future__ import annotations

from dataclasses import dataclass, field


PASS = "pass"
FAIL = "fail"
INFO = "info"

# provenance tags mirror the evidence discipline used throughout the suites
PAPER = "paper"
DERIVED = "derived"
TRIVIAL = "trivial"


@dataclass
class ReportEntry:
    check: str
    status: str
    expected: str = ""
    got: str = ""
    provenance: str = DERIVED

    def as_dict(self):
        return {
            "check": self.check,
            "status": self.status,
            "expected": self.expected,
            "got": self.got,
            "provenance": self.provenance,
        }


@dataclass
class Report:
    suite: str
    parameters: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)

    def add(self, check, ok, expected="", got="", provenance=DERIVED):
        status = PASS if ok else FAIL
        self.entries.append(ReportEntry(check, status, str(expected), str(got), provenance))
        return ok

    def info(self, check, got="", provenance=DERIVED):
        self.entries.append(ReportEntry(check, INFO, "", str(got), provenance))

    @property
    def passed(self):
        return all(e.status != FAIL for e in self.entries)

    def failures(self):
        return [e for e in self.entries if e.status == FAIL]

    def as_dict(self):
        return {
            "suite": self.suite,
            "parameters": {k: str(v) for k, v in self.parameters.items()},
            "entries": [e.as_dict() for e in self.entries],
        }

    def summary(self):
        lines = [f"[{self.suite}] {self.parameters}"]
        for e in self.entries:
            lines.append(f"  {e.status.upper():4s} {e.check}"
                         + (f" expected={e.expected} got={e.got}" if e.status == FAIL else ""))
        return "\n".join(lines)
