"""Grade reports: the per-test table and overall verdict a submission earns."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass


class Verdict(enum.Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    TIME_LIMIT = "TimeLimit"
    RUNTIME_ERROR = "RuntimeError"
    CONSTRAINT_VIOLATION = "ConstraintViolation"
    GRADER_ERROR = "GraderError"


@dataclass(frozen=True)
class TestResult:
    round_index: int  # 1-based grading round
    label: str  # autotest expression, "input #k", error requirement, or check label
    expected: str
    observed: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class GradeReport:
    verdict: Verdict
    results: tuple[TestResult, ...] = ()
    constraint_notes: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "results": [
                {
                    "round": r.round_index,
                    "label": r.label,
                    "expected": r.expected,
                    "observed": r.observed,
                    "passed": r.passed,
                    "detail": r.detail,
                }
                for r in self.results
            ],
            "constraint_notes": list(self.constraint_notes),
        }

    def canonical_json(self) -> str:
        """Stable byte-for-byte rendering (reports are deterministic for a
        fixed master seed, so repeated runs must serialize identically)."""
        return json.dumps(self.to_record(), sort_keys=True, indent=2) + "\n"

    def render_text(self) -> str:
        lines = [f"verdict: {self.verdict.value}"]
        for note in self.constraint_notes:
            lines.append(f"note: {note}")
        if self.results:
            lines.append(f"{'round':>5}  {'ok':<4} {'test':<28} {'expected':<24} observed")
            for r in self.results:
                mark = "pass" if r.passed else "FAIL"
                lines.append(
                    f"{r.round_index:>5}  {mark:<4} {r.label:<28} {r.expected:<24} {r.observed}"
                )
                if r.detail and not r.passed:
                    lines.append(f"{'':>12}{r.detail}")
        return "\n".join(lines) + "\n"


def report_from_record(record: dict) -> GradeReport:
    return GradeReport(
        verdict=Verdict(record["verdict"]),
        results=tuple(
            TestResult(
                round_index=r["round"],
                label=r["label"],
                expected=r["expected"],
                observed=r["observed"],
                passed=r["passed"],
                detail=r.get("detail", ""),
            )
            for r in record.get("results", ())
        ),
        constraint_notes=tuple(record.get("constraint_notes", ())),
    )
