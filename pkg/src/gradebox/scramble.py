"""Code-scramble exercises: permuted presentation and order judging.

A scramble exercise ships the canonical solution's lines in a seeded,
non-identity order; the student reorders whole lines.  Correctness is
textual order against the canonical lines, with equal texts interchangeable;
feedback reveals only the first mismatching position, never the expected
line.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .report import GradeReport, TestResult, Verdict
from .specdsl import ExerciseSpec, GradingMode

__all__ = ["ScramblePresentation", "present", "judge_order"]

_MAX_REDRAWS = 128


@dataclass(frozen=True)
class ScramblePresentation:
    """Display lines plus the server-side index map (display position ->
    canonical position).  The permutation never leaves the server."""

    lines: tuple[str, ...]
    permutation: tuple[int, ...]


def _rng_for(spec: ExerciseSpec, seed: int) -> random.Random:
    digest = hashlib.sha256(f"{spec.exercise_id}|{seed}|scramble".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def present(spec: ExerciseSpec, seed: int) -> ScramblePresentation:
    """Deterministic in (spec, seed); uniform over permutations whose line
    sequence differs from the canonical one (the identity, and any ordering
    indistinguishable from it, is redrawn while an alternative exists)."""
    if spec.mode is not GradingMode.SCRAMBLE or len(spec.scramble_lines) < 2:
        raise ValueError(f"spec '{spec.exercise_id}' is not a scramble exercise")
    canonical = list(spec.scramble_lines)
    rng = _rng_for(spec, seed)
    indices = list(range(len(canonical)))
    perm = indices[:]
    for _ in range(_MAX_REDRAWS):
        rng.shuffle(perm)
        if [canonical[i] for i in perm] != canonical:
            break
    return ScramblePresentation(
        lines=tuple(canonical[i] for i in perm),
        permutation=tuple(perm),
    )


def judge_order(spec: ExerciseSpec, submitted: Sequence[str]) -> GradeReport:
    """Correct iff `submitted` matches the canonical lines position by
    position (exact text, leading whitespace included).  Altered or
    missing lines are a constraint violation, not a wrong order."""
    if spec.mode is not GradingMode.SCRAMBLE:
        raise ValueError(f"spec '{spec.exercise_id}' is not a scramble exercise")
    canonical = list(spec.scramble_lines)
    submitted = list(submitted)

    if Counter(submitted) != Counter(canonical):
        return GradeReport(
            verdict=Verdict.CONSTRAINT_VIOLATION,
            constraint_notes=("lines were altered",),
        )

    mismatch = next(
        (k for k, (got, want) in enumerate(zip(submitted, canonical)) if got != want),
        None,
    )
    if mismatch is None:
        result = TestResult(
            round_index=1,
            label="line order",
            expected="canonical order",
            observed="canonical order",
            passed=True,
        )
        return GradeReport(verdict=Verdict.CORRECT, results=(result,))
    result = TestResult(
        round_index=1,
        label="line order",
        expected="canonical order",
        observed=f"first mismatch at line {mismatch + 1}",
        passed=False,
        detail=f"line {mismatch + 1} is out of place",
    )
    return GradeReport(verdict=Verdict.INCORRECT, results=(result,))
