"""Grade submissions against an exercise spec.

Grading runs in deterministic rounds.  Round seeds derive from the master
seed by a fixed mixing function (SHA-256 over ``"{master_seed}:{round}"``),
each round's expected values come from running the model solution under the
in-sandbox harness with that round's seed, and the submission is then run
the same way and compared.  Everything the student sees is a pure function
of (spec, submission, master seed); timing never appears in a report.

Comparison rules: harness-encoded values compare structurally, numbers
cross-kind with Python semantics and floats at relative tolerance 1e-9;
stdio output compares exactly after normalizing line endings, stripping
trailing whitespace per line, and dropping trailing blank lines.
"""

from __future__ import annotations

import hashlib
import json
import math
import secrets
import sys
from dataclasses import dataclass, replace
from typing import Any

import pyharness

from . import scramble, specdsl
from .report import GradeReport, TestResult, Verdict
from .sandbox import ExecutionOutcome, SandboxPolicy, SandboxStatus, execute
from .specdsl import ExerciseSpec, GradingMode

__all__ = [
    "GraderError",
    "TestPlan",
    "Round",
    "Expected",
    "build_test_plan",
    "grade",
    "levenshtein",
    "run_required_error",
    "run_custom_checker",
    "derive_round_seed",
]

FLOAT_REL_TOL = 1e-9

HARNESS_FILE = "harness.py"
JOB_FILE = "job.json"
STUDENT_FILE = "student.py"

# The report shares the child's stdout with anything the student leaked past
# the in-harness capture, so harness jobs run with a transport cap well above
# the student-visible one (json escaping alone can sextuple the capture).
_TRANSPORT_CAP = 2 * 1024 * 1024


class GraderError(Exception):
    """Authoring or harness-protocol failure: never the student's fault."""


def derive_round_seed(master_seed: int, round_index: int) -> int:
    digest = hashlib.sha256(f"{master_seed}:{round_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def levenshtein(a: str, b: str) -> int:
    """Character-level minimum edit distance, unit-cost insert/delete/substitute."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def normalize_stdout(text: str) -> str:
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Encoded-value comparison
# ---------------------------------------------------------------------------

_NUMERIC_KINDS = {"int", "float", "bool"}


def _as_number(tree: dict) -> int | float:
    if tree["k"] == "int":
        return int(tree["v"])
    if tree["k"] == "bool":
        return int(bool(tree["v"]))
    return float(tree["v"])


def values_equal(a: Any, b: Any) -> bool:
    """Structural equality on harness-encoded values with float tolerance."""
    if not isinstance(a, dict) or not isinstance(b, dict):
        return a == b
    ka, kb = a.get("k"), b.get("k")
    if ka in _NUMERIC_KINDS and kb in _NUMERIC_KINDS:
        x, y = _as_number(a), _as_number(b)
        if isinstance(x, float) or isinstance(y, float):
            x, y = float(x), float(y)
            if math.isnan(x) and math.isnan(y):
                return True
            return math.isclose(x, y, rel_tol=FLOAT_REL_TOL, abs_tol=0.0)
        return x == y
    if ka != kb:
        return False
    if ka in ("list", "tuple", "set", "frozenset"):
        va, vb = a["v"], b["v"]
        return len(va) == len(vb) and all(values_equal(x, y) for x, y in zip(va, vb))
    if ka == "dict":
        va, vb = a["v"], b["v"]
        return len(va) == len(vb) and all(
            values_equal(ka2, kb2) and values_equal(va2, vb2)
            for (ka2, va2), (kb2, vb2) in zip(va, vb)
        )
    return a["v"] == b["v"]


# ---------------------------------------------------------------------------
# Test plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expected:
    kind: str  # "probe" | "stdin" | "error"
    label: str
    rendering: str = ""
    value: Any = None  # encoded tree for probes
    stdin: str | None = None
    stdout: str | None = None  # normalized expected output


@dataclass(frozen=True)
class Round:
    index: int  # 1-based
    seed: int
    resolved_precode: str
    expected: tuple[Expected, ...]


@dataclass(frozen=True)
class TestPlan:
    """One grading run's worth of rounds.  Checker and scramble rounds carry
    no precomputed expectations (the checker or canonical order decides)."""

    exercise_id: str
    master_seed: int
    rounds: tuple[Round, ...]


def _require_valid(spec: ExerciseSpec) -> None:
    errors = specdsl.spec_errors(spec)
    if errors:
        raise ValueError(
            f"spec '{spec.exercise_id}' does not validate: {errors[0].message}"
        )


def _run_job(
    spec: ExerciseSpec,
    student_code: str,
    seed: int,
    policy: SandboxPolicy,
    *,
    probes: tuple[str, ...] = (),
    stdin: str | None = None,
    taboo: tuple[str, ...] = (),
    checker: str | None = None,
) -> tuple[ExecutionOutcome, dict | None, str | None]:
    """Run one harness job; returns (outcome, report, protocol_problem)."""
    sentinel = secrets.token_hex(16)
    job = {
        "version": pyharness.PROTOCOL_VERSION,
        "sentinel": sentinel,
        "seed": seed,
        "precode": spec.precode,
        "student_file": STUDENT_FILE,
        "stdin": stdin,
        "probes": list(probes),
        "taboo": list(taboo),
        "checker": checker,
        "output_cap": policy.output_cap,
    }
    files = {
        HARNESS_FILE: pyharness.runner_source(),
        JOB_FILE: json.dumps(job),
        STUDENT_FILE: student_code,
    }
    transport = replace(policy, output_cap=max(_TRANSPORT_CAP, 2 * policy.output_cap))
    outcome = execute(files, [sys.executable, HARNESS_FILE, JOB_FILE], transport)
    if outcome.status is not SandboxStatus.OK:
        return outcome, None, None
    text = outcome.stdout.decode("utf-8", errors="replace")
    lines = text.split("\n")
    try:
        idx = len(lines) - 1 - lines[::-1].index(sentinel)
    except ValueError:
        return outcome, None, "harness report missing"
    if idx == 0 or lines[idx - 1] != str(pyharness.PROTOCOL_VERSION):
        return outcome, None, "harness report has wrong version prefix"
    if idx + 1 >= len(lines):
        return outcome, None, "harness report truncated"
    try:
        report = json.loads(lines[idx + 1])
    except json.JSONDecodeError:
        return outcome, None, "harness report is not valid JSON"
    if report.get("protocol_error"):
        return outcome, report, f"harness protocol error: {report['protocol_error']}"
    return outcome, report, None


def _plan_round(
    spec: ExerciseSpec, master_seed: int, index: int, policy: SandboxPolicy
) -> Round:
    """Expected values for round `index` (0-based), from the model solution."""
    seed = derive_round_seed(master_seed, index)
    mode = spec.mode
    expected: list[Expected] = []

    if mode in (GradingMode.VARIABLE_CHECK, GradingMode.FUNCTION_CHECK):
        outcome, rpt, problem = _run_job(
            spec, spec.solver, seed, policy, probes=spec.autotests
        )
        _raise_solver_problem(outcome, rpt, problem)
        for entry in rpt["probes"]:
            if entry["error"]:
                raise GraderError(
                    f"solver probe {entry['expr']!r} failed: "
                    f"{entry['error']['cls']}: {entry['error']['msg']}"
                )
            expected.append(
                Expected(
                    kind="probe",
                    label=entry["expr"],
                    rendering=entry["rendering"],
                    value=entry["value"],
                )
            )
    elif mode is GradingMode.STDIO:
        for k, block in enumerate(spec.test_inputs):
            outcome, rpt, problem = _run_job(spec, spec.solver, seed, policy, stdin=block)
            _raise_solver_problem(outcome, rpt, problem)
            norm = normalize_stdout(rpt["stdout"])
            expected.append(
                Expected(
                    kind="stdin",
                    label=f"input #{k + 1}",
                    rendering=norm,
                    stdin=block,
                    stdout=norm,
                )
            )
    elif mode is GradingMode.REQUIRED_ERROR:
        expected.append(
            Expected(
                kind="error",
                label=f"raises {spec.required_error}",
                rendering=spec.required_error,
            )
        )
    # Checker and scramble rounds carry no precomputed expectations.

    return Round(index=index + 1, seed=seed, resolved_precode=spec.precode, expected=tuple(expected))


def _raise_solver_problem(outcome: ExecutionOutcome, rpt: dict | None, problem: str | None) -> None:
    if outcome.status is SandboxStatus.SANDBOX_ERROR:
        raise GraderError(f"sandbox failure while running solver: {outcome.stderr.decode(errors='replace')}")
    if outcome.status is not SandboxStatus.OK:
        raise GraderError(f"solver exceeded limits ({outcome.status.value})")
    if problem:
        raise GraderError(problem)
    if rpt.get("precode_error"):
        e = rpt["precode_error"]
        raise GraderError(f"precode failed: {e['cls']}: {e['msg']}")
    if rpt.get("error"):
        e = rpt["error"]
        raise GraderError(f"solver failed: {e['cls']}: {e['msg']}")


def build_test_plan(spec: ExerciseSpec, master_seed: int, policy: SandboxPolicy | None = None) -> TestPlan:
    """Deterministic in (spec, master_seed); runs the solver to produce
    expected values.  Raises GraderError if the solver itself errors or
    exceeds limits (an authoring bug, never blamed on the student)."""
    _require_valid(spec)
    policy = policy or SandboxPolicy()
    rounds = tuple(_plan_round(spec, master_seed, i, policy) for i in range(spec.repeats))
    return TestPlan(exercise_id=spec.exercise_id, master_seed=master_seed, rounds=rounds)


# ---------------------------------------------------------------------------
# Grading
# ---------------------------------------------------------------------------

def _grader_error_report(message: str) -> GradeReport:
    return GradeReport(
        verdict=Verdict.GRADER_ERROR,
        results=(
            TestResult(
                round_index=1,
                label="grader",
                expected="",
                observed="",
                passed=False,
                detail=message,
            ),
        ),
    )


def _map_bad_status(outcome: ExecutionOutcome, round_index: int) -> tuple[Verdict, TestResult]:
    if outcome.status is SandboxStatus.TIME_LIMIT:
        verdict, detail = Verdict.TIME_LIMIT, "time limit exceeded"
    elif outcome.status is SandboxStatus.MEMORY_LIMIT:
        verdict, detail = Verdict.RUNTIME_ERROR, "memory limit exceeded"
    elif outcome.status is SandboxStatus.OUTPUT_LIMIT:
        verdict, detail = Verdict.RUNTIME_ERROR, "output limit exceeded"
    else:
        verdict, detail = Verdict.RUNTIME_ERROR, "program terminated abnormally"
    result = TestResult(
        round_index=round_index,
        label="execution",
        expected="",
        observed=outcome.status.value,
        passed=False,
        detail=detail,
    )
    return verdict, result


def _probe_observed(entry: dict) -> tuple[str, str]:
    if entry["error"]:
        cls, msg = entry["error"]["cls"], entry["error"]["msg"]
        return f"<{cls}>", f"{cls}: {msg}" if msg else cls
    return entry["rendering"], ""


def grade(
    spec: ExerciseSpec,
    submission: str,
    master_seed: int,
    policy: SandboxPolicy | None = None,
) -> GradeReport:
    """Grade one submission.  Pure in (spec, submission, master_seed): the
    verdict and per-test rows are identical across repeated runs."""
    _require_valid(spec)
    policy = policy or SandboxPolicy()
    mode = spec.mode

    if mode is GradingMode.SCRAMBLE:
        return scramble.judge_order(spec, submission.splitlines())

    notes: list[str] = []
    if spec.max_edit is not None:
        distance = levenshtein(submission, spec.initial_code)
        if distance > spec.max_edit:
            return GradeReport(
                verdict=Verdict.CONSTRAINT_VIOLATION,
                constraint_notes=(
                    f"edit distance {distance} from the given code exceeds the limit of {spec.max_edit}",
                ),
            )

    results: list[TestResult] = []
    verdict: Verdict | None = None
    any_failed = False

    for i in range(spec.repeats):
        try:
            rnd = _plan_round(spec, master_seed, i, policy)
        except GraderError as exc:
            return _grader_error_report(str(exc))

        round_results, round_verdict, round_notes = _grade_round(spec, submission, rnd, policy)
        results.extend(round_results)
        notes.extend(round_notes)
        if round_verdict is not None:
            verdict = round_verdict
            break
        if any(not r.passed for r in round_results):
            any_failed = True
            break

    if verdict is None:
        verdict = Verdict.INCORRECT if any_failed else Verdict.CORRECT
    return GradeReport(verdict=verdict, results=tuple(results), constraint_notes=tuple(notes))


def _grade_round(
    spec: ExerciseSpec,
    submission: str,
    rnd: Round,
    policy: SandboxPolicy,
) -> tuple[list[TestResult], Verdict | None, list[str]]:
    """Returns (results, terminal verdict or None, constraint notes)."""
    mode = spec.mode

    if mode is GradingMode.STDIO:
        return _grade_stdio_round(spec, submission, rnd, policy)

    probes = spec.autotests
    checker = spec.checker or None
    outcome, rpt, problem = _run_job(
        spec,
        submission,
        rnd.seed,
        policy,
        probes=probes,
        taboo=spec.taboo,
        checker=checker,
    )
    if outcome.status is SandboxStatus.SANDBOX_ERROR:
        return (
            _grader_error_report(
                f"sandbox failure: {outcome.stderr.decode(errors='replace')}"
            ).results
        ), Verdict.GRADER_ERROR, []
    if outcome.status is not SandboxStatus.OK:
        verdict, result = _map_bad_status(outcome, rnd.index)
        return [result], verdict, []
    if problem:
        return list(_grader_error_report(problem).results), Verdict.GRADER_ERROR, []
    if rpt.get("precode_error"):
        e = rpt["precode_error"]
        msg = f"precode failed: {e['cls']}: {e['msg']}"
        return list(_grader_error_report(msg).results), Verdict.GRADER_ERROR, []

    if rpt.get("taboo_violation"):
        name = rpt["taboo_violation"]
        return [], Verdict.CONSTRAINT_VIOLATION, [f"use of forbidden builtin '{name}'"]

    if mode is GradingMode.REQUIRED_ERROR:
        return _judge_required_error(spec, rpt, rnd)

    if mode is GradingMode.CUSTOM_CHECKER:
        return _judge_checker(spec, rpt, rnd)

    # Variable / function probes against planned expectations.
    results: list[TestResult] = []
    if rpt.get("error"):
        e = rpt["error"]
        detail = f"{e['cls']}: {e['msg']}" if e["msg"] else e["cls"]
        for exp in rnd.expected:
            results.append(
                TestResult(
                    round_index=rnd.index,
                    label=exp.label,
                    expected=exp.rendering,
                    observed=f"<{e['cls']}>",
                    passed=False,
                    detail=detail,
                )
            )
        return results, Verdict.RUNTIME_ERROR, []

    by_expr = {p["expr"]: p for p in rpt["probes"]}
    for exp in rnd.expected:
        entry = by_expr.get(exp.label)
        if entry is None:
            return (
                list(_grader_error_report(f"harness dropped probe {exp.label!r}").results),
                Verdict.GRADER_ERROR,
                [],
            )
        observed, detail = _probe_observed(entry)
        passed = entry["error"] is None and values_equal(exp.value, entry["value"])
        results.append(
            TestResult(
                round_index=rnd.index,
                label=exp.label,
                expected=exp.rendering,
                observed=observed,
                passed=passed,
                detail=detail,
            )
        )
    return results, None, []


def _grade_stdio_round(
    spec: ExerciseSpec,
    submission: str,
    rnd: Round,
    policy: SandboxPolicy,
) -> tuple[list[TestResult], Verdict | None, list[str]]:
    results: list[TestResult] = []
    for exp in rnd.expected:
        outcome, rpt, problem = _run_job(
            spec, submission, rnd.seed, policy, stdin=exp.stdin, taboo=spec.taboo
        )
        if outcome.status is SandboxStatus.SANDBOX_ERROR:
            return (
                list(
                    _grader_error_report(
                        f"sandbox failure: {outcome.stderr.decode(errors='replace')}"
                    ).results
                ),
                Verdict.GRADER_ERROR,
                [],
            )
        if outcome.status is not SandboxStatus.OK:
            verdict, result = _map_bad_status(outcome, rnd.index)
            return results + [result], verdict, []
        if problem:
            return list(_grader_error_report(problem).results), Verdict.GRADER_ERROR, []
        if rpt.get("precode_error"):
            e = rpt["precode_error"]
            msg = f"precode failed: {e['cls']}: {e['msg']}"
            return list(_grader_error_report(msg).results), Verdict.GRADER_ERROR, []
        if rpt.get("taboo_violation"):
            name = rpt["taboo_violation"]
            return results, Verdict.CONSTRAINT_VIOLATION, [f"use of forbidden builtin '{name}'"]
        if rpt.get("error"):
            e = rpt["error"]
            detail = f"{e['cls']}: {e['msg']}" if e["msg"] else e["cls"]
            results.append(
                TestResult(
                    round_index=rnd.index,
                    label=exp.label,
                    expected=exp.rendering,
                    observed=f"<{e['cls']}>",
                    passed=False,
                    detail=detail,
                )
            )
            return results, Verdict.RUNTIME_ERROR, []
        observed = normalize_stdout(rpt["stdout"])
        truncated = rpt.get("stdout_truncated", False)
        passed = not truncated and observed == exp.stdout
        detail = "output truncated" if truncated else ""
        results.append(
            TestResult(
                round_index=rnd.index,
                label=exp.label,
                expected=exp.rendering,
                observed=observed,
                passed=passed,
                detail=detail,
            )
        )
    return results, None, []


def _judge_required_error(
    spec: ExerciseSpec, rpt: dict, rnd: Round
) -> tuple[list[TestResult], Verdict | None, list[str]]:
    label = f"raises {spec.required_error}"
    err = rpt.get("error")
    if err is None:
        result = TestResult(
            round_index=rnd.index,
            label=label,
            expected=spec.required_error,
            observed="no error",
            passed=False,
            detail="program exited normally",
        )
        return [result], None, []
    passed = err["cls"] == spec.required_error
    detail = "" if passed else f"raised {err['cls']}: {err['msg']}" if err["msg"] else f"raised {err['cls']}"
    result = TestResult(
        round_index=rnd.index,
        label=label,
        expected=spec.required_error,
        observed=err["cls"],
        passed=passed,
        detail=detail,
    )
    return [result], None, []


def _judge_checker(
    spec: ExerciseSpec, rpt: dict, rnd: Round
) -> tuple[list[TestResult], Verdict | None, list[str]]:
    if rpt.get("checker_error"):
        e = rpt["checker_error"]
        msg = f"checker failed: {e['cls']}: {e['msg']}"
        return list(_grader_error_report(msg).results), Verdict.GRADER_ERROR, []
    checks = rpt.get("checks") or []
    results = []
    for j, chk in enumerate(checks, 1):
        results.append(
            TestResult(
                round_index=rnd.index,
                label=f"check #{j}",
                expected="pass",
                observed="pass" if chk["passed"] else "fail",
                passed=bool(chk["passed"]),
                detail=chk.get("message", ""),
            )
        )
    return results, None, []


# ---------------------------------------------------------------------------
# Single-technique entry points (thin wrappers used by tests and tools)
# ---------------------------------------------------------------------------

def run_required_error(
    spec: ExerciseSpec, submission: str, master_seed: int, round_index: int = 0,
    policy: SandboxPolicy | None = None,
) -> TestResult:
    """Judge one round of a required-error exercise."""
    if not spec.required_error:
        raise ValueError("spec has no required_error")
    policy = policy or SandboxPolicy()
    rnd = _plan_round(spec, master_seed, round_index, policy)
    outcome, rpt, problem = _run_job(
        spec, submission, rnd.seed, policy, taboo=spec.taboo
    )
    if outcome.status is not SandboxStatus.OK or problem or (rpt and rpt.get("precode_error")):
        raise GraderError(problem or f"execution failed ({outcome.status.value})")
    results, _, _ = _judge_required_error(spec, rpt, rnd)
    return results[0]


def run_custom_checker(
    spec: ExerciseSpec, submission: str, master_seed: int, round_index: int = 0,
    policy: SandboxPolicy | None = None,
) -> list[TestResult]:
    """Run one round of a custom-checker exercise; GraderError on checker crash."""
    if not spec.checker:
        raise ValueError("spec has no checker")
    policy = policy or SandboxPolicy()
    rnd = _plan_round(spec, master_seed, round_index, policy)
    outcome, rpt, problem = _run_job(
        spec,
        submission,
        rnd.seed,
        policy,
        probes=spec.autotests,
        taboo=spec.taboo,
        checker=spec.checker,
    )
    if outcome.status is not SandboxStatus.OK or problem or (rpt and rpt.get("precode_error")):
        raise GraderError(problem or f"execution failed ({outcome.status.value})")
    results, verdict, _ = _judge_checker(spec, rpt, rnd)
    if verdict is Verdict.GRADER_ERROR:
        raise GraderError(results[0].detail)
    return results
