"""Author and operator command line tool.

    authorctl validate <spec-file>...        check specs, nonzero exit on errors
    authorctl grade <spec> <solution> [--seed N] [--json]
    authorctl selfcheck <exercise-dir> [--jobs N] [--seed N]
    authorctl stats --store PATH [--csv OUT]

Exit codes: 0 success, 1 validation/grading failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import specdsl
from .grader import grade
from .report import Verdict
from .specdsl import ShortcodeParseError, effective_solver
from .store import Store

__all__ = ["main"]


def _cmd_validate(args: argparse.Namespace) -> int:
    worst = 0
    for path in args.spec_files:
        try:
            spec = specdsl.load_spec_file(path, strict=True)
        except (OSError, ShortcodeParseError) as exc:
            print(f"{path}: ERROR {exc}")
            worst = 1
            continue
        issues = specdsl.validate_spec(spec)
        errors = [i for i in issues if i.severity == "error"]
        for issue in issues:
            print(f"{path}: {issue.severity.upper()} {issue.message}")
        if errors:
            worst = 1
        elif not issues:
            print(f"{path}: OK")
    return worst


def _cmd_grade(args: argparse.Namespace) -> int:
    try:
        spec = specdsl.load_spec_file(args.spec_file, strict=True)
    except (OSError, ShortcodeParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    errors = specdsl.spec_errors(spec)
    if errors:
        print(f"error: spec does not validate: {errors[0].message}", file=sys.stderr)
        return 1
    submission = Path(args.solution_file).read_text(encoding="utf-8")
    seed = args.seed if args.seed is not None else random.getrandbits(63)
    report = grade(spec, submission, seed)
    if args.json:
        sys.stdout.write(report.canonical_json())
    else:
        sys.stdout.write(report.render_text())
    return 0 if report.verdict is Verdict.CORRECT else 1


def _cmd_selfcheck(args: argparse.Namespace) -> int:
    directory = Path(args.exercise_dir)
    try:
        specs = specdsl.load_exercise_dir(directory, strict=True)
    except (OSError, ShortcodeParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not specs:
        print(f"warning: no exercises found in {directory}")
        return 0

    seed = args.seed if args.seed is not None else random.getrandbits(63)

    def check(item: tuple[str, specdsl.ExerciseSpec]) -> tuple[str, str]:
        exercise_id, spec = item
        issues = specdsl.spec_errors(spec)
        if issues:
            return exercise_id, f"INVALID ({issues[0].message})"
        solver = effective_solver(spec)
        if not solver:
            return exercise_id, "FAIL (no solver to check)"
        report = grade(spec, solver, seed)
        if report.verdict is Verdict.CORRECT:
            return exercise_id, "ok"
        failing = next((r for r in report.results if not r.passed), None)
        why = f"; {failing.label}: {failing.detail or failing.observed}" if failing else ""
        return exercise_id, f"FAIL ({report.verdict.value}{why})"

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outcomes = list(pool.map(check, sorted(specs.items())))

    failed = 0
    for exercise_id, status in outcomes:
        print(f"{exercise_id}: {status}")
        if status != "ok":
            failed += 1
    print(f"{len(outcomes) - failed}/{len(outcomes)} exercises pass selfcheck")
    return 1 if failed else 0


def _cmd_stats(args: argparse.Namespace) -> int:
    with Store(args.store) as store:
        stats = store.stats_report()

    rows: list[tuple[str, str, str]] = []
    for exercise_id, count in stats.completions:
        rows.append(("completions", exercise_id, str(count)))
    for user_id, count in stats.submission_counts:
        rows.append(("submissions", user_id, str(count)))
    for exercise_id, octs in stats.octiles:
        for k, value in enumerate(octs, 1):
            rows.append((f"octile_{k}_of_8", exercise_id, f"{value:.6f}"))

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["series", "key", "value"])
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.csv}")
    else:
        print("series,key,value")
        for row in rows:
            print(",".join(row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="authorctl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate exercise spec files")
    p.add_argument("spec_files", nargs="+", metavar="spec-file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("grade", help="grade a solution file against a spec")
    p.add_argument("spec_file", metavar="spec-file")
    p.add_argument("solution_file", metavar="solution-file")
    p.add_argument("--seed", type=int, default=None, help="master seed (reports are deterministic per seed)")
    p.add_argument("--json", action="store_true", help="emit the canonical JSON report")
    p.set_defaults(func=_cmd_grade)

    p = sub.add_parser("selfcheck", help="verify every spec's solver passes its own spec")
    p.add_argument("exercise_dir", metavar="exercise-dir")
    p.add_argument("--jobs", type=int, default=4, help="parallel grading jobs (sandbox cap)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_selfcheck)

    p = sub.add_parser("stats", help="usage statistics from a store file")
    p.add_argument("--store", default="gradebox.db", help="store file path")
    p.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
