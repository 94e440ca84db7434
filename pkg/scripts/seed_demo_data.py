#!/usr/bin/env python3
"""Populate a demo store with synthetic users, submissions, and help threads,
then print the statistics report.  Useful for trying `authorctl stats` and
the mail/progress endpoints without a live class.

    python scripts/seed_demo_data.py [--store demo.db] [--exercises exercises]
"""

import argparse
import random

from gradebox import specdsl
from gradebox.report import GradeReport, Verdict
from gradebox.store import Store


def fake_report(correct: bool) -> dict:
    verdict = Verdict.CORRECT if correct else Verdict.INCORRECT
    return GradeReport(verdict=verdict).to_record()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--store", default="demo.db")
    parser.add_argument("--exercises", default="exercises")
    parser.add_argument("--users", type=int, default=24)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    specs = specdsl.load_exercise_dir(args.exercises)

    # A forged clock lets registration-to-completion times span hours to weeks.
    now = {"t": 1_700_000_000.0}

    def clock() -> float:
        return now["t"]

    with Store(args.store, clock=clock) as store:
        store.register_exercises(specs.keys())

        teacher = store.create_user("demo-teacher")
        students = []
        for i in range(args.users):
            now["t"] += rng.uniform(60, 86_400)
            students.append(store.create_user(f"demo-student-{i:02d}"))

        for student in students:
            if rng.random() < 0.5:
                store.set_guru(student.user_id, teacher.user_id)
            for exercise_id in specs:
                attempts = rng.randint(0, 5)
                solved = False
                for _ in range(attempts):
                    now["t"] += rng.uniform(30, 3 * 86_400)
                    solved = solved or rng.random() < 0.4
                    store.record_submission(
                        student.user_id, exercise_id, "print('try')", fake_report(solved)
                    )
                    if solved:
                        break
            if rng.random() < 0.3:
                store.file_help(
                    student.user_id,
                    rng.choice(sorted(specs)),
                    "I am stuck, can you help?",
                    "print('my attempt')",
                )

        stats = store.stats_report()
        print(f"store written to {args.store}")
        print(f"completions series: {len(stats.completions)} exercises")
        print(f"submission series:  {len(stats.submission_counts)} users")
        print(f"octile series:      {len(stats.octiles)} exercises")
        print("run: authorctl stats --store", args.store)


if __name__ == "__main__":
    main()
