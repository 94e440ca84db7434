"""Persistence: users, submissions, progress, help threads, statistics.

Backed by a single sqlite file (transactional appends, concurrent readers).
Submission history is append-only with strictly increasing timestamps per
(user, exercise) stream; progress flips to completed on the first Correct
verdict and never reverts.  History and mail-context reads are authorized
here, not in the HTTP layer: a student's history is visible to the student,
their guru, and staff; a thread's context bundle only to its recipient.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

__all__ = [
    "Store",
    "StoreError",
    "UnknownUserError",
    "UnknownExerciseError",
    "AuthorizationError",
    "DuplicateUserError",
    "User",
    "Submission",
    "ProgressEntry",
    "HelpThread",
    "MailContext",
    "StatsReport",
    "STAFF_QUEUE",
    "CODE_CAP_BYTES",
]

STAFF_QUEUE = "@staff"
CODE_CAP_BYTES = 64 * 1024


class StoreError(Exception):
    pass


class UnknownUserError(StoreError):
    pass


class UnknownExerciseError(StoreError):
    pass


class AuthorizationError(StoreError):
    pass


class DuplicateUserError(StoreError):
    pass


@dataclass(frozen=True)
class User:
    user_id: str
    display_name: str
    guru_id: str | None
    registered_at: int  # microseconds since epoch


@dataclass(frozen=True)
class Submission:
    submission_id: int
    user_id: str
    exercise_id: str
    code: str
    timestamp: int  # microseconds, strictly increasing per (user, exercise)
    report: dict

    def to_record(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "exercise_id": self.exercise_id,
            "timestamp": self.timestamp,
            "code": self.code,
            "report": self.report,
        }


@dataclass(frozen=True)
class ProgressEntry:
    user_id: str
    exercise_id: str
    completed: bool
    first_completed_at: int | None


@dataclass(frozen=True)
class HelpThread:
    thread_id: int
    user_id: str
    exercise_id: str
    message: str
    attached_code: str
    recipient: str  # a user id, or STAFF_QUEUE
    created_at: int
    replies: tuple[tuple[str, str, int], ...] = ()  # (author_id, text, at)


@dataclass(frozen=True)
class MailContext:
    thread: HelpThread
    history: tuple[Submission, ...]
    progress: tuple[ProgressEntry, ...]
    related_threads: tuple[HelpThread, ...]


@dataclass(frozen=True)
class StatsReport:
    """The three usage series: per-exercise completion counts (descending),
    per-user submission counts (descending), and per-exercise octiles of
    time from registration to first completion (nearest-rank, k/8 for
    k=1..7), in seconds, over exercises with at least one completer."""

    completions: tuple[tuple[str, int], ...]
    submission_counts: tuple[tuple[str, int], ...]
    octiles: tuple[tuple[str, tuple[float, ...]], ...]


_SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id TEXT PRIMARY KEY,
    display_name TEXT NOT NULL UNIQUE,
    guru_id TEXT REFERENCES users(user_id),
    registered_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS submissions (
    submission_id INTEGER PRIMARY KEY AUTOINCREMENT,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    exercise_id TEXT NOT NULL,
    code TEXT NOT NULL,
    report_json TEXT NOT NULL,
    timestamp INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_submissions_stream
    ON submissions(user_id, exercise_id, timestamp);
CREATE TABLE IF NOT EXISTS progress (
    user_id TEXT NOT NULL REFERENCES users(user_id),
    exercise_id TEXT NOT NULL,
    completed INTEGER NOT NULL DEFAULT 0,
    first_completed_at INTEGER,
    PRIMARY KEY (user_id, exercise_id)
);
CREATE TABLE IF NOT EXISTS threads (
    thread_id INTEGER PRIMARY KEY AUTOINCREMENT,
    user_id TEXT NOT NULL REFERENCES users(user_id),
    exercise_id TEXT NOT NULL,
    message TEXT NOT NULL,
    attached_code TEXT NOT NULL,
    recipient TEXT NOT NULL,
    created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS replies (
    reply_id INTEGER PRIMARY KEY AUTOINCREMENT,
    thread_id INTEGER NOT NULL REFERENCES threads(thread_id),
    author_id TEXT NOT NULL,
    text TEXT NOT NULL,
    created_at INTEGER NOT NULL
);
"""


class Store:
    """Embedded transactional store.  One instance may be shared across
    threads: reads see consistent snapshots, writes serialize on a lock."""

    def __init__(self, path: str | Path, clock: Callable[[], float] = time.time):
        self._clock = clock
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA foreign_keys=ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)
        self._exercises: set[str] = set()
        self._staff: set[str] = set()

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _now_us(self) -> int:
        return int(self._clock() * 1_000_000)

    # -- configuration ------------------------------------------------------

    def register_exercises(self, exercise_ids: Iterable[str]) -> None:
        self._exercises = set(exercise_ids)

    @property
    def exercises(self) -> frozenset[str]:
        return frozenset(self._exercises)

    def set_staff(self, user_ids: Iterable[str]) -> None:
        self._staff = set(user_ids)

    def is_staff(self, user_id: str) -> bool:
        return user_id in self._staff

    # -- users ---------------------------------------------------------------

    def create_user(self, display_name: str, user_id: str | None = None) -> User:
        display_name = display_name.strip()
        if not display_name:
            raise StoreError("display name must not be empty")
        uid = user_id or "u" + uuid.uuid4().hex[:12]
        now = self._now_us()
        with self._lock:
            try:
                with self._conn:
                    self._conn.execute(
                        "INSERT INTO users (user_id, display_name, guru_id, registered_at)"
                        " VALUES (?, ?, NULL, ?)",
                        (uid, display_name, now),
                    )
            except sqlite3.IntegrityError:
                raise DuplicateUserError(f"display name {display_name!r} is taken")
        return User(uid, display_name, None, now)

    def get_user(self, user_id: str) -> User:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM users WHERE user_id = ?", (user_id,)
            ).fetchone()
        if row is None:
            raise UnknownUserError(f"unknown user {user_id!r}")
        return User(row["user_id"], row["display_name"], row["guru_id"], row["registered_at"])

    def find_user_by_name(self, display_name: str) -> User | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM users WHERE display_name = ?", (display_name.strip(),)
            ).fetchone()
        if row is None:
            return None
        return User(row["user_id"], row["display_name"], row["guru_id"], row["registered_at"])

    def set_guru(self, user_id: str, guru_id: str | None) -> User:
        user = self.get_user(user_id)
        if guru_id is not None:
            if guru_id == user_id:
                raise StoreError("a user cannot be their own guru")
            self.get_user(guru_id)
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE users SET guru_id = ? WHERE user_id = ?", (guru_id, user_id)
            )
        return User(user.user_id, user.display_name, guru_id, user.registered_at)

    def _require_exercise(self, exercise_id: str) -> None:
        if exercise_id not in self._exercises:
            raise UnknownExerciseError(f"unknown exercise {exercise_id!r}")

    # -- submissions and progress ---------------------------------------------

    def record_submission(
        self, user_id: str, exercise_id: str, code: str, report: dict
    ) -> Submission:
        """Append one submission atomically; progress updates in the same
        transaction (completed flips on a Correct verdict and never back)."""
        self.get_user(user_id)
        self._require_exercise(exercise_id)
        if len(code.encode("utf-8")) > CODE_CAP_BYTES:
            raise StoreError(f"code exceeds the {CODE_CAP_BYTES} byte cap")
        verdict = report.get("verdict")
        report_json = json.dumps(report, sort_keys=True)
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT MAX(timestamp) AS t FROM submissions"
                " WHERE user_id = ? AND exercise_id = ?",
                (user_id, exercise_id),
            ).fetchone()
            last = row["t"] or 0
            ts = max(self._now_us(), last + 1)
            cur = self._conn.execute(
                "INSERT INTO submissions (user_id, exercise_id, code, report_json, timestamp)"
                " VALUES (?, ?, ?, ?, ?)",
                (user_id, exercise_id, code, report_json, ts),
            )
            self._conn.execute(
                "INSERT OR IGNORE INTO progress (user_id, exercise_id, completed)"
                " VALUES (?, ?, 0)",
                (user_id, exercise_id),
            )
            if verdict == "Correct":
                self._conn.execute(
                    "UPDATE progress SET completed = 1, first_completed_at = ?"
                    " WHERE user_id = ? AND exercise_id = ? AND completed = 0",
                    (ts, user_id, exercise_id),
                )
            submission_id = cur.lastrowid
        return Submission(submission_id, user_id, exercise_id, code, ts, report)

    def _may_view(self, owner_id: str, requester_id: str) -> bool:
        if requester_id == owner_id or self.is_staff(requester_id):
            return True
        owner = self.get_user(owner_id)
        return owner.guru_id is not None and owner.guru_id == requester_id

    def history(
        self, user_id: str, exercise_id: str, *, requester_id: str
    ) -> list[Submission]:
        """All submissions in timestamp order, latest last.  Visible to the
        user, their guru, and staff only."""
        self.get_user(user_id)
        if not self._may_view(user_id, requester_id):
            raise AuthorizationError("not allowed to view this history")
        return self._history_unchecked(user_id, exercise_id)

    def _history_unchecked(self, user_id: str, exercise_id: str) -> list[Submission]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM submissions WHERE user_id = ? AND exercise_id = ?"
                " ORDER BY timestamp",
                (user_id, exercise_id),
            ).fetchall()
        return [
            Submission(
                r["submission_id"], r["user_id"], r["exercise_id"], r["code"],
                r["timestamp"], json.loads(r["report_json"]),
            )
            for r in rows
        ]

    def latest_code(self, user_id: str, exercise_id: str) -> str | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT code FROM submissions WHERE user_id = ? AND exercise_id = ?"
                " ORDER BY timestamp DESC LIMIT 1",
                (user_id, exercise_id),
            ).fetchone()
        return None if row is None else row["code"]

    def progress_snapshot(self, user_id: str) -> list[ProgressEntry]:
        self.get_user(user_id)
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM progress WHERE user_id = ? ORDER BY exercise_id",
                (user_id,),
            ).fetchall()
        return [
            ProgressEntry(
                r["user_id"], r["exercise_id"], bool(r["completed"]), r["first_completed_at"]
            )
            for r in rows
        ]

    # -- help threads ----------------------------------------------------------

    def file_help(
        self, user_id: str, exercise_id: str, message: str, attached_code: str
    ) -> HelpThread:
        """Route a help request to the user's guru, or to the staff queue
        when no guru is set.  The attached code is stored verbatim."""
        user = self.get_user(user_id)
        self._require_exercise(exercise_id)
        recipient = user.guru_id if user.guru_id else STAFF_QUEUE
        now = self._now_us()
        with self._lock, self._conn:
            cur = self._conn.execute(
                "INSERT INTO threads (user_id, exercise_id, message, attached_code,"
                " recipient, created_at) VALUES (?, ?, ?, ?, ?, ?)",
                (user_id, exercise_id, message, attached_code, recipient, now),
            )
            thread_id = cur.lastrowid
        return HelpThread(thread_id, user_id, exercise_id, message, attached_code, recipient, now)

    def get_thread(self, thread_id: int) -> HelpThread:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM threads WHERE thread_id = ?", (thread_id,)
            ).fetchone()
            replies = self._conn.execute(
                "SELECT * FROM replies WHERE thread_id = ? ORDER BY created_at",
                (thread_id,),
            ).fetchall()
        if row is None:
            raise StoreError(f"unknown thread {thread_id}")
        return HelpThread(
            row["thread_id"], row["user_id"], row["exercise_id"], row["message"],
            row["attached_code"], row["recipient"], row["created_at"],
            tuple((r["author_id"], r["text"], r["created_at"]) for r in replies),
        )

    def _is_recipient(self, thread: HelpThread, requester_id: str) -> bool:
        if thread.recipient == STAFF_QUEUE:
            return self.is_staff(requester_id)
        return thread.recipient == requester_id

    def threads_for(self, requester_id: str) -> list[HelpThread]:
        """Threads addressed to this requester (staff see the staff queue)."""
        self.get_user(requester_id)
        targets = [requester_id]
        if self.is_staff(requester_id):
            targets.append(STAFF_QUEUE)
        with self._lock:
            rows = self._conn.execute(
                f"SELECT thread_id FROM threads WHERE recipient IN"
                f" ({','.join('?' * len(targets))}) ORDER BY created_at",
                targets,
            ).fetchall()
        return [self.get_thread(r["thread_id"]) for r in rows]

    def add_reply(self, thread_id: int, author_id: str, text: str) -> HelpThread:
        thread = self.get_thread(thread_id)
        if author_id != thread.user_id and not self._is_recipient(thread, author_id):
            raise AuthorizationError("only the sender or the recipient may reply")
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO replies (thread_id, author_id, text, created_at)"
                " VALUES (?, ?, ?, ?)",
                (thread_id, author_id, text, self._now_us()),
            )
        return self.get_thread(thread_id)

    def mail_context(self, thread_id: int, *, requester_id: str) -> MailContext:
        """Everything a mentor needs next to a help message: the full
        history for that student on that problem, their progress page, and
        the recipient's other threads about the same exercise."""
        thread = self.get_thread(thread_id)
        if not self._is_recipient(thread, requester_id):
            raise AuthorizationError("only the thread's recipient may view its context")
        history = tuple(self._history_unchecked(thread.user_id, thread.exercise_id))
        progress = tuple(self.progress_snapshot(thread.user_id))
        related = tuple(
            t
            for t in self.threads_for(requester_id)
            if t.exercise_id == thread.exercise_id and t.thread_id != thread_id
        )
        return MailContext(thread=thread, history=history, progress=progress, related_threads=related)

    # -- statistics -------------------------------------------------------------

    def stats_report(self) -> StatsReport:
        with self._lock:
            completion_rows = self._conn.execute(
                "SELECT exercise_id, SUM(completed) AS n FROM progress"
                " GROUP BY exercise_id"
            ).fetchall()
            submission_rows = self._conn.execute(
                "SELECT user_id, COUNT(*) AS n FROM submissions GROUP BY user_id"
            ).fetchall()
            duration_rows = self._conn.execute(
                "SELECT p.exercise_id AS exercise_id,"
                " (p.first_completed_at - u.registered_at) AS dur"
                " FROM progress p JOIN users u ON u.user_id = p.user_id"
                " WHERE p.completed = 1"
            ).fetchall()

        completions = tuple(
            (r["exercise_id"], int(r["n"] or 0))
            for r in sorted(completion_rows, key=lambda r: (-int(r["n"] or 0), r["exercise_id"]))
        )
        submission_counts = tuple(
            (r["user_id"], int(r["n"]))
            for r in sorted(submission_rows, key=lambda r: (-int(r["n"]), r["user_id"]))
        )

        per_exercise: dict[str, list[int]] = {}
        for r in duration_rows:
            per_exercise.setdefault(r["exercise_id"], []).append(max(0, int(r["dur"])))
        octiles = []
        for exercise_id in sorted(per_exercise):
            durations = sorted(per_exercise[exercise_id])
            n = len(durations)
            ranks = [-(-k * n // 8) for k in range(1, 8)]  # nearest-rank: ceil(k*n/8)
            octiles.append(
                (exercise_id, tuple(durations[r - 1] / 1_000_000 for r in ranks))
            )
        return StatsReport(
            completions=completions,
            submission_counts=submission_counts,
            octiles=tuple(octiles),
        )
