"""HTTP API: exercises, grading, console runs, history, progress, help, gurus.

Design notes:

* Grading is synchronous (the 1 s run-time limit keeps the no-reload loop
  snappy); a global cap queues excess jobs and a per-user cap returns 429.
* Anonymous requests may grade and use the console but persist nothing.
* A fresh master seed is drawn per submission; ``?seed=`` is honored only
  when the config enables test mode.
* Responses are JSON; errors carry a machine-readable ``code`` plus message.
* No response ever contains solver text or the canonical scramble order.
"""

from __future__ import annotations

import random
import re
import secrets
import sys
import threading
import time
from dataclasses import dataclass

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from pydantic import BaseModel

from . import grader, specdsl, store as store_mod
from .config import ServiceConfig
from .report import Verdict
from .sandbox import execute
from .specdsl import ExerciseSpec, GradingMode
from .store import (
    AuthorizationError,
    DuplicateUserError,
    Store,
    StoreError,
    UnknownExerciseError,
    UnknownUserError,
)

__all__ = ["create_app"]


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


@dataclass
class _Session:
    user_id: str
    expires_at: float


class _State:
    def __init__(self, config: ServiceConfig, store: Store, specs: dict[str, ExerciseSpec]):
        self.config = config
        self.store = store
        self.specs = specs
        self.policy = config.sandbox_policy()
        self.rng = random.Random()
        self.sessions: dict[str, _Session] = {}
        self.sessions_lock = threading.Lock()
        self.global_jobs = threading.BoundedSemaphore(config.max_concurrent_jobs)
        self.user_jobs: dict[str, int] = {}
        self.jobs_lock = threading.Lock()
        self.idempotent: dict[tuple[str, str], dict] = {}
        self.idempotent_lock = threading.Lock()

    def new_session(self, user_id: str) -> str:
        token = secrets.token_urlsafe(24)
        with self.sessions_lock:
            self.sessions[token] = _Session(
                user_id=user_id, expires_at=time.time() + self.config.session_ttl_seconds
            )
        return token

    def resolve_token(self, token: str | None) -> str | None:
        if not token:
            return None
        with self.sessions_lock:
            session = self.sessions.get(token)
            if session is None or session.expires_at < time.time():
                self.sessions.pop(token, None)
                return None
            return session.user_id


class RegisterBody(BaseModel):
    name: str


class SubmitBody(BaseModel):
    code: str | None = None
    line_order: list[str] | None = None
    stdin: str | None = None
    args: str | None = None


class ConsoleBody(BaseModel):
    code: str
    stdin: str | None = None


class HelpBody(BaseModel):
    exercise_id: str
    message: str = ""
    code: str = ""


class GuruBody(BaseModel):
    guru_name: str


class ReplyBody(BaseModel):
    text: str


def create_app(
    config: ServiceConfig | None = None,
    store: Store | None = None,
    specs: dict[str, ExerciseSpec] | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    if specs is None:
        specs = specdsl.load_exercise_dir(config.exercise_dir, strict=False)
    if store is None:
        store = Store(config.store_path)
    store.register_exercises(specs.keys())

    state = _State(config, store, specs)
    app = FastAPI(title="gradebox", version="0.1.0")
    app.state.gradebox = state

    def current_user(request: Request) -> str | None:
        auth = request.headers.get("authorization", "")
        token = auth[7:] if auth.lower().startswith("bearer ") else request.cookies.get("session")
        return state.resolve_token(token)

    def require_user(request: Request) -> str:
        user_id = current_user(request)
        if user_id is None:
            raise _error(401, "unauthenticated", "a valid session token is required")
        return user_id

    def get_spec(exercise_id: str) -> ExerciseSpec:
        spec = state.specs.get(exercise_id)
        if spec is None:
            raise _error(404, "unknown_exercise", f"no exercise {exercise_id!r}")
        return spec

    def client_key(request: Request, user_id: str | None) -> str:
        if user_id:
            return user_id
        host = request.client.host if request.client else "unknown"
        return f"anon:{host}"

    def run_grading_job(key: str, fn):
        """Apply the per-user cap (429) and the global queue, then run fn."""
        with state.jobs_lock:
            if state.user_jobs.get(key, 0) >= state.config.per_user_jobs:
                raise _error(429, "too_many_jobs", "another grading job is already running")
            state.user_jobs[key] = state.user_jobs.get(key, 0) + 1
        try:
            with state.global_jobs:
                return fn()
        finally:
            with state.jobs_lock:
                state.user_jobs[key] -= 1
                if state.user_jobs[key] <= 0:
                    del state.user_jobs[key]

    # -- accounts ------------------------------------------------------------

    @app.post("/api/register")
    def register(body: RegisterBody):
        try:
            user = store.create_user(body.name)
        except DuplicateUserError as exc:
            raise _error(409, "name_taken", str(exc))
        except StoreError as exc:
            raise _error(400, "bad_name", str(exc))
        if user.display_name in config.staff_names:
            store.set_staff(_staff_ids(state))
        token = state.new_session(user.user_id)
        return {"token": token, "user_id": user.user_id, "name": user.display_name}

    @app.post("/api/login")
    def login(body: RegisterBody):
        user = store.find_user_by_name(body.name)
        if user is None:
            raise _error(404, "unknown_user", f"no user named {body.name!r}")
        token = state.new_session(user.user_id)
        return {"token": token, "user_id": user.user_id, "name": user.display_name}

    def _staff_ids(st: _State) -> set[str]:
        ids = set()
        for name in st.config.staff_names:
            user = st.store.find_user_by_name(name)
            if user:
                ids.add(user.user_id)
        return ids

    # -- exercises and grading -------------------------------------------------

    @app.get("/api/exercises")
    def list_exercises():
        return {
            "exercises": [
                {"exercise_id": eid, "mode": spec.mode.value}
                for eid, spec in sorted(state.specs.items())
            ]
        }

    @app.get("/api/exercises/{exercise_id}")
    def exercise_descriptor(exercise_id: str, request: Request, seed: int | None = Query(default=None)):
        spec = get_spec(exercise_id)
        if seed is None or not config.test_mode:
            seed = state.rng.getrandbits(63)
        try:
            descriptor = specdsl.client_descriptor(spec, seed)
        except ValueError as exc:
            raise _error(500, "bad_spec", str(exc))
        payload = {
            "exercise_id": descriptor.exercise_id,
            "mode": descriptor.mode,
            "editor": descriptor.editor,
            "lines": list(descriptor.lines),
            "input_kind": descriptor.input_kind,
            "hints": list(descriptor.hints),
        }
        user_id = current_user(request)
        if user_id:
            latest = store.latest_code(user_id, exercise_id)
            if latest is not None:
                payload["editor"] = latest
        return payload

    @app.post("/api/exercises/{exercise_id}/submit")
    def submit(
        exercise_id: str,
        body: SubmitBody,
        request: Request,
        seed: int | None = Query(default=None),
    ):
        spec = get_spec(exercise_id)
        user_id = current_user(request)
        mode = spec.mode

        if mode is GradingMode.SCRAMBLE:
            if body.line_order is None or body.code is not None:
                raise _error(400, "mode_mismatch", "this exercise takes a line ordering")
            submission = "\n".join(body.line_order)
        else:
            if body.code is None or body.line_order is not None:
                raise _error(400, "mode_mismatch", "this exercise takes free code")
            submission = body.code
        if len(submission.encode("utf-8")) > config.max_code_bytes:
            raise _error(400, "code_too_large", "submission exceeds the size cap")
        if body.stdin is not None and mode is not GradingMode.STDIO:
            raise _error(400, "mode_mismatch", "this exercise has no test-input box")
        if body.args is not None and mode is not GradingMode.FUNCTION_CHECK:
            raise _error(400, "mode_mismatch", "this exercise has no argument box")

        idem_key = request.headers.get("idempotency-key")
        if user_id and idem_key:
            with state.idempotent_lock:
                cached = state.idempotent.get((user_id, idem_key))
            if cached is not None:
                return cached

        if seed is None or not config.test_mode:
            master_seed = state.rng.getrandbits(63)
        else:
            master_seed = seed

        def do_grade():
            report = grader.grade(spec, submission, master_seed, state.policy)
            trial = _trial_run(state, spec, submission, body, master_seed)
            return report, trial

        report, trial = run_grading_job(client_key(request, user_id), do_grade)

        persisted = False
        submission_id = None
        completed = report.verdict is Verdict.CORRECT
        if user_id is not None:
            record = store.record_submission(user_id, exercise_id, submission, report.to_record())
            persisted = True
            submission_id = record.submission_id
            entry = next(
                (p for p in store.progress_snapshot(user_id) if p.exercise_id == exercise_id),
                None,
            )
            completed = bool(entry and entry.completed)

        response = {
            "report": report.to_record(),
            "completed": completed,
            "persisted": persisted,
            "submission_id": submission_id,
            "trial": trial,
        }
        if user_id and idem_key:
            with state.idempotent_lock:
                state.idempotent[(user_id, idem_key)] = response
        return response

    def _trial_run(state: _State, spec, submission: str, body: SubmitBody, master_seed: int):
        """Non-graded run with the student's own test input or arguments."""
        if body.stdin is not None and spec.mode is GradingMode.STDIO:
            outcome = execute(
                {"main.py": submission},
                [sys.executable, "main.py"],
                state.policy,
                stdin=body.stdin.encode("utf-8"),
            )
            return {"kind": "stdin", **outcome.to_record()}
        if body.args is not None and spec.mode is GradingMode.FUNCTION_CHECK:
            m = re.match(r"\s*([A-Za-z_]\w*)\s*\(", spec.autotests[0]) if spec.autotests else None
            if not m:
                return None
            probe = f"{m.group(1)}({body.args})"
            seed = grader.derive_round_seed(master_seed, 0)
            _, rpt, problem = grader._run_job(
                spec, submission, seed, state.policy, probes=(probe,)
            )
            if problem or rpt is None:
                return {"kind": "args", "probe": probe, "error": problem or "execution failed"}
            entry = rpt["probes"][0] if rpt.get("probes") else None
            return {
                "kind": "args",
                "probe": probe,
                "value": entry["rendering"] if entry and not entry["error"] else None,
                "error": (
                    f"{entry['error']['cls']}: {entry['error']['msg']}"
                    if entry and entry["error"]
                    else (f"{rpt['error']['cls']}: {rpt['error']['msg']}" if rpt.get("error") else None)
                ),
            }
        return None

    @app.post("/api/console")
    def console(body: ConsoleBody, request: Request):
        if len(body.code.encode("utf-8")) > config.max_code_bytes:
            raise _error(400, "code_too_large", "code exceeds the size cap")
        user_id = current_user(request)

        def do_run():
            return execute(
                {"main.py": body.code},
                [sys.executable, "main.py"],
                state.policy,
                stdin=(body.stdin or "").encode("utf-8"),
            )

        outcome = run_grading_job(client_key(request, user_id), do_run)
        return outcome.to_record()

    # -- progress, history, latest code ---------------------------------------

    @app.get("/api/progress")
    def progress(user_id: str = Depends(require_user)):
        entries = {p.exercise_id: p for p in store.progress_snapshot(user_id)}
        return {
            "exercises": [
                {
                    "exercise_id": eid,
                    "completed": bool(entries[eid].completed) if eid in entries else False,
                    "first_completed_at": entries[eid].first_completed_at if eid in entries else None,
                }
                for eid in sorted(state.specs)
            ]
        }

    @app.get("/api/exercises/{exercise_id}/history")
    def history(
        exercise_id: str,
        request: Request,
        user: str | None = Query(default=None),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=20, ge=1, le=200),
    ):
        requester = require_user(request)
        get_spec(exercise_id)
        target = user or requester
        try:
            items = store.history(target, exercise_id, requester_id=requester)
        except AuthorizationError as exc:
            raise _error(403, "forbidden", str(exc))
        except UnknownUserError as exc:
            raise _error(404, "unknown_user", str(exc))
        window = items[offset : offset + limit]
        return {
            "total": len(items),
            "offset": offset,
            "limit": limit,
            "items": [s.to_record() for s in window],
        }

    @app.get("/api/exercises/{exercise_id}/latest")
    def latest(exercise_id: str, user_id: str = Depends(require_user)):
        get_spec(exercise_id)
        return {"code": store.latest_code(user_id, exercise_id)}

    # -- help and gurus ---------------------------------------------------------

    @app.post("/api/help")
    def help_request(body: HelpBody, user_id: str = Depends(require_user)):
        get_spec(body.exercise_id)
        try:
            thread = store.file_help(user_id, body.exercise_id, body.message, body.code)
        except UnknownExerciseError as exc:
            raise _error(404, "unknown_exercise", str(exc))
        return _thread_record(thread)

    @app.post("/api/guru")
    def set_guru(body: GuruBody, user_id: str = Depends(require_user)):
        guru = store.find_user_by_name(body.guru_name)
        if guru is None:
            raise _error(404, "unknown_user", f"no user named {body.guru_name!r}")
        try:
            user = store.set_guru(user_id, guru.user_id)
        except StoreError as exc:
            raise _error(400, "bad_guru", str(exc))
        return {"user_id": user.user_id, "guru_id": user.guru_id, "guru_name": guru.display_name}

    @app.get("/api/threads")
    def threads(user_id: str = Depends(require_user)):
        return {"threads": [_thread_record(t) for t in store.threads_for(user_id)]}

    @app.get("/api/threads/{thread_id}/context")
    def thread_context(thread_id: int, user_id: str = Depends(require_user)):
        try:
            ctx = store.mail_context(thread_id, requester_id=user_id)
        except AuthorizationError as exc:
            raise _error(403, "forbidden", str(exc))
        except StoreError as exc:
            raise _error(404, "unknown_thread", str(exc))
        return {
            "thread": _thread_record(ctx.thread),
            "history": [s.to_record() for s in ctx.history],
            "progress": [
                {
                    "exercise_id": p.exercise_id,
                    "completed": p.completed,
                    "first_completed_at": p.first_completed_at,
                }
                for p in ctx.progress
            ],
            "related_threads": [_thread_record(t) for t in ctx.related_threads],
        }

    @app.post("/api/threads/{thread_id}/reply")
    def reply(thread_id: int, body: ReplyBody, user_id: str = Depends(require_user)):
        try:
            thread = store.add_reply(thread_id, user_id, body.text)
        except AuthorizationError as exc:
            raise _error(403, "forbidden", str(exc))
        except StoreError as exc:
            raise _error(404, "unknown_thread", str(exc))
        return _thread_record(thread)

    @app.get("/api/healthz")
    def healthz():
        return {"ok": True, "exercises": len(state.specs)}

    return app


def _thread_record(thread: store_mod.HelpThread) -> dict:
    return {
        "thread_id": thread.thread_id,
        "user_id": thread.user_id,
        "exercise_id": thread.exercise_id,
        "message": thread.message,
        "attached_code": thread.attached_code,
        "recipient": thread.recipient,
        "created_at": thread.created_at,
        "replies": [
            {"author_id": a, "text": t, "created_at": at} for a, t, at in thread.replies
        ],
    }
