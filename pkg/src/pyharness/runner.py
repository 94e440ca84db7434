"""One grading round, executed inside the sandbox.

Bundle layout (all files at the top level of the scratch directory):

    runner.py     this program (the bundle's entry command runs it)
    job.json      the job record (path may be overridden via argv[1])
    student.py    the submission source named by job["student_file"]

Job record (JSON object)::

    version        wire version, currently 1
    sentinel       random line the orchestrator expects before the report
    seed           integer seeding the _rint generator for this round
    precode        source executed before the student program
    student_file   bundle filename of the submission
    stdin          text fed to the student program's standard input, or null
    probes         expressions evaluated after the student program runs
    taboo          builtin names replaced with violation traps
    checker        optional checker source run after the student program
    output_cap     max characters of student output captured in the report

The report is written to this process's real stdout as three sections: a
one-byte version prefix line, the sentinel line, then a single JSON record.
Student code only ever sees a replaced sys.stdout, so nothing it prints can
appear after the sentinel.  Everything the student printed is captured,
capped, and carried inside the report instead.

Execution order is fixed: seed randomness, install taboo traps, run precode,
run the student program, evaluate probes, run the checker.  Errors raised by
precode are reported on a separate key from student errors so the
orchestrator can tell an authoring bug from a failing submission.
"""

import io
import json
import random
import re
import sys

VERSION = 1

_MAX_DEPTH = 10
_MAX_ITEMS = 10000

_ADDR_RE = re.compile(r" at 0x[0-9a-fA-F]+")


class _TabooViolation(Exception):
    pass


class _CappedWriter(io.StringIO):
    """StringIO that stops keeping data beyond a cap but keeps accepting it."""

    def __init__(self, cap):
        super().__init__()
        self.cap = cap
        self.size = 0
        self.truncated = False

    def write(self, text):
        text = str(text)
        room = self.cap - self.size
        if room <= 0:
            self.truncated = self.truncated or bool(text)
            return len(text)
        if len(text) > room:
            super().write(text[:room])
            self.size = self.cap
            self.truncated = True
        else:
            super().write(text)
            self.size += len(text)
        return len(text)


def _format_float(x):
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return format(x, ".17g")


def render(value, depth=0):
    """Canonical literal-like rendering: deterministic for equal values,
    unordered collections sorted, floats at 17 significant digits."""
    if depth > _MAX_DEPTH:
        return "<max depth exceeded>"
    if value is None or value is True or value is False:
        return repr(value)
    t = type(value)
    if t is float:
        return _format_float(value)
    if t is int:
        return repr(value)
    if t is str or t is bytes:
        return repr(value)
    if t is list or t is tuple:
        inner = [render(v, depth + 1) for v in value[:_MAX_ITEMS]]
        if t is list:
            return "[" + ", ".join(inner) + "]"
        if len(inner) == 1:
            return "(" + inner[0] + ",)"
        return "(" + ", ".join(inner) + ")"
    if t is set or t is frozenset:
        inner = sorted(render(v, depth + 1) for v in list(value)[:_MAX_ITEMS])
        if not inner:
            return "set()" if t is set else "frozenset()"
        body = "{" + ", ".join(inner) + "}"
        return body if t is set else "frozenset(" + body + ")"
    if t is dict:
        pairs = [
            (render(k, depth + 1), render(v, depth + 1))
            for k, v in list(value.items())[:_MAX_ITEMS]
        ]
        pairs.sort(key=lambda kv: kv[0])
        return "{" + ", ".join(f"{k}: {v}" for k, v in pairs) + "}"
    try:
        return _ADDR_RE.sub("", repr(value))
    except Exception:
        return f"<unrepresentable {t.__name__}>"


def encode(value, depth=0):
    """Tagged JSON-safe tree; the orchestrator compares these structurally."""
    if depth > _MAX_DEPTH:
        return {"k": "other", "v": "<max depth exceeded>"}
    if value is None:
        return {"k": "none"}
    if value is True or value is False:
        return {"k": "bool", "v": value}
    t = type(value)
    if t is float:
        return {"k": "float", "v": _format_float(value)}
    if t is int:
        return {"k": "int", "v": str(value)}
    if t is str:
        return {"k": "str", "v": value}
    if t is bytes:
        return {"k": "bytes", "v": value.hex()}
    if t is list or t is tuple:
        return {
            "k": "list" if t is list else "tuple",
            "v": [encode(v, depth + 1) for v in value[:_MAX_ITEMS]],
        }
    if t is set or t is frozenset:
        items = [encode(v, depth + 1) for v in list(value)[:_MAX_ITEMS]]
        items.sort(key=json.dumps)
        return {"k": "set" if t is set else "frozenset", "v": items}
    if t is dict:
        pairs = [
            [encode(k, depth + 1), encode(v, depth + 1)]
            for k, v in list(value.items())[:_MAX_ITEMS]
        ]
        pairs.sort(key=lambda kv: json.dumps(kv[0]))
        return {"k": "dict", "v": pairs}
    return {"k": "other", "v": render(value, depth)}


def _error_info(exc):
    return {"cls": type(exc).__name__, "msg": str(exc)}


def _make_trap(name, violations):
    def trap(*args, **kwargs):
        violations.append(name)
        raise _TabooViolation(name)

    trap.__name__ = name
    return trap


def run_job(job):
    report = {
        "v": VERSION,
        "protocol_error": None,
        "precode_error": None,
        "error": None,
        "stdout": "",
        "stdout_truncated": False,
        "probes": [],
        "taboo_violation": None,
        "checks": None,
        "checker_error": None,
    }

    rng = random.Random(job["seed"])

    def _rint(lo, hi):
        return rng.randint(lo, hi)

    violations = []
    import builtins as _builtins

    shadow = dict(vars(_builtins))
    for name in job.get("taboo", ()):
        shadow[name] = _make_trap(name, violations)

    env = {"__name__": "__main__", "__builtins__": shadow, "_rint": _rint}

    capture = _CappedWriter(int(job.get("output_cap", 65536)))
    real_stdout = sys.stdout
    real_stdin = sys.stdin
    sys.stdout = capture
    sys.stdin = io.StringIO(job.get("stdin") or "")
    try:
        try:
            exec(compile(job.get("precode", ""), "<precode>", "exec"), env)
        except BaseException as exc:
            report["precode_error"] = _error_info(exc)
            return report

        with open(job["student_file"], encoding="utf-8") as f:
            student_src = f.read()
        student_ok = True
        try:
            exec(compile(student_src, job["student_file"], "exec"), env)
        except _TabooViolation:
            student_ok = False
        except BaseException as exc:
            report["error"] = _error_info(exc)
            student_ok = False

        probe_values = {}
        if student_ok:
            for expr in job.get("probes", ()):
                entry = {"expr": expr, "value": None, "rendering": "", "error": None}
                try:
                    value = eval(compile(expr, "<probe>", "eval"), env)
                    entry["value"] = encode(value)
                    entry["rendering"] = render(value)
                    probe_values[expr] = value
                except _TabooViolation:
                    entry["error"] = {"cls": "TabooViolation", "msg": violations[-1]}
                    probe_values[expr] = None
                except BaseException as exc:
                    entry["error"] = _error_info(exc)
                    probe_values[expr] = None
                report["probes"].append(entry)

        if job.get("checker"):
            checks = []

            def check(passed, message=""):
                checks.append({"passed": bool(passed), "message": str(message)})

            checker_env = {
                "__name__": "checker",
                "env": env,
                "stdout": capture.getvalue(),
                "probes": probe_values,
                "error": report["error"],
                "check": check,
            }
            try:
                exec(compile(job["checker"], "<checker>", "exec"), checker_env)
                if not checks:
                    report["checker_error"] = {
                        "cls": "ProtocolError",
                        "msg": "checker produced no results",
                    }
                else:
                    report["checks"] = checks
            except BaseException as exc:
                report["checker_error"] = _error_info(exc)
    finally:
        sys.stdout = real_stdout
        sys.stdin = real_stdin

    if violations:
        report["taboo_violation"] = violations[0]
    report["stdout"] = capture.getvalue()
    report["stdout_truncated"] = capture.truncated
    return report


def main(argv):
    job_path = argv[1] if len(argv) > 1 else "job.json"
    sentinel = ""
    try:
        with open(job_path, encoding="utf-8") as f:
            job = json.load(f)
        sentinel = job.get("sentinel", "")
        if job.get("version") != VERSION:
            report = {
                "v": VERSION,
                "protocol_error": f"unsupported job version {job.get('version')!r}",
            }
        else:
            report = run_job(job)
    except Exception as exc:
        report = {"v": VERSION, "protocol_error": f"{type(exc).__name__}: {exc}"}
    out = sys.__stdout__
    out.write(f"{VERSION}\n{sentinel}\n")
    out.write(json.dumps(report, sort_keys=True) + "\n")
    out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
