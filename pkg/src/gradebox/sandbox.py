"""Run an untrusted program bundle in an isolated child process.

The observable contract: hard CPU/wall/memory/output limits, no network, no
process creation, file access confined to a private scratch directory, and a
guaranteed return within the wall limit plus a fixed grace period, with no
surviving descendants and no scratch residue.

Mechanism (desk scale, swappable behind this interface): the child runs in
its own session; a guard module injected via PYTHONPATH applies OS resource
limits at interpreter startup and installs an audit hook that denies file
access outside the scratch directory and the interpreter's own directories,
all socket use, process creation, and ctypes.  A watchdog in the calling
thread samples /proc for CPU use, enforces the wall clock, and kills the
whole process group on any breach.
"""

from __future__ import annotations

import enum
import itertools
import os
import shutil
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

__all__ = ["SandboxPolicy", "SandboxStatus", "ExecutionOutcome", "execute", "GRACE_SECONDS"]

# Extra time allowed between a limit being hit and the forced kill taking
# effect; tests use it to tell enforcement latency from a hang.
GRACE_SECONDS = 0.5

_POLL_INTERVAL = 0.015
_CLK_TCK = os.sysconf("SC_CLK_TCK")

_counter = itertools.count()
_counter_lock = threading.Lock()


class SandboxStatus(enum.Enum):
    OK = "Ok"
    TIME_LIMIT = "TimeLimit"
    MEMORY_LIMIT = "MemoryLimit"
    OUTPUT_LIMIT = "OutputLimit"
    RUNTIME_ERROR = "RuntimeError"
    SANDBOX_ERROR = "SandboxError"


@dataclass(frozen=True)
class SandboxPolicy:
    """Resource limits for one execution.  Network access is always denied;
    the bundle's scratch directory is the only writable location."""

    cpu_time_limit: float = 1.0
    wall_time_limit: float | None = None  # defaults to 2x cpu
    memory_limit: int = 64 * 1024 * 1024
    output_cap: int = 64 * 1024
    process_limit: int = 1

    def __post_init__(self):
        if self.wall_time_limit is None:
            object.__setattr__(self, "wall_time_limit", 2.0 * self.cpu_time_limit)
        for name in ("cpu_time_limit", "wall_time_limit", "memory_limit", "output_cap", "process_limit"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.wall_time_limit < self.cpu_time_limit:
            raise ValueError("wall_time_limit must be >= cpu_time_limit")


@dataclass(frozen=True)
class ExecutionOutcome:
    status: SandboxStatus
    stdout: bytes = b""
    stderr: bytes = b""
    stdout_truncated: bool = False
    stderr_truncated: bool = False
    exit_code: int | str | None = None  # int, or a signal name like "SIGKILL"
    cpu_used: float = 0.0
    wall_used: float = 0.0

    def to_record(self) -> dict:
        return {
            "status": self.status.value,
            "stdout": self.stdout.decode("utf-8", errors="replace"),
            "stderr": self.stderr.decode("utf-8", errors="replace"),
            "stdout_truncated": self.stdout_truncated,
            "stderr_truncated": self.stderr_truncated,
            "exit_code": self.exit_code,
            "cpu_used": round(self.cpu_used, 3),
            "wall_used": round(self.wall_used, 3),
        }


_GUARD_BODY = '''
import os as _os
import resource as _resource
import sys as _sys

try:
    _resource.setrlimit(_resource.RLIMIT_CPU, (_CPU_SOFT, _CPU_SOFT + 1))
    _resource.setrlimit(_resource.RLIMIT_AS, (_MEM, _MEM))
    _resource.setrlimit(_resource.RLIMIT_FSIZE, (_FSIZE, _FSIZE))
    _resource.setrlimit(_resource.RLIMIT_CORE, (0, 0))
    _resource.setrlimit(_resource.RLIMIT_NPROC, (_NPROC, _NPROC))
except (ValueError, OSError):
    pass

_ALLOWED_READ = [_SCRATCH + _os.sep, "/dev/null", "/dev/urandom", "/dev/random"]
for _p in [_sys.prefix, _sys.base_prefix, _sys.exec_prefix, _sys.base_exec_prefix] + list(_sys.path):
    if _p:
        _rp = _os.path.realpath(_p)
        _ALLOWED_READ.append(_rp if _rp == "/" else _rp + _os.sep)

_DENIED_IMPORTS = {"ctypes", "_ctypes"}

def _inside(path, prefix):
    return path == prefix.rstrip(_os.sep) or path.startswith(prefix)

def _norm(path):
    if isinstance(path, bytes):
        path = path.decode("utf-8", "replace")
    return _os.path.realpath(_os.path.join(_os.getcwd(), str(path)))

def _read_ok(path):
    return any(_inside(path, p) for p in _ALLOWED_READ)

def _write_ok(path):
    return path == "/dev/null" or _inside(path, _SCRATCH + _os.sep)

def _deny(what):
    raise PermissionError("sandbox: " + what)

def _guard(event, args):
    if event == "open":
        path, mode = args[0], args[1]
        if path is None or isinstance(path, int):
            return
        p = _norm(path)
        m = mode or "r"
        if any(c in m for c in "wax+"):
            if not _write_ok(p):
                _deny("write denied: " + p)
        elif not _read_ok(p):
            _deny("read denied: " + p)
    elif event.startswith("socket."):
        _deny("network access denied")
    elif event == "import":
        if args[0] in _DENIED_IMPORTS:
            _deny("module denied: " + str(args[0]))
    elif event in ("os.fork", "os.forkpty", "os.posix_spawn", "os.spawn",
                   "os.system", "subprocess.Popen", "os.exec", "os.startfile"):
        _deny("process creation denied")
    elif event in ("os.remove", "os.rmdir", "os.mkdir", "shutil.rmtree", "os.truncate"):
        if args and not isinstance(args[0], int):
            p = _norm(args[0])
            if not _write_ok(p):
                _deny("write denied: " + p)
    elif event == "os.rename":
        for a in args[:2]:
            if a is not None and not isinstance(a, int):
                p = _norm(a)
                if not _write_ok(p):
                    _deny("write denied: " + p)
    elif event in ("os.chmod", "os.chown", "os.link", "os.symlink"):
        _deny(event + " denied")
    elif event in ("os.listdir", "os.scandir"):
        if args and args[0] is not None and not isinstance(args[0], int):
            p = _norm(args[0])
            if not (_read_ok(p) or _inside(p, _SCRATCH + _os.sep) or p == _SCRATCH):
                _deny("read denied: " + p)
    elif event == "os.chdir":
        p = _norm(args[0])
        if not (p == _SCRATCH or _inside(p, _SCRATCH + _os.sep)):
            _deny("chdir outside scratch denied")
    elif event == "os.fchdir":
        _deny("fchdir denied")

_sys.addaudithook(_guard)
'''


def _guard_source(scratch: str, policy: SandboxPolicy) -> str:
    fsize = max(8 * 1024 * 1024, 4 * policy.output_cap)
    header = (
        f"_SCRATCH = {os.path.realpath(scratch)!r}\n"
        f"_CPU_SOFT = {max(1, int(-(-policy.cpu_time_limit // 1)))}\n"
        f"_MEM = {int(policy.memory_limit)}\n"
        f"_FSIZE = {fsize}\n"
        f"_NPROC = {int(policy.process_limit)}\n"
    )
    return header + _GUARD_BODY


class _StreamReader(threading.Thread):
    """Drains one pipe, keeping at most `cap` bytes."""

    def __init__(self, fd: int, cap: int):
        super().__init__(daemon=True)
        self.fd = fd
        self.cap = cap
        self.data = bytearray()
        self.truncated = False
        self.start()

    def run(self):
        try:
            while True:
                chunk = os.read(self.fd, 65536)
                if not chunk:
                    return
                room = self.cap - len(self.data)
                if room > 0:
                    self.data += chunk[:room]
                if len(chunk) > room:
                    self.truncated = True
        except OSError:
            return


def _validate_bundle(files: Mapping[str, str | bytes]) -> None:
    for name in files:
        if not name or os.sep in name or name != os.path.basename(name) or name.startswith("."):
            raise ValueError(f"bundle file name must be a plain top-level name: {name!r}")
        if name == "sitecustomize.py":
            raise ValueError("bundle may not supply sitecustomize.py (reserved)")


def _killpg(pid: int) -> None:
    try:
        os.killpg(os.getpgid(pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError, OSError):
        pass


def _cpu_sample(pid: int) -> float | None:
    try:
        with open(f"/proc/{pid}/stat", "rb") as f:
            raw = f.read().decode("ascii", "replace")
        rest = raw[raw.rindex(")") + 2 :].split()
        return (int(rest[11]) + int(rest[12])) / _CLK_TCK
    except (OSError, ValueError, IndexError):
        return None


def execute(
    files: Mapping[str, str | bytes],
    entry: Sequence[str],
    policy: SandboxPolicy | None = None,
    stdin: bytes = b"",
) -> ExecutionOutcome:
    """Run `entry` (an argv list) in a scratch directory seeded with `files`.

    Always returns; the child and all descendants are dead and the scratch
    directory removed by the time it does.  Host-level failures come back as
    status SandboxError rather than an exception so callers can tell them
    apart from the program's own misbehavior.
    """
    policy = policy or SandboxPolicy()
    _validate_bundle(files)

    with _counter_lock:
        serial = next(_counter)
    try:
        scratch = tempfile.mkdtemp(prefix=f"gradebox-{os.getpid()}-{serial}-")
    except OSError as exc:
        return ExecutionOutcome(status=SandboxStatus.SANDBOX_ERROR, stderr=str(exc).encode())

    proc = None
    try:
        for name, content in files.items():
            data = content.encode("utf-8") if isinstance(content, str) else content
            with open(os.path.join(scratch, name), "wb") as f:
                f.write(data)
        with open(os.path.join(scratch, "sitecustomize.py"), "w", encoding="utf-8") as f:
            f.write(_guard_source(scratch, policy))

        env = {
            "PATH": "/usr/bin:/bin",
            "HOME": scratch,
            "TMPDIR": scratch,
            "LC_ALL": "C.UTF-8",
            "PYTHONPATH": scratch,
            "PYTHONDONTWRITEBYTECODE": "1",
            "PYTHONHASHSEED": "0",
            "PYTHONIOENCODING": "utf-8",
            "PYTHONNOUSERSITE": "1",
        }

        t0 = time.monotonic()
        try:
            proc = subprocess.Popen(
                list(entry),
                cwd=scratch,
                env=env,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                start_new_session=True,
            )
        except (OSError, ValueError) as exc:
            return ExecutionOutcome(status=SandboxStatus.SANDBOX_ERROR, stderr=str(exc).encode())

        def feed():
            try:
                if stdin:
                    proc.stdin.write(stdin)
                proc.stdin.close()
            except (BrokenPipeError, OSError):
                pass

        threading.Thread(target=feed, daemon=True).start()
        out_reader = _StreamReader(proc.stdout.fileno(), policy.output_cap)
        err_reader = _StreamReader(proc.stderr.fileno(), policy.output_cap)

        kill_reason = None
        cpu_used = 0.0
        deadline = t0 + policy.wall_time_limit
        while proc.poll() is None:
            sample = _cpu_sample(proc.pid)
            if sample is not None:
                cpu_used = max(cpu_used, sample)
            if out_reader.truncated or err_reader.truncated:
                kill_reason = "output"
            elif cpu_used > policy.cpu_time_limit + 2 * _POLL_INTERVAL:
                kill_reason = "cpu"
            elif time.monotonic() >= deadline:
                kill_reason = "wall"
            if kill_reason:
                _killpg(proc.pid)
                break
            time.sleep(_POLL_INTERVAL)

        try:
            proc.wait(timeout=GRACE_SECONDS)
        except subprocess.TimeoutExpired:
            _killpg(proc.pid)
            try:
                proc.wait(timeout=GRACE_SECONDS)
            except subprocess.TimeoutExpired:
                return ExecutionOutcome(
                    status=SandboxStatus.SANDBOX_ERROR,
                    stderr=b"sandboxed process could not be reaped",
                    wall_used=time.monotonic() - t0,
                )
        # Sweep any stragglers in the session before trusting pipe EOF.
        _killpg(proc.pid)
        out_reader.join(timeout=GRACE_SECONDS)
        err_reader.join(timeout=GRACE_SECONDS)
        wall_used = time.monotonic() - t0

        rc = proc.returncode
        stdout = bytes(out_reader.data[: policy.output_cap])
        stderr = bytes(err_reader.data[: policy.output_cap])

        if out_reader.truncated or err_reader.truncated or kill_reason == "output":
            status = SandboxStatus.OUTPUT_LIMIT
        elif kill_reason in ("cpu", "wall") or rc == -signal.SIGXCPU:
            status = SandboxStatus.TIME_LIMIT
        elif rc == 0:
            status = SandboxStatus.OK
        elif rc > 0 and b"MemoryError" in stderr:
            status = SandboxStatus.MEMORY_LIMIT
        else:
            status = SandboxStatus.RUNTIME_ERROR

        exit_code: int | str
        if rc is not None and rc < 0:
            try:
                exit_code = signal.Signals(-rc).name
            except ValueError:
                exit_code = rc
        else:
            exit_code = rc

        return ExecutionOutcome(
            status=status,
            stdout=stdout,
            stderr=stderr,
            stdout_truncated=out_reader.truncated,
            stderr_truncated=err_reader.truncated,
            exit_code=exit_code,
            cpu_used=cpu_used,
            wall_used=wall_used,
        )
    finally:
        if proc is not None:
            _killpg(proc.pid)
            try:
                proc.wait(timeout=GRACE_SECONDS)
            except subprocess.TimeoutExpired:
                pass
            for stream in (proc.stdin, proc.stdout, proc.stderr):
                try:
                    if stream:
                        stream.close()
                except OSError:
                    pass
        shutil.rmtree(scratch, ignore_errors=True)
