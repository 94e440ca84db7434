import concurrent.futures
import os
import sys
import time

import psutil
import pytest

from gradebox.sandbox import (
    GRACE_SECONDS,
    ExecutionOutcome,
    SandboxPolicy,
    SandboxStatus,
    execute,
)

PY = sys.executable


def run(code, policy=None, stdin=b""):
    return execute({"main.py": code}, [PY, "main.py"], policy, stdin)


def test_policy_defaults_and_validation():
    policy = SandboxPolicy()
    assert policy.cpu_time_limit == 1.0
    assert policy.wall_time_limit == 2.0
    assert policy.memory_limit == 64 * 1024 * 1024
    assert policy.output_cap == 64 * 1024
    with pytest.raises(ValueError):
        SandboxPolicy(cpu_time_limit=0)
    with pytest.raises(ValueError):
        SandboxPolicy(cpu_time_limit=2.0, wall_time_limit=1.0)


def test_echo():
    out = run("print('a fixed greeting')")
    assert out.status is SandboxStatus.OK
    assert out.stdout == b"a fixed greeting\n"
    assert out.exit_code == 0


def test_stdin_passthrough():
    out = run("import sys\nprint(sys.stdin.read().upper(), end='')", stdin=b"hello\n")
    assert out.status is SandboxStatus.OK
    assert out.stdout == b"HELLO\n"


def test_infinite_loop_hits_time_limit_within_grace():
    policy = SandboxPolicy()
    start = time.monotonic()
    out = run("while True: pass", policy)
    elapsed = time.monotonic() - start
    assert out.status is SandboxStatus.TIME_LIMIT
    assert out.wall_used <= policy.wall_time_limit + GRACE_SECONDS
    assert elapsed <= policy.wall_time_limit + GRACE_SECONDS + 2.0


def test_sleep_loop_hits_wall_limit():
    out = run("import time\nwhile True: time.sleep(0.2)")
    assert out.status is SandboxStatus.TIME_LIMIT


def test_output_cap_enforced_exactly():
    policy = SandboxPolicy()
    out = run("import sys\nblock = 'x' * 65536\nwhile True: sys.stdout.write(block)", policy)
    assert out.status is SandboxStatus.OUTPUT_LIMIT
    assert len(out.stdout) == policy.output_cap
    assert out.stdout_truncated is True


def test_memory_hog_is_classified():
    out = run("x = bytearray(200 * 1024 * 1024)\nprint('survived')")
    assert out.status is SandboxStatus.MEMORY_LIMIT
    assert b"survived" not in out.stdout


def test_crash_is_runtime_error():
    out = run("raise ValueError('broken')")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert b"ValueError" in out.stderr
    assert out.exit_code == 1


def test_canary_file_is_unreadable(tmp_path):
    canary = tmp_path / "canary.txt"
    canary.write_text("CANARY-SECRET-XYZZY")
    out = run(f"print(open({str(canary)!r}).read())")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert b"CANARY-SECRET-XYZZY" not in out.stdout
    assert b"CANARY-SECRET-XYZZY" not in out.stderr.replace(str(canary).encode(), b"")
    assert b"denied" in out.stderr or b"PermissionError" in out.stderr


def test_network_denied():
    out = run("import socket\nsocket.socket()")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert b"network access denied" in out.stderr


def test_process_creation_denied():
    out = run("import subprocess\nsubprocess.run(['echo', 'hi'])")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert b"process creation denied" in out.stderr
    out = run("import os\nos.fork()")
    assert out.status is SandboxStatus.RUNTIME_ERROR


def test_ctypes_denied():
    out = run("import ctypes")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert b"module denied" in out.stderr


def test_scratch_is_writable_and_private():
    out = run(
        "with open('scratchfile.txt', 'w') as f:\n"
        "    f.write('ok')\n"
        "print(open('scratchfile.txt').read())"
    )
    assert out.status is SandboxStatus.OK
    assert out.stdout == b"ok\n"


def test_writes_outside_scratch_denied(tmp_path):
    target = tmp_path / "forbidden.txt"
    out = run(f"open({str(target)!r}, 'w').write('x')")
    assert out.status is SandboxStatus.RUNTIME_ERROR
    assert not target.exists()


def test_bundle_files_are_available():
    out = execute(
        {"main.py": "print(open('data.txt').read(), end='')", "data.txt": "payload"},
        [PY, "main.py"],
    )
    assert out.status is SandboxStatus.OK
    assert out.stdout == b"payload"


def test_bundle_name_validation():
    with pytest.raises(ValueError):
        execute({"../evil.py": "x"}, [PY, "main.py"])
    with pytest.raises(ValueError):
        execute({"sitecustomize.py": "x"}, [PY, "main.py"])


def test_sandbox_error_for_missing_interpreter():
    out = execute({"main.py": "pass"}, ["/nonexistent/python", "main.py"])
    assert out.status is SandboxStatus.SANDBOX_ERROR


def test_no_process_or_scratch_residue(tmp_path):
    me = psutil.Process()

    def children():
        return {p.pid for p in me.children(recursive=True)}

    def scratches():
        import tempfile

        base = tempfile.gettempdir()
        return {n for n in os.listdir(base) if n.startswith("gradebox-")}

    before_procs, before_dirs = children(), scratches()
    for _ in range(3):
        run("print('x')")
    run("while True: pass", SandboxPolicy(cpu_time_limit=0.3))
    assert children() == before_procs
    assert scratches() == before_dirs


def test_concurrent_executions_are_isolated():
    def one(i):
        out = run(f"with open('f.txt', 'w') as f:\n    f.write(str({i}))\nprint(open('f.txt').read())")
        return out.status, out.stdout.strip()

    with concurrent.futures.ThreadPoolExecutor(6) as pool:
        results = list(pool.map(one, range(6)))
    assert all(status is SandboxStatus.OK for status, _ in results)
    assert [payload for _, payload in results] == [str(i).encode() for i in range(6)]


def test_outcome_record_shape():
    record = run("print(1)").to_record()
    assert record["status"] == "Ok"
    assert set(record) == {
        "status", "stdout", "stderr", "stdout_truncated", "stderr_truncated",
        "exit_code", "cpu_used", "wall_used",
    }
