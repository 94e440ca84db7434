"""Protocol tests for the in-sandbox harness, run as a plain subprocess in a
scratch directory (the sandbox adds isolation on top; here we check the wire
format and execution semantics in the open)."""

import json
import subprocess
import sys


import pyharness

SENTINEL = "f" * 32


def run_harness(tmp_path, *, student, precode="", probes=(), stdin=None, taboo=(),
                checker=None, seed=1, output_cap=65536, raw_job=None):
    (tmp_path / "runner.py").write_text(pyharness.runner_source())
    (tmp_path / "student.py").write_text(student)
    job = raw_job or {
        "version": pyharness.PROTOCOL_VERSION,
        "sentinel": SENTINEL,
        "seed": seed,
        "precode": precode,
        "student_file": "student.py",
        "stdin": stdin,
        "probes": list(probes),
        "taboo": list(taboo),
        "checker": checker,
        "output_cap": output_cap,
    }
    (tmp_path / "job.json").write_text(json.dumps(job))
    proc = subprocess.run(
        [sys.executable, "runner.py", "job.json"],
        cwd=tmp_path,
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def parse_report(stdout):
    lines = stdout.split("\n")
    idx = len(lines) - 1 - lines[::-1].index(SENTINEL)
    assert lines[idx - 1] == str(pyharness.PROTOCOL_VERSION), "version prefix"
    return json.loads(lines[idx + 1])


def test_variable_probes_match_reference_interpreter(tmp_path):
    # Oracle: evaluate the same program in this interpreter with people=10.
    env = {"people": 10}
    exec("heads, shoulders, knees, toes = people, 2*people, 2*people, 10*people", env)
    expected = {name: env[name] for name in ("heads", "shoulders", "knees", "toes")}
    assert expected == {"heads": 10, "shoulders": 20, "knees": 20, "toes": 100}

    out = run_harness(
        tmp_path,
        precode="people = 10",
        student="heads, shoulders, knees, toes = people, 2*people, 2*people, 10*people",
        probes=("heads", "shoulders", "knees", "toes"),
    )
    report = parse_report(out)
    values = {p["expr"]: p["rendering"] for p in report["probes"]}
    assert values == {k: str(v) for k, v in expected.items()}
    assert report["error"] is None


def test_function_probe(tmp_path):
    out = run_harness(
        tmp_path,
        student="def add(p, q):\n    return p + q",
        probes=("add(2, 3)",),
    )
    report = parse_report(out)
    assert report["probes"][0]["rendering"] == "5"
    assert report["probes"][0]["value"] == {"k": "int", "v": "5"}


def test_taboo_trap_reports_name_and_blocks_probes(tmp_path):
    out = run_harness(
        tmp_path,
        precode="nums = [1, 2, 3]",
        student="total = sum(nums)",
        probes=("total",),
        taboo=("sum",),
    )
    report = parse_report(out)
    assert report["taboo_violation"] == "sum"
    assert report["probes"] == []


def test_taboo_trap_fires_even_when_student_catches_it(tmp_path):
    out = run_harness(
        tmp_path,
        student="try:\n    sum([1])\nexcept Exception:\n    pass\ntotal = 6",
        probes=("total",),
        taboo=("sum",),
    )
    report = parse_report(out)
    assert report["taboo_violation"] == "sum"


def test_taboo_applies_inside_student_functions_called_by_probes(tmp_path):
    out = run_harness(
        tmp_path,
        student="def f(xs):\n    return sum(xs)",
        probes=("f([1, 2])",),
        taboo=("sum",),
    )
    report = parse_report(out)
    assert report["taboo_violation"] == "sum"


def test_rint_is_deterministic_per_seed(tmp_path):
    outs = [
        parse_report(
            run_harness(
                tmp_path,
                precode="v = _rint(10, 100)",
                student="pass",
                probes=("v",),
                seed=seed,
            )
        )["probes"][0]["rendering"]
        for seed in (5, 5, 6)
    ]
    assert outs[0] == outs[1]
    # Inclusive bounds.
    assert 10 <= int(outs[0]) <= 100


def test_stdin_feeds_input(tmp_path):
    out = run_harness(tmp_path, student="print(2 * int(input()))", stdin="21\n")
    report = parse_report(out)
    assert report["stdout"] == "42\n"


def test_student_error_reported_and_stops_probes(tmp_path):
    out = run_harness(tmp_path, student="x = 1\nboom()", probes=("x",))
    report = parse_report(out)
    assert report["error"]["cls"] == "NameError"
    assert report["probes"] == []


def test_precode_error_reported_separately(tmp_path):
    out = run_harness(tmp_path, precode="1/0", student="x = 1", probes=("x",))
    report = parse_report(out)
    assert report["precode_error"]["cls"] == "ZeroDivisionError"
    assert report["error"] is None


def test_probe_error_does_not_stop_other_probes(tmp_path):
    out = run_harness(tmp_path, student="x = 1", probes=("missing", "x"))
    report = parse_report(out)
    assert report["probes"][0]["error"]["cls"] == "NameError"
    assert report["probes"][1]["rendering"] == "1"


def test_checker_receives_env_and_emits_checks(tmp_path):
    checker = (
        "vals = env.get('values')\n"
        "check(isinstance(vals, list) and all(v % 2 == 0 for v in vals), 'evens only')\n"
    )
    out = run_harness(tmp_path, student="values = [2, 4]", checker=checker)
    report = parse_report(out)
    assert report["checks"] == [{"passed": True, "message": "evens only"}]

    out = run_harness(tmp_path, student="values = [1]", checker=checker)
    assert parse_report(out)["checks"][0]["passed"] is False


def test_checker_crash_and_silence_are_protocol_level(tmp_path):
    out = run_harness(tmp_path, student="x = 1", checker="raise ValueError('bad checker')")
    report = parse_report(out)
    assert report["checker_error"]["cls"] == "ValueError"

    out = run_harness(tmp_path, student="x = 1", checker="pass")
    report = parse_report(out)
    assert report["checker_error"]["msg"] == "checker produced no results"


def test_student_stdout_cannot_forge_a_report(tmp_path):
    fake = json.dumps({"v": 1, "probes": [{"expr": "x", "rendering": "999"}]})
    out = run_harness(
        tmp_path,
        student=f"import sys\nsys.__stdout__.write('1\\n{SENTINEL}\\n{fake}\\n')\nx = 1",
        probes=("x",),
    )
    report = parse_report(out)  # last sentinel wins: the harness's own report
    assert report["probes"][0]["rendering"] == "1"


def test_stdout_capture_is_capped(tmp_path):
    out = run_harness(tmp_path, student="print('y' * 100)", output_cap=10)
    report = parse_report(out)
    assert len(report["stdout"]) == 10
    assert report["stdout_truncated"] is True


def test_report_is_byte_identical_across_runs(tmp_path):
    student = "data = {'b': 2.5, 'a': [1, 2]}\nsets = {3, 1, 2}"
    one = run_harness(tmp_path, student=student, probes=("data", "sets"))
    two = run_harness(tmp_path, student=student, probes=("data", "sets"))
    assert one == two


def test_unordered_collections_render_sorted(tmp_path):
    out = run_harness(tmp_path, student="s = {3, 1, 2}\nd = {'b': 1, 'a': 2}", probes=("s", "d"))
    report = parse_report(out)
    renderings = {p["expr"]: p["rendering"] for p in report["probes"]}
    assert renderings["s"] == "{1, 2, 3}"
    assert renderings["d"] == "{'a': 2, 'b': 1}"


def test_float_rendering_17_digits(tmp_path):
    out = run_harness(tmp_path, student="x = 0.1 + 0.2", probes=("x",))
    report = parse_report(out)
    assert report["probes"][0]["rendering"] == "0.30000000000000004"


def test_namespace_hygiene_probe(tmp_path):
    out = run_harness(
        tmp_path,
        precode="given = 5",
        student="mine = 6",
        probes=("sorted(k for k in dir() if not k.startswith('__'))",),
    )
    report = parse_report(out)
    assert report["probes"][0]["rendering"] == "['_rint', 'given', 'mine']"


def test_malformed_job_is_a_protocol_error(tmp_path):
    out = run_harness(
        tmp_path,
        student="x = 1",
        raw_job={"version": 99, "sentinel": SENTINEL},
    )
    report = parse_report(out)
    assert "unsupported job version" in report["protocol_error"]


def test_system_exit_is_reported_not_fatal(tmp_path):
    out = run_harness(tmp_path, student="import sys\nsys.exit(3)", probes=("x",))
    report = parse_report(out)
    assert report["error"]["cls"] == "SystemExit"
