"""In-sandbox test harness for one grading round.

This package ships a single self-contained program, ``runner.py``, that an
orchestrator copies into an execution bundle next to a ``job.json`` record
and the student's source file.  The runner never imports the orchestrator;
the only contract between the two sides is the bundle layout and the
job/report wire format documented in :mod:`pyharness.runner`.
"""

from importlib import resources

PROTOCOL_VERSION = 1
RUNNER_FILENAME = "runner.py"


def runner_source() -> str:
    """Source text of the harness program, ready to drop into a bundle."""
    return (resources.files(__name__) / RUNNER_FILENAME).read_text(encoding="utf-8")
