"""gradebox: a self-hostable autograder for beginner Python exercises.

Exercises are declared in a compact shortcode DSL, student code runs inside
a resource-limited sandbox, and grading compares against values generated
from the author's model solution.  The package also ships the submission /
progress / help-message workflow, an HTTP API, and author tooling.
"""

from .report import GradeReport, TestResult, Verdict
from .sandbox import ExecutionOutcome, SandboxPolicy, SandboxStatus
from .specdsl import ClientDescriptor, ExerciseSpec, GradingMode

__all__ = [
    "ExerciseSpec",
    "GradingMode",
    "ClientDescriptor",
    "SandboxPolicy",
    "SandboxStatus",
    "ExecutionOutcome",
    "GradeReport",
    "TestResult",
    "Verdict",
]

__version__ = "0.1.0"
