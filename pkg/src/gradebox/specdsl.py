"""Exercise-definition DSL: parsing, validation, and client-safe descriptors.

An exercise lives in one UTF-8 file whose body is a single ``[pyBox ...]``
shortcode; the exercise id is the filename stem.  Example::

    [pyBox repeats=3 precode="people = _rint(10, 100)"
    autotests="heads\\nshoulders\\nknees\\ntoes"
    solver="heads, shoulders, knees, toes = people, 2*people, 2*people, 10*people"]

Grammar notes:

* Attributes are ``key="quoted value"`` or ``key=bare`` (bare values end at
  whitespace or ``]``), separated by any whitespace including line breaks.
* Inside quoted values ``\\n`` is the line separator and ``\\"`` a literal
  double quote.  A doubled backslash passes through verbatim.  A raw line
  break (with surrounding spaces/tabs) collapses to a single space, so long
  values may wrap across physical lines without changing their meaning.
* Multi-entry attributes (``autotests``, ``taboo``, ``hints``, ``scramble``)
  use ``\\n`` between entries.  Stdin test blocks (``tests``) are separated
  by a line containing only ``---``; a ``tests`` attribute with no separator
  is a single block.

Everything here is pure and operates on immutable values; it is safe to call
from any number of concurrent grading jobs.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "GradingMode",
    "ExerciseSpec",
    "ClientDescriptor",
    "Issue",
    "ShortcodeParseError",
    "parse_shortcode",
    "serialize_spec",
    "validate_spec",
    "client_descriptor",
    "effective_solver",
    "load_spec_file",
    "load_exercise_dir",
]

TAG = "pyBox"

# Attribute name -> ExerciseSpec field it feeds.
_ATTRIBUTES = (
    "repeats",
    "precode",
    "autotests",
    "tests",
    "solver",
    "initial",
    "maxedit",
    "taboo",
    "error",
    "checker",
    "scramble",
    "hints",
)


class GradingMode(enum.Enum):
    VARIABLE_CHECK = "variable"
    STDIO = "stdio"
    FUNCTION_CHECK = "function"
    SCRAMBLE = "scramble"
    REQUIRED_ERROR = "required_error"
    CUSTOM_CHECKER = "checker"


class ShortcodeParseError(ValueError):
    """Raised for malformed shortcode text; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class ExerciseSpec:
    """Parsed exercise definition; the DSL's in-memory form."""

    exercise_id: str
    repeats: int = 1
    precode: str = ""
    autotests: tuple[str, ...] = ()
    test_inputs: tuple[str, ...] = ()
    solver: str = ""
    initial_code: str = ""
    max_edit: int | None = None
    taboo: tuple[str, ...] = ()
    required_error: str = ""
    checker: str = ""
    scramble_lines: tuple[str, ...] = ()
    hints: tuple[str, ...] = ()
    # Attribute names the parser did not recognize (non-strict mode only).
    # Bookkeeping, not content: excluded from equality so round-trips compare
    # on the material fields.
    unknown_attrs: tuple[str, ...] = field(default=(), compare=False)

    @property
    def mode(self) -> GradingMode:
        if self.scramble_lines:
            return GradingMode.SCRAMBLE
        if self.checker:
            return GradingMode.CUSTOM_CHECKER
        if self.required_error:
            return GradingMode.REQUIRED_ERROR
        if self.test_inputs:
            return GradingMode.STDIO
        if self.autotests:
            if any("(" in t for t in self.autotests):
                return GradingMode.FUNCTION_CHECK
            return GradingMode.VARIABLE_CHECK
        # No tests at all; validate_spec flags this as ungradeable.
        return GradingMode.STDIO


@dataclass(frozen=True)
class ClientDescriptor:
    """What a client may see: never the solver, expected outputs, or the
    canonical scramble ordering."""

    exercise_id: str
    mode: str
    editor: str
    lines: tuple[str, ...]  # scramble display lines, () otherwise
    input_kind: str  # "none" | "stdin" | "args"
    hints: tuple[str, ...]


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    message: str


def effective_solver(spec: ExerciseSpec) -> str:
    """The text that must grade Correct: the solver, or for scramble
    exercises the lines in canonical order."""
    if spec.solver:
        return spec.solver
    if spec.scramble_lines:
        return "\n".join(spec.scramble_lines)
    return ""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def byte_offset(self, pos: int | None = None) -> int:
        p = self.pos if pos is None else pos
        return len(self.text[:p].encode("utf-8"))

    def error(self, message: str, pos: int | None = None) -> ShortcodeParseError:
        return ShortcodeParseError(message, self.byte_offset(pos))

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)


def _scan_quoted(sc: _Scanner) -> str:
    """Scan a double-quoted value starting at sc.pos (the opening quote)."""
    text = sc.text
    qpos = sc.pos
    i = qpos + 1
    out: list[str] = []
    while i < len(text):
        ch = text[i]
        if ch == '"':
            sc.pos = i + 1
            return "".join(out)
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == '"':
                out.append('"')
                i += 2
                continue
            if nxt == "\\":
                out.append("\\\\")
                i += 2
                continue
            out.append("\\")
            i += 1
            continue
        if ch == "\n":
            # Cosmetic wrap: swallow surrounding indentation, emit one space.
            while out and out[-1] in " \t":
                out.pop()
            i += 1
            while i < len(text) and text[i] in " \t":
                i += 1
            out.append(" ")
            continue
        out.append(ch)
        i += 1
    raise sc.error("unterminated quoted value", qpos)


def _scan_bare(sc: _Scanner) -> str:
    text = sc.text
    start = sc.pos
    i = start
    while i < len(text) and not text[i].isspace() and text[i] not in ']"':
        i += 1
    if i == start:
        raise sc.error("missing attribute value", start)
    sc.pos = i
    return text[start:i]


def parse_shortcode(
    text: str, exercise_id: str = "exercise", strict: bool = True
) -> ExerciseSpec:
    """Parse one ``[pyBox ...]`` shortcode into an ExerciseSpec.

    In strict mode (authoring) unknown attributes are parse errors; otherwise
    (serving) they are kept on ``spec.unknown_attrs`` and surface as
    validation warnings.  All structural problems raise
    :class:`ShortcodeParseError` naming the byte offset.
    """
    sc = _Scanner(text)
    opener = "[" + TAG
    if not text.startswith(opener):
        raise sc.error(f"shortcode must begin with '{opener}'", 0)
    sc.pos = len(opener)
    if not sc.at_end() and not text[sc.pos].isspace() and text[sc.pos] != "]":
        raise sc.error(f"shortcode must begin with '{opener}'", 0)

    attrs: dict[str, str] = {}
    offsets: dict[str, int] = {}
    unknown: list[str] = []
    closed = False
    while True:
        sc.skip_ws()
        if sc.at_end():
            raise sc.error("missing closing bracket")
        if text[sc.pos] == "]":
            sc.pos += 1
            closed = True
            break
        m = _KEY_RE.match(text, sc.pos)
        if not m:
            raise sc.error(f"expected attribute name, found {text[sc.pos]!r}")
        key = m.group(0)
        key_pos = sc.pos
        sc.pos = m.end()
        if sc.at_end() or text[sc.pos] != "=":
            raise sc.error(f"expected '=' after attribute '{key}'")
        sc.pos += 1
        if sc.at_end():
            raise sc.error("missing attribute value")
        if text[sc.pos] == '"':
            value = _scan_quoted(sc)
        else:
            value = _scan_bare(sc)
        if key in attrs:
            raise sc.error(f"duplicate attribute '{key}'", key_pos)
        if key not in _ATTRIBUTES:
            if strict:
                raise sc.error(f"unknown attribute '{key}'", key_pos)
            unknown.append(key)
        attrs[key] = value
        offsets[key] = key_pos

    assert closed
    sc.skip_ws()
    if not sc.at_end():
        raise sc.error("unexpected text after closing bracket")

    return _build_spec(exercise_id, attrs, offsets, tuple(unknown), sc)


def _split_entries(value: str) -> tuple[str, ...]:
    return tuple(e for e in value.split("\n") if e.strip())


def _split_stdin_blocks(value: str) -> tuple[str, ...]:
    blocks: list[str] = []
    cur: list[str] = []
    for line in value.split("\n"):
        if line.strip() == "---":
            blocks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    blocks.append("\n".join(cur))
    return tuple(blocks)


def _build_spec(
    exercise_id: str,
    attrs: dict[str, str],
    offsets: dict[str, int],
    unknown: tuple[str, ...],
    sc: _Scanner,
) -> ExerciseSpec:
    def intval(key: str, minimum: int) -> int:
        raw = attrs[key].strip()
        try:
            n = int(raw)
        except ValueError:
            raise sc.error(f"invalid integer for '{key}': {raw!r}", offsets[key])
        if n < minimum:
            raise sc.error(f"'{key}' must be >= {minimum}, got {n}", offsets[key])
        return n

    repeats = intval("repeats", 1) if "repeats" in attrs else 1
    max_edit = intval("maxedit", 0) if "maxedit" in attrs else None
    taboo: tuple[str, ...] = ()
    if "taboo" in attrs:
        taboo = tuple(t for t in re.split(r"[,\s]+", attrs["taboo"]) if t)

    return ExerciseSpec(
        exercise_id=exercise_id,
        repeats=repeats,
        precode=attrs.get("precode", ""),
        autotests=_split_entries(attrs["autotests"]) if "autotests" in attrs else (),
        test_inputs=_split_stdin_blocks(attrs["tests"]) if "tests" in attrs else (),
        solver=attrs.get("solver", ""),
        initial_code=attrs.get("initial", ""),
        max_edit=max_edit,
        taboo=taboo,
        required_error=attrs.get("error", "").strip(),
        checker=attrs.get("checker", ""),
        scramble_lines=tuple(attrs["scramble"].split("\n")) if "scramble" in attrs else (),
        hints=_split_entries(attrs["hints"]) if "hints" in attrs else (),
        unknown_attrs=unknown,
    )


# ---------------------------------------------------------------------------
# Serialization (round-trip counterpart of parse_shortcode)
# ---------------------------------------------------------------------------

_BACKSLASH_RUN = re.compile(r"\\+")


def _unserializable_reason(value: str) -> str | None:
    """The two-escape scheme cannot represent a value where an odd-length
    backslash run directly precedes 'n', '\"', a newline, or the end of the
    value (the run collides with an emitted escape or the closing quote)."""
    for m in _BACKSLASH_RUN.finditer(value):
        if len(m.group(0)) % 2 == 0:
            continue
        nxt = value[m.end()] if m.end() < len(value) else None
        if nxt in ("n", '"', "\n", None):
            where = "end of value" if nxt is None else repr(nxt)
            return f"odd backslash run before {where}"
    return None


def _escape(value: str) -> str:
    reason = _unserializable_reason(value)
    if reason is not None:
        raise ValueError(f"value cannot be represented in shortcode escaping ({reason})")
    return value.replace('"', '\\"').replace("\n", "\\n")


def serialize_spec(spec: ExerciseSpec) -> str:
    """Render a spec back to shortcode text.  For any spec that validates
    cleanly, ``parse_shortcode(serialize_spec(s))`` equals ``s`` field by
    field."""
    newline = "\n"
    parts: list[str] = []
    if spec.repeats != 1:
        parts.append(f"repeats={spec.repeats}")
    if spec.precode:
        parts.append(f'precode="{_escape(spec.precode)}"')
    if spec.autotests:
        parts.append(f'autotests="{_escape(newline.join(spec.autotests))}"')
    if spec.test_inputs:
        joined = "\n---\n".join(spec.test_inputs)
        parts.append(f'tests="{_escape(joined)}"')
    if spec.solver:
        parts.append(f'solver="{_escape(spec.solver)}"')
    if spec.initial_code:
        parts.append(f'initial="{_escape(spec.initial_code)}"')
    if spec.max_edit is not None:
        parts.append(f"maxedit={spec.max_edit}")
    if spec.taboo:
        parts.append(f'taboo="{_escape(", ".join(spec.taboo))}"')
    if spec.required_error:
        parts.append(f'error="{_escape(spec.required_error)}"')
    if spec.checker:
        parts.append(f'checker="{_escape(spec.checker)}"')
    if spec.scramble_lines:
        parts.append(f'scramble="{_escape(newline.join(spec.scramble_lines))}"')
    if spec.hints:
        parts.append(f'hints="{_escape(newline.join(spec.hints))}"')
    if not parts:
        return f"[{TAG}]"
    return f"[{TAG} " + "\n".join(parts) + "]"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_spec(spec: ExerciseSpec) -> list[Issue]:
    """Empty list iff the spec is gradeable; issues carry severity and a
    human message.  Enforces the mode-compatibility rules."""
    issues: list[Issue] = []

    def err(msg: str) -> None:
        issues.append(Issue("error", msg))

    def warn(msg: str) -> None:
        issues.append(Issue("warning", msg))

    if spec.repeats < 1:
        err("repeats must be >= 1")
    if spec.max_edit is not None and spec.max_edit < 0:
        err("maxedit must be >= 0")

    has_auto = bool(spec.autotests)
    has_stdio = bool(spec.test_inputs)
    has_error = bool(spec.required_error)
    has_scramble = bool(spec.scramble_lines)
    has_checker = bool(spec.checker)

    if not (has_auto or has_stdio or has_error or has_scramble or has_checker):
        err("exercise defines no tests (ungradeable)")

    # One dominant grading style; the only permitted overlap is a checker
    # consuming autotests as probe expressions.
    if has_scramble:
        for name, present in (
            ("autotests", has_auto),
            ("tests", has_stdio),
            ("error", has_error),
            ("checker", has_checker),
        ):
            if present:
                err(f"scramble cannot be combined with {name}")
        if spec.taboo:
            err("scramble cannot be combined with taboo")
        if spec.max_edit is not None:
            err("scramble cannot be combined with maxedit")
        if spec.initial_code:
            warn("initial code is ignored in scramble mode")
        if spec.solver and spec.solver != "\n".join(spec.scramble_lines):
            warn("solver on a scramble exercise is ignored (line order is canonical)")
        if len(spec.scramble_lines) < 2:
            err("scramble requires \u2265 2 lines")
        elif len(set(spec.scramble_lines)) == 1:
            warn("scramble lines are all identical; every ordering is correct")
    else:
        if has_auto and has_stdio:
            err("autotests cannot be combined with tests")
        if has_error and has_auto:
            err("error cannot be combined with autotests")
        if has_error and has_stdio:
            err("error cannot be combined with tests")
        if has_checker and has_stdio:
            err("checker cannot be combined with tests")
        if has_checker and has_error:
            err("checker cannot be combined with error")

    if (has_auto or has_stdio) and not spec.solver:
        err("solver required to generate expected values")
    if not spec.solver and (has_error or has_checker) and not has_scramble:
        warn("no solver; selfcheck cannot verify this exercise")

    if spec.max_edit is not None and not spec.initial_code and not has_scramble:
        warn("maxedit without initial code measures distance from empty text")
    if spec.solver and spec.initial_code and spec.solver in spec.initial_code:
        warn("initial code contains the solver text (clients would see the answer)")

    for name in spec.taboo:
        if not name.isidentifier():
            err(f"taboo entry {name!r} is not a valid name")
    if has_error and not spec.required_error.isidentifier():
        warn(f"required error {spec.required_error!r} is not a plain error-class name")

    if spec.repeats > 1 and "_rint" not in spec.precode:
        warn("repeats > 1 without _rint randomness produces identical rounds")

    text_fields = {
        "precode": spec.precode,
        "solver": spec.solver,
        "initial": spec.initial_code,
        "checker": spec.checker,
        "autotests": "\n".join(spec.autotests),
        "tests": "\n---\n".join(spec.test_inputs),
        "scramble": "\n".join(spec.scramble_lines),
        "hints": "\n".join(spec.hints),
        "error": spec.required_error,
    }
    for name, value in text_fields.items():
        reason = _unserializable_reason(value)
        if reason is not None:
            err(f"{name} contains a backslash escape that cannot round-trip ({reason})")

    for name in spec.unknown_attrs:
        warn(f"unknown attribute '{name}'")

    return issues


def spec_errors(spec: ExerciseSpec) -> list[Issue]:
    return [i for i in validate_spec(spec) if i.severity == "error"]


# ---------------------------------------------------------------------------
# Client descriptor
# ---------------------------------------------------------------------------

def client_descriptor(spec: ExerciseSpec, seed: int) -> ClientDescriptor:
    """Build the solution-free view of an exercise for clients.

    Scramble exercises get a seeded permutation of their lines; everything
    else gets the initial code.  The solver and expected outputs are absent
    by construction.
    """
    if spec_errors(spec):
        raise ValueError(f"spec '{spec.exercise_id}' does not validate")
    mode = spec.mode
    lines: tuple[str, ...] = ()
    if mode is GradingMode.SCRAMBLE:
        from . import scramble

        lines = scramble.present(spec, seed).lines
        editor = "\n".join(lines)
    else:
        editor = spec.initial_code
    if mode is GradingMode.STDIO:
        input_kind = "stdin"
    elif mode is GradingMode.FUNCTION_CHECK:
        input_kind = "args"
    else:
        input_kind = "none"
    return ClientDescriptor(
        exercise_id=spec.exercise_id,
        mode=mode.value,
        editor=editor,
        lines=lines,
        input_kind=input_kind,
        hints=spec.hints,
    )


# ---------------------------------------------------------------------------
# Disk layout: one spec per file, exercise id from the filename stem
# ---------------------------------------------------------------------------

def load_spec_file(path: str | Path, strict: bool = True) -> ExerciseSpec:
    p = Path(path)
    body = p.read_text(encoding="utf-8").strip()
    return parse_shortcode(body, exercise_id=p.stem, strict=strict)


def load_exercise_dir(directory: str | Path, strict: bool = False) -> dict[str, ExerciseSpec]:
    specs: dict[str, ExerciseSpec] = {}
    for p in sorted(Path(directory).glob("*.pybox")):
        specs[p.stem] = load_spec_file(p, strict=strict)
    return specs
