import itertools

import pytest
from hypothesis import given, strategies as st

from gradebox.report import Verdict
from gradebox.scramble import judge_order, present
from gradebox.specdsl import ExerciseSpec


THREE_LINES = ("a = 1", "b = 2", "print(a + b)")


def spec_of(lines):
    return ExerciseSpec("scr", scramble_lines=tuple(lines))


def test_two_lines_always_reversed():
    spec = spec_of(("first", "second"))
    for seed in range(25):
        assert present(spec, seed).lines == ("second", "first")


def test_three_lines_cover_all_non_identity_permutations():
    spec = spec_of(THREE_LINES)
    non_identity = set(itertools.permutations(THREE_LINES)) - {THREE_LINES}
    assert len(non_identity) == 5
    seen = {present(spec, seed).lines for seed in range(400)}
    assert seen == non_identity


def test_presentation_is_stable_per_seed():
    spec = spec_of(THREE_LINES)
    for seed in (0, 1, 7, 12345):
        assert present(spec, seed) == present(spec, seed)


def test_presentation_preserves_indentation():
    lines = ("for i in range(3):", "    print(i)", "print('done')")
    spec = spec_of(lines)
    shown = present(spec, 3).lines
    assert sorted(shown) == sorted(lines)
    assert "    print(i)" in shown


def test_permutation_maps_display_to_canonical():
    spec = spec_of(THREE_LINES)
    pres = present(spec, 11)
    for display_pos, canonical_pos in enumerate(pres.permutation):
        assert pres.lines[display_pos] == THREE_LINES[canonical_pos]


def test_duplicate_lines_are_allowed():
    spec = spec_of(("pass", "pass"))
    pres = present(spec, 5)
    assert sorted(pres.lines) == ["pass", "pass"]
    # Equal texts are interchangeable, so this degenerate spec is always solved.
    assert judge_order(spec, pres.lines).verdict is Verdict.CORRECT


def test_present_rejects_non_scramble_spec():
    with pytest.raises(ValueError):
        present(ExerciseSpec("e", autotests=("x",), solver="x = 1"), 1)


def test_judge_canonical_order_is_correct():
    spec = spec_of(THREE_LINES)
    report = judge_order(spec, list(THREE_LINES))
    assert report.verdict is Verdict.CORRECT


def test_judge_swapped_lines_reports_first_mismatch_position_only():
    spec = spec_of(THREE_LINES)
    submitted = [THREE_LINES[1], THREE_LINES[0], THREE_LINES[2]]
    report = judge_order(spec, submitted)
    assert report.verdict is Verdict.INCORRECT
    result = report.results[0]
    assert "line 1" in result.observed
    # Feedback must not reveal the expected line text.
    assert THREE_LINES[0] not in result.observed + result.detail + result.expected


def test_judge_altered_lines_is_constraint_violation():
    spec = spec_of(THREE_LINES)
    report = judge_order(spec, ["a = 1", "b = 2", "print(a+b)"])
    assert report.verdict is Verdict.CONSTRAINT_VIOLATION
    assert report.constraint_notes == ("lines were altered",)
    report = judge_order(spec, ["a = 1", "b = 2"])
    assert report.verdict is Verdict.CONSTRAINT_VIOLATION


def test_duplicate_lines_interchangeable_in_judging():
    spec = spec_of(("x = 0", "pass", "pass", "print(x)"))
    # Swapping the two equal lines is still the canonical order textually.
    report = judge_order(spec, ["x = 0", "pass", "pass", "print(x)"])
    assert report.verdict is Verdict.CORRECT


@given(st.integers(min_value=0, max_value=10_000))
def test_presented_order_is_never_already_solved(seed):
    spec = spec_of(THREE_LINES)
    pres = present(spec, seed)
    assert judge_order(spec, pres.lines).verdict is Verdict.INCORRECT


@given(
    st.lists(
        st.text(alphabet="abc ", min_size=0, max_size=6), min_size=2, max_size=5, unique=True
    ),
    st.integers(min_value=0, max_value=999),
)
def test_presentation_is_permutation_of_lines(lines, seed):
    spec = spec_of(lines)
    pres = present(spec, seed)
    assert sorted(pres.lines) == sorted(lines)
    assert judge_order(spec, list(spec.scramble_lines)).verdict is Verdict.CORRECT
