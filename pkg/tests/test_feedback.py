from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusmill.feedback import (
    CappedEntry,
    FeedbackStep,
    RefineConfig,
    TraceCorruptError,
    TraceEvent,
    cap_steps,
    compute_deltas,
    filter_record,
    parse_events,
    shift_lines,
)
from corpusmill.records import CodeSnippet
from corpusmill.sandbox import RunResult

CFG = RefineConfig()


def _result(status="accepted", truncated=False) -> RunResult:
    return RunResult(
        status=status, stdout="", stderr_raw="", wall_time_ms=1, exit_code=0,
        trace_truncated=truncated,
    )


def _snippet(source="int main() {}") -> CodeSnippet:
    return CodeSnippet(id="s", lang="cpp", source=source, stdin="", expected_stdout="")


# --- parse_events ------------------------------------------------------------


def test_parse_single_event():
    parsed = parse_events("##ADC##\t3\ta\t1\n")
    assert parsed.events == (TraceEvent(3, "a", "1"),)
    assert not parsed.truncated


def test_parse_ignores_noise_lines():
    parsed = parse_events("warning: foo\n##ADC##\t4\ta\t3\n")
    assert parsed.events == (TraceEvent(4, "a", "3"),)


def test_parse_missing_field_is_corrupt():
    with pytest.raises(TraceCorruptError):
        parse_events("##ADC##\t3\ta\n")


def test_parse_bad_line_number_is_corrupt():
    with pytest.raises(TraceCorruptError):
        parse_events("##ADC##\tx\ta\t1\n")


def test_parse_truncation_flag():
    parsed = parse_events("##ADC##\t1\ta\t1\n##ADC##TRUNC\n")
    assert parsed.truncated
    assert len(parsed.events) == 1


def test_parse_empty_value_field():
    parsed = parse_events("##ADC##\t6\tout\t\n")
    assert parsed.events[0].value == ""


def test_shift_lines_maps_back_to_original():
    events = (TraceEvent(4, "a", "1"),)
    assert shift_lines(events, -2)[0].line == 2
    with pytest.raises(TraceCorruptError):
        shift_lines(events, -4)


# --- compute_deltas ----------------------------------------------------------


def test_deltas_for_two_line_program():
    events = [TraceEvent(3, "a", "1"), TraceEvent(4, "a", "3")]
    steps = compute_deltas(events, CFG)
    assert steps == [
        FeedbackStep(1, 3, "a", "<uninit>", "1"),
        FeedbackStep(2, 4, "a", "1", "3"),
    ]


def test_deltas_suppress_no_change():
    events = [TraceEvent(5, "x", "7"), TraceEvent(5, "x", "7")]
    steps = compute_deltas(events, CFG)
    assert len(steps) == 1
    assert steps[0].old == "<uninit>" and steps[0].new == "7"


def test_deltas_empty_events():
    assert compute_deltas([], CFG) == []


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=1, max_value=9),
            st.sampled_from(["a", "b", "c"]),
            st.text(alphabet="xyz01", max_size=3),
        ),
        max_size=60,
    )
)
def test_deltas_chain_and_never_equal(raw):
    events = [TraceEvent(l, v, val) for l, v, val in raw]
    steps = compute_deltas(events, CFG)
    by_var: dict[str, list[FeedbackStep]] = {}
    for step in steps:
        by_var.setdefault(step.var, []).append(step)
    for chain in by_var.values():
        for prev, cur in zip(chain, chain[1:]):
            assert prev.new == cur.old
    assert all(s.old != s.new for s in steps)
    assert [s.step for s in steps] == list(range(1, len(steps) + 1))
    assert compute_deltas(events, CFG) == steps  # deterministic


# --- cap_steps ---------------------------------------------------------------


def _steps_for_pair(n: int, line: int = 4, var: str = "i") -> list[FeedbackStep]:
    return [
        FeedbackStep(k + 1, line, var, str(k), str(k + 1)) for k in range(n)
    ]


def test_cap_fifteen_steps_keeps_head5_tail4():
    capped = cap_steps(_steps_for_pair(15), CFG)
    assert len(capped) == 10
    reals = [e for e in capped if not e.is_ellipsis]
    assert [e.step.new for e in reals] == ["1", "2", "3", "4", "5", "12", "13", "14", "15"]
    assert capped[5].is_ellipsis
    # ellipsis sits where the first elided entry (step 6) was
    assert capped[5].order_key == 6


def test_cap_boundary_ten_unchanged():
    steps = _steps_for_pair(10)
    capped = cap_steps(steps, CFG)
    assert [e.step for e in capped] == steps


def test_cap_preserves_interleaved_order():
    steps = []
    for k in range(2):
        for line, var in ((1, "a"), (2, "b"), (3, "c")):
            steps.append(FeedbackStep(len(steps) + 1, line, var, str(k), str(k + 1)))
    capped = cap_steps(steps, CFG)
    assert [e.step for e in capped] == steps


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=1, max_value=4),
            st.sampled_from(["a", "b"]),
        ),
        max_size=80,
    )
)
@settings(max_examples=200)
def test_cap_group_bound_property(pairs):
    steps = [
        FeedbackStep(i + 1, line, var, str(i), str(i + 1))
        for i, (line, var) in enumerate(pairs)
    ]
    capped = cap_steps(steps, CFG)
    groups: dict[tuple[int, str], list[CappedEntry]] = {}
    for entry in capped:
        groups.setdefault((entry.line, entry.var), []).append(entry)
    for key, group in groups.items():
        assert len(group) <= CFG.steps_per_pair_cap
        originals = [s for s in steps if (s.line, s.var) == key]
        if len(originals) <= CFG.steps_per_pair_cap:
            assert [e.step for e in group] == originals
    assert [e.order_key for e in capped] == sorted(e.order_key for e in capped)


# --- filter_record -----------------------------------------------------------


def _capped_one() -> list[CappedEntry]:
    step = FeedbackStep(1, 1, "a", "<uninit>", "1")
    return [CappedEntry(1, 1, "a", step)]


def test_filter_timeout_is_invalid():
    assert filter_record(_snippet(), _result("timeout"), _capped_one(), CFG) == "invalid"


def test_filter_empty_feedback_is_non_informative():
    assert filter_record(_snippet(), _result(), [], CFG) == "non_informative"


def test_filter_long_source_is_too_long():
    snippet = _snippet(source="x" * 2049)
    assert filter_record(snippet, _result(), _capped_one(), CFG) == "too_long"


def test_filter_truncated_trace_is_invalid():
    assert (
        filter_record(_snippet(), _result(truncated=True), _capped_one(), CFG)
        == "invalid"
    )


def test_filter_order_invalid_wins_over_non_informative():
    assert filter_record(_snippet(), _result("runtime_error"), [], CFG) == "invalid"


def test_filter_keep_counts_rendered_feedback_in_budget():
    # source + one rendered step line just at / just over the cap
    step = FeedbackStep(1, 1, "a", "<uninit>", "1")
    rendered = "Step 1, Variable a changes from <uninit> to 1."
    room = CFG.combined_length_cap_chars - len(rendered)
    at_cap = _snippet(source="x" * room)
    over = _snippet(source="x" * (room + 1))
    capped = [CappedEntry(1, 1, "a", step)]
    assert filter_record(at_cap, _result(), capped, CFG) is None
    assert filter_record(over, _result(), capped, CFG) == "too_long"
