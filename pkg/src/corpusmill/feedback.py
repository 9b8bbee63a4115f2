"""Turn raw trace output into capped, filtered feedback steps.

The wire format (shared by the C/C++ instrumentation and the interpreted
tracer) is one event per stderr line:

    ##ADC##<TAB><line><TAB><var><TAB><value>

plus the flag line ``##ADC##TRUNC`` when the emitter hit its event cap.
Anything not starting with the sentinel is program noise and is ignored;
a sentinel line that does not parse aborts the record.

Deltas compare each event's value with the variable's previous value,
suppress no-change events, and number the survivors globally. Redundancy
capping then bounds each (line, variable) pair to a fixed number of
rendered entries, eliding the middle with an ellipsis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instrument import SENTINEL
from .records import CodeSnippet
from .sandbox import RunResult

TRUNCATION_FLAG = SENTINEL + "TRUNC"

DROP_REASONS = ("invalid", "non_informative", "too_long")


class TraceCorruptError(ValueError):
    """A sentinel line that fails to parse; the whole record is unusable."""


@dataclass(frozen=True)
class TraceEvent:
    line: int
    var: str
    value: str


@dataclass(frozen=True)
class FeedbackStep:
    step: int
    line: int
    var: str
    old: str
    new: str


@dataclass(frozen=True)
class CappedEntry:
    """One rendered slot after capping: a real step or an elision marker.

    ``step`` is None for the ellipsis; ``order_key`` is the original step
    number of the entry (for the ellipsis, of the first elided step), so
    sorting by it restores global execution order.
    """

    order_key: int
    line: int
    var: str
    step: FeedbackStep | None

    @property
    def is_ellipsis(self) -> bool:
        return self.step is None


@dataclass(frozen=True)
class RefineConfig:
    steps_per_pair_cap: int = 10
    combined_length_cap_chars: int = 2048
    uninit_marker: str = "<uninit>"
    ellipsis_marker: str = "..."

    def validate(self) -> None:
        if self.steps_per_pair_cap <= 0:
            raise ValueError("steps_per_pair_cap must be strictly positive")
        if self.combined_length_cap_chars <= 0:
            raise ValueError("combined_length_cap_chars must be strictly positive")


@dataclass(frozen=True)
class ParsedTrace:
    events: tuple[TraceEvent, ...]
    truncated: bool


def parse_events(stderr_raw: str) -> ParsedTrace:
    """Extract trace events from raw stderr, ignoring non-sentinel noise."""
    events: list[TraceEvent] = []
    truncated = False
    for line_no, line in enumerate(stderr_raw.splitlines(), start=1):
        if not line.startswith(SENTINEL):
            continue
        if line == TRUNCATION_FLAG:
            truncated = True
            continue
        parts = line.split("\t")
        if len(parts) != 4 or parts[0] != SENTINEL:
            raise TraceCorruptError(f"malformed trace line {line_no}: {line!r}")
        try:
            lineno = int(parts[1])
        except ValueError:
            raise TraceCorruptError(
                f"malformed trace line {line_no}: bad line number {parts[1]!r}"
            ) from None
        if lineno < 1 or not parts[2]:
            raise TraceCorruptError(f"malformed trace line {line_no}: {line!r}")
        events.append(TraceEvent(line=lineno, var=parts[2], value=parts[3]))
    return ParsedTrace(events=tuple(events), truncated=truncated)


def shift_lines(events: tuple[TraceEvent, ...], offset: int) -> tuple[TraceEvent, ...]:
    """Map wire line numbers back to the original source's numbering."""
    if offset == 0:
        return events
    shifted = []
    for ev in events:
        new_line = ev.line + offset
        if new_line < 1:
            raise TraceCorruptError(
                f"trace event for line {ev.line} falls inside injected prefix"
            )
        shifted.append(TraceEvent(line=new_line, var=ev.var, value=ev.value))
    return tuple(shifted)


def compute_deltas(
    events: tuple[TraceEvent, ...] | list[TraceEvent], cfg: RefineConfig
) -> list[FeedbackStep]:
    """Per-variable value deltas in emission order, no-change events dropped."""
    last: dict[str, str] = {}
    steps: list[FeedbackStep] = []
    for ev in events:
        old = last.get(ev.var, cfg.uninit_marker)
        if old != ev.value:
            steps.append(
                FeedbackStep(
                    step=len(steps) + 1,
                    line=ev.line,
                    var=ev.var,
                    old=old,
                    new=ev.value,
                )
            )
        last[ev.var] = ev.value
    return steps


def cap_steps(steps: list[FeedbackStep], cfg: RefineConfig) -> list[CappedEntry]:
    """Bound each (line, var) group to the per-pair cap.

    A group over the cap keeps its head and tail and one ellipsis in the
    middle, for exactly ``steps_per_pair_cap`` rendered entries; smaller
    groups pass through. Global ordering by original step number is
    preserved, the ellipsis inheriting the position of the first elided
    step.
    """
    cfg.validate()
    cap = cfg.steps_per_pair_cap
    groups: dict[tuple[int, str], list[FeedbackStep]] = {}
    for step in steps:
        groups.setdefault((step.line, step.var), []).append(step)

    entries: list[CappedEntry] = []
    for (line, var), group in groups.items():
        if len(group) <= cap:
            kept = group
            elided_at = None
        else:
            head = (cap - 1 + 1) // 2  # cap 10 -> 5 head, 1 ellipsis, 4 tail
            tail = cap - 1 - head
            kept = group[:head] + (group[len(group) - tail :] if tail else [])
            elided_at = group[head].step
        for step in kept:
            entries.append(CappedEntry(step.step, line, var, step))
        if elided_at is not None:
            entries.append(CappedEntry(elided_at, line, var, None))
    entries.sort(key=lambda e: e.order_key)
    return entries


def combined_length(source: str, rendered_lines: list[str]) -> int:
    """Characters of code plus feedback, before weaving and comment syntax."""
    return len(source) + sum(len(line) for line in rendered_lines)


def filter_record(
    snippet: CodeSnippet,
    result: RunResult,
    capped: list[CappedEntry],
    cfg: RefineConfig,
    rendered_lines: list[str] | None = None,
) -> str | None:
    """Return a drop reason, or None to keep the record.

    Reasons are checked in order (invalid, non_informative, too_long)
    and the first match wins. A truncated trace counts as invalid: the
    observed feedback is incomplete.
    """
    if result.status != "accepted" or result.trace_truncated:
        return "invalid"
    if not capped:
        return "non_informative"
    if rendered_lines is None:
        from .weave import render_entry

        rendered_lines = [render_entry(entry, cfg) for entry in capped]
    if combined_length(snippet.source, rendered_lines) > cfg.combined_length_cap_chars:
        return "too_long"
    return None
