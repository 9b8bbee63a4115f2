"""End-to-end trace pipeline: ingest, instrument, execute, refine, weave.

One snippet flows through: defect patching and instrumentation (C/C++)
or a tracer child process (interpreted), sandboxed execution, trace
parsing, delta computation, redundancy capping, the three record
filters, and comment weaving. A bounded worker pool processes snippets
in parallel; results are collected in input order so output files are
deterministic.

Stats deliberately contain no timings or timestamps: reruns over
unchanged inputs must be byte-identical.
"""

from __future__ import annotations

import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import feedback, instrument, sandbox, weave
from .records import COMPILED_LANGS, AnnotatedSnippet, CodeSnippet

TRACER_ENV = "CORPUSMILL_TRACER"


@dataclass
class RecordOutcome:
    snippet: CodeSnippet
    status: str | None = None
    annotated: AnnotatedSnippet | None = None
    drop_reason: str | None = None
    error: str | None = None


@dataclass
class TraceStats:
    ingested: int = 0
    annotated: int = 0
    errored: int = 0
    drops: dict[str, int] = field(default_factory=dict)
    statuses: dict[str, int] = field(default_factory=dict)
    languages: dict[str, int] = field(default_factory=dict)
    drop_records: list[dict] = field(default_factory=list)
    error_records: list[dict] = field(default_factory=list)
    toolchain: str = ""
    mode: str = "line"
    length_rule: str = "source_chars_plus_rendered_feedback_chars_pre_weaving"

    def to_dict(self) -> dict:
        return {
            "ingested": self.ingested,
            "annotated": self.annotated,
            "errored": self.errored,
            "drops": dict(sorted(self.drops.items())),
            "statuses": dict(sorted(self.statuses.items())),
            "languages": dict(sorted(self.languages.items())),
            "drop_records": self.drop_records,
            "error_records": self.error_records,
            "toolchain": self.toolchain,
            "mode": self.mode,
            "length_rule": self.length_rule,
        }


def resolve_tracer(configured: list[str] | None = None) -> list[str] | None:
    """Find the interpreted-language tracer command, if any.

    Resolution order: explicit configuration, the CORPUSMILL_TRACER
    environment variable (whitespace-split), then a `linetracer` script
    on PATH. None means interpreted snippets cannot run.
    """
    import os

    if configured:
        return list(configured)
    env = os.environ.get(TRACER_ENV)
    if env:
        return env.split()
    found = shutil.which("linetracer")
    if found:
        return [found]
    return None


def process_snippet(
    snippet: CodeSnippet,
    limits: sandbox.Limits,
    refine: feedback.RefineConfig,
    embed_cfg_mode: str,
    workdir: Path,
    tracer_cmd: list[str] | None,
) -> RecordOutcome:
    """Run one snippet through the full pipeline inside its own workdir."""
    outcome = RecordOutcome(snippet=snippet)
    prepended = 0

    if snippet.lang in COMPILED_LANGS:
        patched = instrument.patch_defects(snippet.source)
        prepended = len(patched.splitlines()) - len(snippet.source.splitlines())
        inst = instrument.instrument(patched, snippet.lang)
        compiled = sandbox.compile_snippet(inst, snippet.lang, workdir)
        if not compiled.ok:
            outcome.status = "compile_error"
            outcome.drop_reason = "invalid"
            return outcome
        argv = [str(compiled.binary)]
    else:
        if tracer_cmd is None:
            raise sandbox.ToolchainError(
                "no tracer configured for interpreted snippets "
                f"(set {TRACER_ENV} or install linetracer)"
            )
        script = workdir / "main.py"
        script.write_text(snippet.source, encoding="utf-8")
        argv = list(tracer_cmd) + [str(script)]

    result = sandbox.run_program(
        argv, snippet.stdin, limits, workdir, expected_stdout=snippet.expected_stdout
    )
    if snippet.lang == "python" and result.exit_code == sandbox.TRACER_INTERNAL_EXIT:
        # reserved exit code: the tracer broke, the snippet got no verdict
        outcome.error = "tracer_internal: tracer process failed"
        return outcome
    outcome.status = result.status

    try:
        parsed = feedback.parse_events(result.stderr_raw)
    except feedback.TraceCorruptError as exc:
        outcome.error = f"trace_corrupt: {exc}"
        return outcome
    if parsed.truncated:
        result.trace_truncated = True

    try:
        events = feedback.shift_lines(parsed.events, -prepended)
    except feedback.TraceCorruptError as exc:
        outcome.error = f"trace_corrupt: {exc}"
        return outcome

    steps = feedback.compute_deltas(events, refine)
    capped = feedback.cap_steps(steps, refine)
    rendered = [weave.render_entry(entry, refine) for entry in capped]
    reason = feedback.filter_record(snippet, result, capped, refine, rendered)
    if reason is not None:
        outcome.drop_reason = reason
        return outcome

    cfg = weave.EmbedConfig.for_lang(snippet.lang, embed_cfg_mode)
    outcome.annotated = weave.weave(snippet, capped, cfg, refine)
    return outcome


def run_trace_pipeline(
    snippets: list[CodeSnippet],
    limits: sandbox.Limits,
    refine: feedback.RefineConfig,
    mode: str = "line",
    workers: int = 4,
    tracer_cmd: list[str] | None = None,
) -> tuple[list[AnnotatedSnippet], TraceStats]:
    """Process a whole corpus with a bounded pool, preserving input order."""
    stats = TraceStats(mode=mode)
    stats.ingested = len(snippets)
    needs_compiler = any(s.lang in COMPILED_LANGS for s in snippets)
    needs_tracer = any(s.lang == "python" for s in snippets)
    if needs_compiler:
        _, stats.toolchain = sandbox.probe_compiler()
    tracer = resolve_tracer(tracer_cmd)
    if needs_tracer and tracer is None:
        raise sandbox.ToolchainError(
            f"corpus contains interpreted snippets but no tracer is configured "
            f"(set {TRACER_ENV} or install linetracer)"
        )

    annotated: list[AnnotatedSnippet] = []
    with tempfile.TemporaryDirectory(prefix="corpusmill-") as base:

        def _one(indexed: tuple[int, CodeSnippet]) -> RecordOutcome:
            idx, snippet = indexed
            workdir = Path(base) / f"r{idx:05d}"
            workdir.mkdir()
            try:
                return process_snippet(snippet, limits, refine, mode, workdir, tracer)
            except sandbox.ToolchainError:
                raise
            except Exception as exc:  # infrastructure failure, not a verdict
                outcome = RecordOutcome(snippet=snippet)
                outcome.error = f"internal: {exc}"
                return outcome

        if workers > 1 and len(snippets) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_one, enumerate(snippets)))
        else:
            outcomes = [_one(pair) for pair in enumerate(snippets)]

    for outcome in outcomes:
        snippet = outcome.snippet
        stats.languages[snippet.lang] = stats.languages.get(snippet.lang, 0) + 1
        if outcome.status is not None:
            stats.statuses[outcome.status] = stats.statuses.get(outcome.status, 0) + 1
        if outcome.error is not None:
            stats.errored += 1
            stats.error_records.append({"id": snippet.id, "error": outcome.error})
        elif outcome.drop_reason is not None:
            stats.drops[outcome.drop_reason] = stats.drops.get(outcome.drop_reason, 0) + 1
            stats.drop_records.append({"id": snippet.id, "drop_reason": outcome.drop_reason})
        else:
            stats.annotated += 1
            annotated.append(outcome.annotated)

    return annotated, stats
