"""Render feedback steps and weave them into source as tagged comments.

Every generated comment line carries the ``[ADC]`` tag after the
language's comment token, so stripping is exact even when user code
contains comments that resemble the step template. Three placements are
supported: ``line`` (each step directly under its source line),
``prefix`` (one block before the source), and ``suffix`` (one block
after). All modes also annotate the program input before the source and
the expected standard output after it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .feedback import CappedEntry, FeedbackStep, RefineConfig
from .records import EMBED_MODES, AnnotatedSnippet, CodeSnippet

ANNOTATION_TAG = "[ADC]"

STEP_TEMPLATE = "Step {step}, Variable {var} changes from {old} to {new}."

_COMMENT_TOKENS = {"c": "//", "cpp": "//", "python": "#"}


class WeaveError(RuntimeError):
    """Internal inconsistency: a step points outside the source."""


@dataclass(frozen=True)
class EmbedConfig:
    mode: str = "line"
    comment_token: str = "//"
    annotation_tag: str = ANNOTATION_TAG

    @classmethod
    def for_lang(cls, lang: str, mode: str = "line") -> "EmbedConfig":
        if mode not in EMBED_MODES:
            raise ValueError(f"unknown embed mode: {mode}")
        return cls(mode=mode, comment_token=_COMMENT_TOKENS[lang])


def render_step(step: FeedbackStep) -> str:
    return STEP_TEMPLATE.format(step=step.step, var=step.var, old=step.old, new=step.new)


def render_entry(entry: CappedEntry, refine: RefineConfig = RefineConfig()) -> str:
    if entry.is_ellipsis:
        return refine.ellipsis_marker
    return render_step(entry.step)


def _tagged(cfg: EmbedConfig, text: str, indent: str = "") -> str:
    return f"{indent}{cfg.comment_token} {cfg.annotation_tag} {text}"


def _block(cfg: EmbedConfig, header: str, body: str) -> list[str]:
    lines = [_tagged(cfg, header)]
    lines.extend(_tagged(cfg, line) for line in body.splitlines())
    return lines


def weave(
    snippet: CodeSnippet,
    capped: list[CappedEntry],
    cfg: EmbedConfig,
    refine: RefineConfig = RefineConfig(),
) -> AnnotatedSnippet:
    """Embed rendered feedback plus input/output blocks into the source."""
    source = snippet.source
    src_elements = source.split("\n")
    line_count = len(source.splitlines())
    if not capped:
        raise WeaveError("weave called with zero feedback entries")
    for entry in capped:
        if entry.line < 1 or entry.line > line_count:
            raise WeaveError(
                f"feedback entry line {entry.line} outside source of {line_count} lines"
            )

    input_block = _block(cfg, "Input:", snippet.stdin)
    output_block = _block(cfg, "Output:", snippet.expected_stdout)

    out: list[str] = []
    out.extend(input_block)
    if cfg.mode == "prefix":
        out.extend(_tagged(cfg, render_entry(e, refine)) for e in capped)
        out.extend(src_elements)
    elif cfg.mode == "suffix":
        out.extend(src_elements)
        out.extend(_tagged(cfg, render_entry(e, refine)) for e in capped)
    else:
        by_line: dict[int, list[CappedEntry]] = {}
        for entry in capped:
            by_line.setdefault(entry.line, []).append(entry)
        for idx, element in enumerate(src_elements):
            out.append(element)
            for entry in by_line.get(idx + 1, ()):
                indent = element[: len(element) - len(element.lstrip())]
                out.append(_tagged(cfg, render_entry(entry, refine), indent))
    out.extend(output_block)

    return AnnotatedSnippet(
        id=snippet.id,
        lang=snippet.lang,
        annotated_source="\n".join(out),
        step_count=sum(1 for e in capped if not e.is_ellipsis),
        mode=cfg.mode,
    )


def _strip_pattern(cfg: EmbedConfig) -> re.Pattern[str]:
    return re.compile(
        rf"^\s*{re.escape(cfg.comment_token)} {re.escape(cfg.annotation_tag)}(?: .*)?$"
    )


def strip_annotations(annotated: str, cfg: EmbedConfig) -> str:
    """Remove every tagged comment line, recovering the original source."""
    pattern = _strip_pattern(cfg)
    kept = [line for line in annotated.split("\n") if not pattern.match(line)]
    return "\n".join(kept)
