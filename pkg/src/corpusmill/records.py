"""Corpus record schema and line-delimited persistence.

A corpus file holds one JSON object per line (UTF-8, ``\\n`` separated,
no BOM):

    {"id": "...", "lang": "c"|"cpp"|"python", "source": "...",
     "stdin": "...", "expected_stdout": "..."}

Annotated outputs use the same shape with fields
``{"id", "lang", "mode", "annotated_source", "step_count"}``.

Loading is total: malformed lines come back as per-line error records
with a reason, never as silent skips, and record order is preserved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

LANGS = ("c", "cpp", "python")
COMPILED_LANGS = ("c", "cpp")
EMBED_MODES = ("line", "prefix", "suffix")

_SNIPPET_FIELDS = ("id", "lang", "source", "stdin", "expected_stdout")


@dataclass(frozen=True)
class CodeSnippet:
    """One corpus record: a program plus its judge input and output."""

    id: str
    lang: str
    source: str
    stdin: str
    expected_stdout: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "lang": self.lang,
                "source": self.source,
                "stdin": self.stdin,
                "expected_stdout": self.expected_stdout,
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class AnnotatedSnippet:
    """A snippet with feedback woven in as tagged comments."""

    id: str
    lang: str
    annotated_source: str
    step_count: int
    mode: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "lang": self.lang,
                "mode": self.mode,
                "annotated_source": self.annotated_source,
                "step_count": self.step_count,
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class LoadError:
    """A malformed corpus line, reported by 1-based line number."""

    line_no: int
    reason: str


def validate_snippet(snippet: CodeSnippet) -> list[str]:
    """Return invariant violations for one record; empty means valid."""
    violations = []
    if not snippet.id:
        violations.append("id empty")
    if not snippet.source:
        violations.append("source empty")
    if snippet.lang not in LANGS:
        violations.append(f"unsupported lang: {snippet.lang}")
    return violations


def _snippet_from_obj(obj: object) -> CodeSnippet:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    for field in _SNIPPET_FIELDS:
        if field not in obj:
            raise ValueError(f"missing field {field}")
        if not isinstance(obj[field], str):
            raise ValueError(f"field {field} must be a string")
    return CodeSnippet(
        id=obj["id"],
        lang=obj["lang"],
        source=obj["source"],
        stdin=obj["stdin"],
        expected_stdout=obj["expected_stdout"],
    )


def load_snippets(path: str | Path) -> tuple[list[CodeSnippet], list[LoadError]]:
    """Load a corpus file in file order.

    Structurally malformed lines and duplicate ids are returned as
    ``LoadError`` entries; an unreadable file raises ``OSError``.
    """
    snippets: list[CodeSnippet] = []
    errors: list[LoadError] = []
    seen_ids: set[str] = set()
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            snippet = _snippet_from_obj(obj)
        except (json.JSONDecodeError, ValueError) as exc:
            errors.append(LoadError(line_no, str(exc)))
            continue
        if snippet.id in seen_ids:
            errors.append(LoadError(line_no, f"duplicate id: {snippet.id}"))
            continue
        seen_ids.add(snippet.id)
        snippets.append(snippet)
    return snippets, errors


def dump_snippets(snippets: list[CodeSnippet], path: str | Path) -> None:
    write_jsonl(path, (s.to_json() for s in snippets))


def load_annotated(path: str | Path) -> list[AnnotatedSnippet]:
    records = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        if not isinstance(obj, dict):
            raise ValueError(f"line {line_no}: record is not a JSON object")
        records.append(
            AnnotatedSnippet(
                id=obj["id"],
                lang=obj["lang"],
                annotated_source=obj["annotated_source"],
                step_count=int(obj["step_count"]),
                mode=obj["mode"],
            )
        )
    return records


def write_jsonl(path: str | Path, lines) -> None:
    """Write records atomically: temp file in the same directory, then rename."""
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    tmp.replace(target)
