"""Fine-tuning dataset export and the two-stage training recipe manifest.

Stage one turns each annotated snippet into an execution-simulation
record; stage two serializes the function-calling pool into system/user/
assistant records. The manifest always lists both stages, code first,
because the downstream recipe trains on the code dataset before the
function-calling dataset.
"""

from __future__ import annotations

import json
from pathlib import Path

from .advloop import FnCallItem, calls_to_obj, tools_to_obj
from .records import AnnotatedSnippet, write_jsonl
from .weave import EmbedConfig, strip_annotations

CODE_INSTRUCTION = (
    "Execute the program in your head on the provided input. Rewrite the "
    "program with a comment directly under each line describing every "
    "variable change that line causes, numbered as global steps, and "
    "include the input and the resulting standard output as comments."
)


def code_record(annotated: AnnotatedSnippet, stdin: str) -> dict:
    cfg = EmbedConfig.for_lang(annotated.lang, annotated.mode)
    source = strip_annotations(annotated.annotated_source, cfg)
    return {
        "instruction": CODE_INSTRUCTION,
        "input": f"{source}\n\nInput:\n{stdin}",
        "output": annotated.annotated_source,
    }


def fncall_record(item: FnCallItem) -> dict:
    return {
        "system": json.dumps(tools_to_obj(item.tools), ensure_ascii=False),
        "user": item.query,
        "assistant": item.thought + "\n" + json.dumps(calls_to_obj(item.calls), ensure_ascii=False),
    }


def export_code_stage(
    annotated: list[AnnotatedSnippet], stdin_by_id: dict[str, str], out_path: str | Path
) -> int:
    records = [code_record(a, stdin_by_id.get(a.id, "")) for a in annotated]
    write_jsonl(out_path, (json.dumps(r, ensure_ascii=False) for r in records))
    return len(records)


def export_fncall_stage(pool: list[FnCallItem], out_path: str | Path) -> int:
    write_jsonl(out_path, (json.dumps(fncall_record(i), ensure_ascii=False) for i in pool))
    return len(pool)


def write_manifest(code_path: str, fncall_path: str, out_path: str | Path) -> dict:
    """The staged-training recipe: stage 1 code, stage 2 function calling."""
    manifest = {
        "stages": [
            {"stage": 1, "name": "code", "file": code_path},
            {"stage": 2, "name": "fncall", "file": fncall_path},
        ]
    }
    target = Path(out_path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    tmp.replace(target)
    return manifest
