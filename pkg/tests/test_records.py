from __future__ import annotations

import json

import pytest

from corpusmill.records import (
    CodeSnippet,
    dump_snippets,
    load_snippets,
    validate_snippet,
)


def _snippet(**kw) -> CodeSnippet:
    base = dict(id="s1", lang="cpp", source="int main(){}", stdin="", expected_stdout="")
    base.update(kw)
    return CodeSnippet(**base)


def _write_corpus(tmp_path, lines):
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return path


def test_load_two_valid_lines(tmp_path):
    lines = [_snippet(id="a").to_json(), _snippet(id="b").to_json()]
    snippets, errors = load_snippets(_write_corpus(tmp_path, lines))
    assert [s.id for s in snippets] == ["a", "b"]
    assert errors == []


def test_load_reports_missing_field_with_line_number(tmp_path):
    bad = json.dumps({"id": "x", "source": "s", "stdin": "", "expected_stdout": ""})
    snippets, errors = load_snippets(_write_corpus(tmp_path, [_snippet().to_json(), bad]))
    assert len(snippets) == 1
    assert len(errors) == 1
    assert errors[0].line_no == 2
    assert "missing field lang" in errors[0].reason


def test_load_empty_file(tmp_path):
    snippets, errors = load_snippets(_write_corpus(tmp_path, []))
    assert snippets == [] and errors == []


def test_load_reports_duplicate_ids(tmp_path):
    lines = [_snippet(id="dup").to_json(), _snippet(id="dup", source="x;").to_json()]
    snippets, errors = load_snippets(_write_corpus(tmp_path, lines))
    assert len(snippets) == 1
    assert "duplicate id" in errors[0].reason


def test_load_reports_unparseable_json(tmp_path):
    snippets, errors = load_snippets(_write_corpus(tmp_path, ["{not json"]))
    assert snippets == []
    assert errors[0].line_no == 1


def test_unreadable_file_raises(tmp_path):
    with pytest.raises(OSError):
        load_snippets(tmp_path / "missing.jsonl")


def test_validate_well_formed():
    assert validate_snippet(_snippet()) == []


def test_validate_empty_source():
    assert validate_snippet(_snippet(source="")) == ["source empty"]


def test_validate_unsupported_lang():
    assert validate_snippet(_snippet(lang="java")) == ["unsupported lang: java"]


def test_round_trip_preserves_bytes_and_order(tmp_path):
    snippets = [
        _snippet(id="a", source="int x;\n", stdin="1 2\n", expected_stdout="3\n"),
        _snippet(id="b", source='cout << "\\t\\u00e9";', stdin="", expected_stdout="é"),
        _snippet(id="c", lang="python", source="print(1)"),
    ]
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    dump_snippets(snippets, first)
    loaded, errors = load_snippets(first)
    assert errors == []
    dump_snippets(loaded, second)
    assert first.read_bytes() == second.read_bytes()
    assert loaded == snippets
