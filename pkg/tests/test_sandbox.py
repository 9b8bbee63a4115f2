from __future__ import annotations

import sys

import pytest

from conftest import requires_compiler
from corpusmill.instrument import instrument, patch_defects
from corpusmill.sandbox import (
    Limits,
    compile_snippet,
    judge,
    probe_compiler,
    run_program,
)

FAST = Limits(wall_time_ms=3000)


def _instrumented(source: str):
    return instrument(patch_defects(source), "cpp")


# --- judge -------------------------------------------------------------------


def test_judge_trailing_newline_insensitive():
    assert judge("3\n", "3")


def test_judge_trailing_space_insensitive():
    assert judge("3 \n4\n", "3\n4")


def test_judge_order_sensitive():
    assert not judge("3\n4\n", "4\n3\n")


def test_judge_interior_blank_lines_matter():
    assert not judge("3\n\n4", "3\n4")


# --- compile -----------------------------------------------------------------


@requires_compiler
def test_compile_valid_program(tmp_path):
    inst = _instrumented('int main() { cout << "hello\\n"; return 0; }\n')
    outcome = compile_snippet(inst, "cpp", tmp_path)
    assert outcome.ok and outcome.binary is not None
    assert outcome.binary.exists()


@requires_compiler
def test_compile_syntax_error_captures_diagnostics(tmp_path):
    inst = _instrumented("int main() { retur 0; }\n")
    outcome = compile_snippet(inst, "cpp", tmp_path)
    assert not outcome.ok and outcome.binary is None
    assert outcome.diagnostics.strip()


@requires_compiler
def test_compile_empty_source_fails(tmp_path):
    # patched empty source is prelude-only: no main, so linking fails
    outcome = compile_snippet(_instrumented(""), "cpp", tmp_path)
    assert not outcome.ok


# --- run ---------------------------------------------------------------------


@requires_compiler
def test_run_accepted(tmp_path):
    inst = _instrumented("int main() { int x; cin >> x; cout << x * 3 << endl; }\n")
    outcome = compile_snippet(inst, "cpp", tmp_path)
    result = run_program([str(outcome.binary)], "1\n", FAST, tmp_path, expected_stdout="3")
    assert result.status == "accepted"
    assert result.exit_code == 0
    assert result.stdout == "3\n"


@requires_compiler
def test_run_timeout_kills_process(tmp_path):
    inst = _instrumented("int main() { while (true) {} }\n")
    outcome = compile_snippet(inst, "cpp", tmp_path)
    limits = Limits(wall_time_ms=500)
    result = run_program([str(outcome.binary)], "", limits, tmp_path)
    assert result.status == "timeout"
    assert result.wall_time_ms >= 500


@requires_compiler
def test_run_integer_division_by_zero_is_runtime_error(tmp_path):
    # direct execution of this program crashes with SIGFPE; the harness
    # must classify the nonzero exit as runtime_error
    inst = _instrumented(
        "int main() { int a = 10; int b = 0; cout << a / b << endl; return 0; }\n"
    )
    outcome = compile_snippet(inst, "cpp", tmp_path)
    result = run_program([str(outcome.binary)], "", FAST, tmp_path, expected_stdout="x")
    assert result.status == "runtime_error"
    assert result.exit_code != 0


@requires_compiler
def test_run_wrong_answer(tmp_path):
    inst = _instrumented('int main() { cout << "42\\n"; }\n')
    outcome = compile_snippet(inst, "cpp", tmp_path)
    result = run_program([str(outcome.binary)], "", FAST, tmp_path, expected_stdout="7")
    assert result.status == "wrong_answer"


def test_run_python_caps_stderr_at_line_boundary(tmp_path):
    script = tmp_path / "noisy.py"
    script.write_text(
        "import sys\nfor i in range(400):\n    sys.stderr.write('n' * 99 + '\\n')\n"
        "print('ok')\n",
        encoding="utf-8",
    )
    limits = Limits(wall_time_ms=10000, max_stderr_bytes=1000)
    result = run_program([sys.executable, str(script)], "", limits, tmp_path, "ok")
    assert result.trace_truncated
    assert result.stderr_raw.endswith("\n")
    assert len(result.stderr_raw) <= 1000


def test_run_memory_limit_enforced(tmp_path):
    script = tmp_path / "hog.py"
    script.write_text("x = bytearray(800 * 1024 * 1024)\nprint(len(x))\n", encoding="utf-8")
    limits = Limits(wall_time_ms=10000, memory_bytes=256 * 1024 * 1024)
    result = run_program([sys.executable, str(script)], "", limits, tmp_path)
    assert result.status == "runtime_error"


def test_isolation_two_runs_same_output(tmp_path):
    script = tmp_path / "echo.py"
    script.write_text("print(input())\n", encoding="utf-8")
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    r1 = run_program([sys.executable, str(script)], "hi\n", FAST, a, "hi")
    r2 = run_program([sys.executable, str(script)], "hi\n", FAST, b, "hi")
    assert r1.stdout == r2.stdout
    assert r1.status == r2.status == "accepted"


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        Limits(wall_time_ms=0).validate()


@requires_compiler
def test_probe_compiler_reports_version():
    path, version = probe_compiler()
    assert path
    assert version


@requires_compiler
def test_tricky_constructs_preserve_semantics(tmp_path):
    from test_instrument import TRICKY

    inst = _instrumented(TRICKY)
    outcome = compile_snippet(inst, "cpp", tmp_path)
    assert outcome.ok, outcome.diagnostics
    traced = run_program([str(outcome.binary)], "", FAST, tmp_path)
    assert traced.stdout == "7 3\n"
    # the dead switch branch produced no event even though instrumented
    assert "\t23\t" not in traced.stderr_raw
    assert "\t19\ttotal\t3" in traced.stderr_raw
