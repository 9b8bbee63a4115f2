"""Compile and run snippets in isolated working directories with limits.

Each run gets its own working directory, a wall-clock timeout that kills
the whole process group, an address-space cap, and byte caps on captured
stdout/stderr. Stream capture goes through files rather than pipes so
runaway output cannot deadlock the harness.

Status classification follows online-judge conventions: compile failure,
then timeout, then nonzero exit, then output mismatch, else accepted.
"""

from __future__ import annotations

import functools
import os
import resource
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

from .instrument import InstrumentedSource

STATUSES = ("accepted", "wrong_answer", "runtime_error", "timeout", "compile_error")

COMPILE_TIMEOUT_S = 60.0

# Exit code reserved by the interpreted-language tracer for its own
# failures, so they are never misread as a snippet verdict.
TRACER_INTERNAL_EXIT = 70


class ToolchainError(RuntimeError):
    """A required toolchain piece is missing: configuration, not a verdict."""


@dataclass(frozen=True)
class Limits:
    wall_time_ms: int = 2000
    memory_bytes: int = 256 * 1024 * 1024
    max_stderr_bytes: int = 8 * 1024 * 1024
    max_stdout_bytes: int = 1 * 1024 * 1024

    def validate(self) -> None:
        for name in ("wall_time_ms", "memory_bytes", "max_stderr_bytes", "max_stdout_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"limit {name} must be strictly positive")


@dataclass
class RunResult:
    status: str
    stdout: str
    stderr_raw: str
    wall_time_ms: int
    exit_code: int | None = None
    trace_truncated: bool = False


@dataclass(frozen=True)
class CompileOutcome:
    ok: bool
    binary: Path | None
    diagnostics: str
    wall_time_ms: int


@functools.lru_cache(maxsize=1)
def probe_compiler() -> tuple[str, str]:
    """Locate g++ and report its version line; missing toolchain is fatal."""
    path = shutil.which("g++")
    if path is None:
        raise ToolchainError("g++ not found on PATH")
    out = subprocess.run(
        [path, "--version"], capture_output=True, text=True, check=False
    )
    version = out.stdout.splitlines()[0] if out.stdout else "g++ (unknown version)"
    return path, version


def compile_snippet(inst: InstrumentedSource, lang: str, workdir: Path) -> CompileOutcome:
    """Build an instrumented C/C++ source in workdir; C++11, no optimization."""
    if lang not in ("c", "cpp"):
        raise ValueError(f"compile only handles c/cpp, got {lang!r}")
    gxx, _ = probe_compiler()
    src = workdir / "main.cpp"
    src.write_text(inst.text, encoding="utf-8")
    binary = workdir / "prog"
    started = time.monotonic()
    try:
        proc = subprocess.run(
            [gxx, "-std=c++11", "-O0", "-o", str(binary), str(src)],
            capture_output=True,
            text=True,
            timeout=COMPILE_TIMEOUT_S,
            check=False,
        )
        diagnostics = proc.stdout + proc.stderr
        ok = proc.returncode == 0
    except subprocess.TimeoutExpired:
        diagnostics = "compiler timed out"
        ok = False
    wall_ms = int((time.monotonic() - started) * 1000)
    return CompileOutcome(
        ok=ok, binary=binary if ok else None, diagnostics=diagnostics, wall_time_ms=wall_ms
    )


def _read_capped(path: Path, cap: int) -> tuple[str, bool]:
    data = path.read_bytes()
    if len(data) <= cap:
        return data.decode("utf-8", errors="replace"), False
    return data[:cap].decode("utf-8", errors="replace"), True


def _cut_at_line_boundary(text: str) -> str:
    end = text.rfind("\n")
    return text if end == -1 else text[: end + 1]


def run_program(
    argv: list[str],
    stdin_text: str,
    limits: Limits,
    workdir: Path,
    expected_stdout: str = "",
) -> RunResult:
    """Run argv in workdir under limits and classify the outcome.

    Sandbox setup problems raise OSError rather than producing a verdict.
    """
    limits.validate()
    stdin_path = workdir / "stdin.txt"
    stdout_path = workdir / "stdout.txt"
    stderr_path = workdir / "stderr.txt"
    stdin_path.write_text(stdin_text, encoding="utf-8")

    mem = limits.memory_bytes

    def _apply_limits() -> None:
        resource.setrlimit(resource.RLIMIT_AS, (mem, mem))

    started = time.monotonic()
    with open(stdin_path, "rb") as fh_in, open(stdout_path, "wb") as fh_out, open(
        stderr_path, "wb"
    ) as fh_err:
        proc = subprocess.Popen(
            argv,
            stdin=fh_in,
            stdout=fh_out,
            stderr=fh_err,
            cwd=workdir,
            start_new_session=True,
            preexec_fn=_apply_limits,
        )
        timed_out = False
        try:
            proc.wait(timeout=limits.wall_time_ms / 1000.0)
        except subprocess.TimeoutExpired:
            timed_out = True
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            proc.wait()
    wall_ms = int((time.monotonic() - started) * 1000)

    stdout_text, _ = _read_capped(stdout_path, limits.max_stdout_bytes)
    stderr_text, stderr_over = _read_capped(stderr_path, limits.max_stderr_bytes)
    if stderr_over:
        stderr_text = _cut_at_line_boundary(stderr_text)

    if timed_out:
        status = "timeout"
        exit_code = None
    elif proc.returncode != 0:
        status = "runtime_error"
        exit_code = proc.returncode
    elif judge(stdout_text, expected_stdout):
        status = "accepted"
        exit_code = 0
    else:
        status = "wrong_answer"
        exit_code = 0

    return RunResult(
        status=status,
        stdout=stdout_text,
        stderr_raw=stderr_text,
        wall_time_ms=wall_ms,
        exit_code=exit_code,
        trace_truncated=stderr_over,
    )


def judge(actual_stdout: str, expected_stdout: str) -> bool:
    """Trailing-whitespace-insensitive exact match, judge style."""
    return _normalize(actual_stdout) == _normalize(expected_stdout)


def _normalize(text: str) -> list[str]:
    lines = [line.rstrip() for line in text.splitlines()]
    while lines and lines[-1] == "":
        lines.pop()
    return lines
