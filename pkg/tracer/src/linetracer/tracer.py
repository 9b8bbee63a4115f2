"""Run a Python script under a line-level trace hook.

The traced program behaves as if launched with ``python script.py``: it
owns stdin and stdout untouched, and its exceptions produce the usual
traceback and a nonzero exit. On top of that, after each executed line
of the script's own file, every top-level local variable whose value
representation changed is reported on stderr as one wire event:

    ##ADC##<TAB><line><TAB><var><TAB><value>

Values are ``repr()``-rendered, truncated to 64 characters, with literal
tabs and newlines escaped as ``\\t`` and ``\\n``. When the event budget
runs out, the flag line ``##ADC##TRUNC`` is emitted once and tracing
stops while the program runs on.

Only frames executing the script's file are observed; names bound to
modules, functions, or classes and names starting with an underscore
are ignored so events stay deterministic (their representations embed
memory addresses). Failures of the tracer itself exit with code 70,
never with a code the program could produce.

Usage: linetracer [--max-events N] <source_path>
"""

from __future__ import annotations

import argparse
import sys
import traceback
import types

SENTINEL = "##ADC##"
TRUNCATION_FLAG = SENTINEL + "TRUNC"
VALUE_CAP = 64
DEFAULT_MAX_EVENTS = 10_000
INTERNAL_EXIT = 70

_SKIPPED_TYPES = (
    types.ModuleType,
    types.FunctionType,
    types.BuiltinFunctionType,
    types.MethodType,
    type,
)


def render_value(value: object) -> str:
    try:
        raw = repr(value)
    except Exception:
        raw = "<unrepresentable>"
    raw = raw[:VALUE_CAP]
    return raw.replace("\t", "\\t").replace("\n", "\\n")


class _FrameState:
    __slots__ = ("snapshot", "prev_line")

    def __init__(self, snapshot: dict[str, str]) -> None:
        self.snapshot = snapshot
        self.prev_line: int | None = None


class LineTracer:
    """sys.settrace hook confined to one file, emitting wire events."""

    def __init__(self, target_file: str, out, max_events: int) -> None:
        self.target_file = target_file
        self.out = out
        self.max_events = max_events
        self.emitted = 0
        self.exhausted = False
        self.internal_error: BaseException | None = None
        self._states: dict[int, _FrameState] = {}

    # -- wire output --------------------------------------------------------

    def _emit(self, line: int, var: str, value: str) -> None:
        if self.exhausted:
            return
        if self.emitted >= self.max_events:
            self.out.write(TRUNCATION_FLAG + "\n")
            self.out.flush()
            self.exhausted = True
            sys.settrace(None)
            return
        self.out.write(f"{SENTINEL}\t{line}\t{var}\t{value}\n")
        self.out.flush()
        self.emitted += 1

    # -- snapshots ----------------------------------------------------------

    @staticmethod
    def _observable(name: str, value: object) -> bool:
        if name.startswith("_"):
            return False
        return not isinstance(value, _SKIPPED_TYPES)

    def _snapshot(self, frame) -> dict[str, str]:
        return {
            name: render_value(value)
            for name, value in frame.f_locals.items()
            if self._observable(name, value)
        }

    def _diff_and_emit(self, frame, state: _FrameState, at_line: int) -> None:
        current = self._snapshot(frame)
        for name, value in current.items():
            if state.snapshot.get(name) != value:
                self._emit(at_line, name, value)
        state.snapshot = current

    # -- trace callbacks ----------------------------------------------------

    def global_trace(self, frame, event, arg):
        if event != "call" or frame.f_code.co_filename != self.target_file:
            return None
        try:
            self._states[id(frame)] = _FrameState(self._snapshot(frame))
        except Exception as exc:  # never let tracer bugs look like the program
            self._abort(exc)
            return None
        return self.local_trace

    def local_trace(self, frame, event, arg):
        try:
            state = self._states.get(id(frame))
            if state is None:
                return self.local_trace
            if event == "line":
                at_line = state.prev_line if state.prev_line is not None else frame.f_lineno
                self._diff_and_emit(frame, state, at_line)
                state.prev_line = frame.f_lineno
            elif event == "return":
                at_line = state.prev_line if state.prev_line is not None else frame.f_lineno
                self._diff_and_emit(frame, state, at_line)
                del self._states[id(frame)]
        except Exception as exc:
            self._abort(exc)
        return self.local_trace

    def _abort(self, exc: BaseException) -> None:
        self.internal_error = exc
        sys.settrace(None)


def trace_program(source_path: str, max_events: int, stderr=None) -> int:
    """Execute source_path under the hook; returns the process exit code."""
    err = stderr if stderr is not None else sys.stderr
    try:
        with open(source_path, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        err.write(f"linetracer: cannot read {source_path}: {exc}\n")
        return INTERNAL_EXIT

    try:
        code = compile(source, source_path, "exec")
    except SyntaxError:
        traceback.print_exc(file=err)
        return 1

    module_globals = {
        "__name__": "__main__",
        "__file__": source_path,
        "__builtins__": __builtins__,
    }
    import os

    sys.argv = [source_path]
    sys.path.insert(0, os.path.dirname(os.path.abspath(source_path)))

    tracer = LineTracer(source_path, err, max_events)
    exit_code = 0
    sys.settrace(tracer.global_trace)
    try:
        exec(code, module_globals)
    except SystemExit as exc:
        if exc.code is None:
            exit_code = 0
        elif isinstance(exc.code, int):
            exit_code = exc.code
        else:
            err.write(f"{exc.code}\n")
            exit_code = 1
    except BaseException:
        sys.settrace(None)
        traceback.print_exc(file=err)
        exit_code = 1
    finally:
        sys.settrace(None)

    if tracer.internal_error is not None:
        err.write(f"linetracer: internal failure: {tracer.internal_error!r}\n")
        return INTERNAL_EXIT
    return exit_code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="linetracer",
        description="Run a Python script, reporting variable changes on stderr.",
    )
    parser.add_argument("--max-events", type=int, default=DEFAULT_MAX_EVENTS)
    parser.add_argument("source_path")
    args = parser.parse_args(argv)
    if args.max_events < 1:
        parser.error("--max-events must be >= 1")
    return trace_program(args.source_path, args.max_events)


if __name__ == "__main__":
    sys.exit(main())
