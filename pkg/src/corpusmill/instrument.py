"""Regex-based C/C++ source rewriting for variable-change tracing.

``instrument`` prepends a fixed prelude defining the ``ADC_TRACE`` helper
and appends a trace call at the end of every line that holds exactly one
matched mutation statement, so the rewritten program emits one wire event
per mutation to stderr:

    ##ADC##<TAB><line><TAB><var><TAB><value>

Line numbers in the injected calls are literal: they refer to the line
numbering of the input source, which survives unchanged because trace
calls share the physical line of their statement and the prelude is only
ever prepended.

Matched statement classes (one statement per line, nothing after the
semicolon):

* scalar declarations with initializer, for a fixed list of types
* simple assignments ``x = expr;``
* compound assignments ``x op= expr;``
* ``x++; ++x; x--; --x;`` as full statements

Everything else (multi-declarations, container writes, ``for`` headers,
macros, struct members, global-scope initializers, lines inside comments
or string literals) is deliberately left alone.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

SENTINEL = "##ADC##"

# One helper per physical line so the prelude length stays a constant.
PRELUDE = (
    "#include <bits/stdc++.h>\n"
    "static void __adc_emit(int __l, const char* __n, const std::string& __r) {"
    " std::string __o; size_t __m = __r.size() < 64 ? __r.size() : 64;"
    " for (size_t __i = 0; __i < __m; ++__i) { char __c = __r[__i];"
    " if (__c == '\\t') __o += \"\\\\t\"; else if (__c == '\\n') __o += \"\\\\n\"; else __o += __c; }"
    ' std::fprintf(stderr, "##ADC##\\t%d\\t%s\\t%s\\n", __l, __n, __o.c_str()); }\n'
    "template <class T> static auto __adc_trace(int __l, const char* __n, const T& __v, int)"
    " -> decltype(std::declval<std::ostringstream&>() << __v, void())"
    " { std::ostringstream __s; __s << __v; __adc_emit(__l, __n, __s.str()); }\n"
    "template <class T> static void __adc_trace(int, const char*, const T&, long) {}\n"
    "#define ADC_TRACE(l_, n_, v_) __adc_trace((l_), (n_), (v_), 0)\n"
)

PRELUDE_LINES = len(PRELUDE.splitlines())

INCLUDE_ALL_HEADERS = "#include <bits/stdc++.h>"
USING_NAMESPACE_STD = "using namespace std;"

_INCLUDE_RE = re.compile(r"^\s*#\s*include\s*<bits/stdc\+\+\.h>", re.MULTILINE)
_USING_RE = re.compile(r"^\s*using\s+namespace\s+std\s*;", re.MULTILINE)

_IDENT = r"[A-Za-z_]\w*"

_DECL_TYPES = r"(?:long\s+long|long|unsigned|int|float|double|char|bool|(?:std\s*::\s*)?string)"

_DECL_RE = re.compile(
    rf"^\s*{_DECL_TYPES}\s+({_IDENT})\s*=\s*[^;]+;\s*$"
)
_ASSIGN_RE = re.compile(rf"^\s*({_IDENT})\s*=(?![=])\s*[^;]+;\s*$")
_COMPOUND_RE = re.compile(
    rf"^\s*({_IDENT})\s*(?:<<|>>|[-+*/%&|^])=\s*[^;]+;\s*$"
)
_INCDEC_RE = re.compile(
    rf"^\s*(?:(?:\+\+|--)\s*({_IDENT})|({_IDENT})\s*(?:\+\+|--))\s*;\s*$"
)

# Identifiers that can never be a traced variable when they appear in
# LHS position (guards against `return x;`-shaped false positives).
_KEYWORDS = frozenset(
    """if else for while do switch case default return break continue goto
    new delete sizeof operator using namespace template typename struct
    class union enum public private protected static const void auto this
    throw try catch true false""".split()
)

_TYPE_BRACE_KEYWORDS = re.compile(
    r"\b(?:struct|class|union|enum|namespace|extern)\b"
)

_TRACE_CALL_RE = re.compile(rf' ADC_TRACE\(\d+, "{_IDENT}", {_IDENT}\);$')


@dataclass(frozen=True)
class InstrumentedSource:
    text: str
    original_line_count: int
    instrumented_vars: frozenset[tuple[int, str]]


def patch_defects(source: str) -> str:
    """Prepend the all-headers include and the namespace directive when absent.

    When only the namespace directive is missing, the include is prepended
    as well: a using-directive is only legal once namespace std has been
    declared, and a duplicate include is harmless.
    """
    has_include = bool(_INCLUDE_RE.search(source))
    has_using = bool(_USING_RE.search(source))
    if has_include and has_using:
        return source
    if has_using:
        prefix = INCLUDE_ALL_HEADERS + "\n"
    else:
        prefix = INCLUDE_ALL_HEADERS + "\n" + USING_NAMESPACE_STD + "\n"
    return prefix + source


def _line_eligibility(source: str) -> list[bool]:
    """One flag per line: may this line's text be matched for instrumentation?

    A single pass tracks comments, string/char literals, preprocessor
    lines, and a brace-context stack, so only lines that start in plain
    code inside an executable block are eligible.
    """
    lines = source.split("\n")
    eligible = [False] * len(lines)

    stack: list[str] = []  # "block" | "type" | "init"
    state = "code"  # code | block_comment | string | char | raw
    raw_end = ""
    recent = ""  # code chars since last ; { or }, for classifying '{'

    for idx, line in enumerate(lines):
        if state == "code" and line.lstrip().startswith("#"):
            # Preprocessor line: never instrumented, never changes state.
            continue
        eligible[idx] = state == "code" and bool(stack) and stack[-1] == "block"

        i = 0
        n = len(line)
        while i < n:
            c = line[i]
            if state == "block_comment":
                if c == "*" and i + 1 < n and line[i + 1] == "/":
                    state = "code"
                    i += 2
                    continue
                i += 1
                continue
            if state == "string":
                if c == "\\":
                    i += 2
                    continue
                if c == '"':
                    state = "code"
                i += 1
                continue
            if state == "char":
                if c == "\\":
                    i += 2
                    continue
                if c == "'":
                    state = "code"
                i += 1
                continue
            if state == "raw":
                end = line.find(raw_end, i)
                if end == -1:
                    i = n
                else:
                    state = "code"
                    i = end + len(raw_end)
                continue

            # state == "code"
            if c == "/" and i + 1 < n and line[i + 1] == "/":
                break  # line comment: rest of line is inert
            if c == "/" and i + 1 < n and line[i + 1] == "*":
                state = "block_comment"
                i += 2
                continue
            if c == '"':
                if (
                    i > 0
                    and line[i - 1] == "R"
                    and (i < 2 or not (line[i - 2].isalnum() or line[i - 2] == "_"))
                ):
                    m = re.match(r'"([^()\s\\]{0,16})\(', line[i:])
                    if m:
                        state = "raw"
                        raw_end = ")" + m.group(1) + '"'
                        i += m.end()
                        continue
                state = "string"
                i += 1
                continue
            if c == "'":
                state = "char"
                i += 1
                continue
            if c == "{":
                tail = recent.rstrip()
                if stack and stack[-1] == "init":
                    stack.append("init")
                elif tail.endswith(("=", ",", "(")):
                    stack.append("init")
                elif _TYPE_BRACE_KEYWORDS.search(tail):
                    stack.append("type")
                else:
                    stack.append("block")
                recent = ""
                i += 1
                continue
            if c == "}":
                if stack:
                    stack.pop()
                recent = ""
                i += 1
                continue
            if c == ";":
                recent = ""
                i += 1
                continue
            recent += c
            i += 1

        # Unescaped newline terminates string/char literals (the code is
        # ill-formed anyway); backslash continuations were consumed above.
        if state in ("string", "char"):
            state = "code"

    return eligible


def _match_mutation(line: str) -> str | None:
    """Return the mutated variable name if the line is one traced statement."""
    m = _DECL_RE.match(line)
    if m and m.group(1) not in _KEYWORDS:
        return m.group(1)
    m = _COMPOUND_RE.match(line)
    if m and m.group(1) not in _KEYWORDS:
        return m.group(1)
    m = _INCDEC_RE.match(line)
    if m:
        name = m.group(1) or m.group(2)
        if name not in _KEYWORDS:
            return name
    m = _ASSIGN_RE.match(line)
    if m and m.group(1) not in _KEYWORDS:
        return m.group(1)
    return None


def instrument(source: str, lang: str) -> InstrumentedSource:
    """Rewrite defect-patched C/C++ source to emit trace events.

    Non-matching lines are returned byte-identical; matched lines gain a
    trailing ``ADC_TRACE(line, "var", var);`` call carrying that line's
    1-based number.
    """
    if lang not in ("c", "cpp"):
        raise ValueError(f"instrument only handles c/cpp, got {lang!r}")
    eligible = _line_eligibility(source)
    lines = source.split("\n")
    out_lines = []
    traced: set[tuple[int, str]] = set()
    for idx, line in enumerate(lines):
        lineno = idx + 1
        var = _match_mutation(line) if eligible[idx] else None
        if var is None:
            out_lines.append(line)
        else:
            out_lines.append(f'{line} ADC_TRACE({lineno}, "{var}", {var});')
            traced.add((lineno, var))
    return InstrumentedSource(
        text=PRELUDE + "\n".join(out_lines),
        original_line_count=len(source.splitlines()),
        instrumented_vars=frozenset(traced),
    )


def strip_instrumentation(text: str) -> str:
    """Inverse of ``instrument``: drop the prelude and every injected call."""
    lines = text.split("\n")[PRELUDE_LINES:]
    return "\n".join(_TRACE_CALL_RE.sub("", line) for line in lines)
