#!/usr/bin/env python3
"""One-shot generator for the golden corpus and its frozen outputs.

Builds the 20-snippet corpus (five oracle programs, planted timeout,
wrong-answer, runtime-error, compile-error, zero-feedback, over-length
cases, and eight more surviving programs), runs the trace pipeline over
it, and writes corpus, annotated output, and stats under tests/data/.

The outputs are goldens: regenerate only when the pipeline's observable
contract changes, and re-inspect the diff by hand before committing.

Usage: python3 scripts/generate_golden.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from fixtures import COMPILED_FIXTURES  # noqa: E402

from corpusmill.feedback import RefineConfig  # noqa: E402
from corpusmill.pipeline import run_trace_pipeline  # noqa: E402
from corpusmill.records import CodeSnippet, dump_snippets, write_jsonl  # noqa: E402
from corpusmill.sandbox import Limits  # noqa: E402

HEADER = "#include <bits/stdc++.h>\nusing namespace std;\n"

TIMEOUT_LOOP = HEADER + "int main() {\n    while (true) {\n    }\n    return 0;\n}\n"

WRONG_ANSWER = HEADER + (
    "int main() {\n    int x = 40;\n    x += 2;\n    cout << x << endl;\n    return 0;\n}\n"
)

RUNTIME_DIV0 = HEADER + (
    "int main() {\n    int a = 10;\n    int b = 0;\n    cout << a / b << endl;\n"
    "    return 0;\n}\n"
)

COMPILE_ERROR = HEADER + "int main( {\n    return 0;\n}\n"

NO_FEEDBACK_COUT = HEADER + "int main() {\n    cout << 7 << endl;\n    return 0;\n}\n"

NO_FEEDBACK_PRINTF = '#include <stdio.h>\nint main() {\n    printf("hi\\n");\n    return 0;\n}\n'

COUNTDOWN = HEADER + (
    "int main() {\n    int t;\n    cin >> t;\n    int total = 0;\n"
    "    while (t > 0) {\n        total += t;\n        t--;\n    }\n"
    "    cout << total << endl;\n    return 0;\n}\n"
)

C_AVERAGE = (
    "int main() {\n    int a;\n    int b;\n"
    '    scanf("%d %d", &a, &b);\n'
    "    int sum = a + b;\n    int avg = sum / 2;\n"
    '    printf("%d\\n", avg);\n    return 0;\n}\n'
)

MAX3 = HEADER + (
    "int main() {\n    int a, b, c;\n    cin >> a >> b >> c;\n    int best = a;\n"
    "    if (b > best) {\n        best = b;\n    }\n"
    "    if (c > best) {\n        best = c;\n    }\n"
    "    cout << best << endl;\n    return 0;\n}\n"
)

FACTORIAL = HEADER + (
    "int main() {\n    int n;\n    cin >> n;\n    int f = 1;\n"
    "    for (int k = 1; k <= n; k++) {\n        f *= k;\n    }\n"
    "    cout << f << endl;\n    return 0;\n}\n"
)

GRADE = HEADER + (
    "int main() {\n    char grade = 'A';\n    int score;\n    cin >> score;\n"
    "    if (score < 90) {\n        grade = 'B';\n    }\n"
    "    if (score < 60) {\n        grade = 'F';\n    }\n"
    "    cout << grade << endl;\n    return 0;\n}\n"
)

DOUBLE_TAX = HEADER + (
    "int main() {\n    double price;\n    cin >> price;\n    double tax = price * 0.5;\n"
    "    double total = price + tax;\n    cout << total << endl;\n    return 0;\n}\n"
)

C_INCR_LOOP = HEADER + (
    "int main() {\n    int i = 0;\n    int sum = 0;\n"
    "    while (i < 5) {\n        sum += i;\n        i++;\n    }\n"
    '    printf("%d\\n", sum);\n    return 0;\n}\n'
)

BITOPS = HEADER + (
    "int main() {\n    int v;\n    cin >> v;\n    v <<= 1;\n    v |= 1;\n    v %= 100;\n"
    "    cout << v << endl;\n    return 0;\n}\n"
)


def too_long_source() -> str:
    pad = "\n".join(f"// ledger row {i:02d}: " + "-" * 50 for i in range(30))
    return HEADER + pad + "\n" + (
        "int main() {\n    int v = 1;\n    cout << v << endl;\n    return 0;\n}\n"
    )


def build_corpus() -> list[CodeSnippet]:
    snippets = [
        CodeSnippet(fx.name, fx.lang, fx.source, fx.stdin, fx.expected_stdout)
        for fx in COMPILED_FIXTURES
    ]
    snippets += [
        CodeSnippet("timeout_loop", "cpp", TIMEOUT_LOOP, "", ""),
        CodeSnippet("wrong_answer", "cpp", WRONG_ANSWER, "", "7\n"),
        CodeSnippet("runtime_div0", "cpp", RUNTIME_DIV0, "", "1\n"),
        CodeSnippet("compile_error", "cpp", COMPILE_ERROR, "", ""),
        CodeSnippet("no_feedback_cout", "cpp", NO_FEEDBACK_COUT, "", "7\n"),
        CodeSnippet("no_feedback_printf", "c", NO_FEEDBACK_PRINTF, "", "hi\n"),
        CodeSnippet("too_long_pad", "cpp", too_long_source(), "", "1\n"),
        CodeSnippet("cpp_countdown", "cpp", COUNTDOWN, "3\n", "6\n"),
        CodeSnippet("c_average", "c", C_AVERAGE, "8 4\n", "6\n"),
        CodeSnippet("cpp_max3", "cpp", MAX3, "2 9 5\n", "9\n"),
        CodeSnippet("cpp_factorial_cap", "cpp", FACTORIAL, "12\n", "479001600\n"),
        CodeSnippet("cpp_grade", "cpp", GRADE, "75\n", "B\n"),
        CodeSnippet("cpp_double", "cpp", DOUBLE_TAX, "10\n", "15\n"),
        CodeSnippet("c_incr_loop", "c", C_INCR_LOOP, "", "10\n"),
        CodeSnippet("cpp_bitops", "cpp", BITOPS, "37\n", "75\n"),
    ]
    assert len(snippets) == 20
    return snippets


def main() -> None:
    data_dir = REPO / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus()
    dump_snippets(corpus, data_dir / "golden_corpus.jsonl")

    annotated, stats = run_trace_pipeline(
        corpus,
        Limits(wall_time_ms=1500),
        RefineConfig(),
        mode="line",
        workers=8,
    )
    write_jsonl(data_dir / "golden_annotated.jsonl", (a.to_json() for a in annotated))
    golden_stats = stats.to_dict()
    golden_stats["toolchain"] = ""  # machine-specific, compared separately
    (data_dir / "golden_stats.json").write_text(
        json.dumps(golden_stats, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    print(f"annotated {stats.annotated} of {stats.ingested}")
    print("drops:", stats.drops)
    print("statuses:", stats.statuses)
    print("languages:", stats.languages)
    for record in annotated:
        print("=" * 72)
        print(record.id, f"steps={record.step_count}")
        print(record.annotated_source)


if __name__ == "__main__":
    main()
