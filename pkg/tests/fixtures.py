"""Hand-simulated oracle fixtures.

Each fixture carries a program, its input, its expected stdout, and the
exact feedback steps a correct pipeline must compute. The step lists
were produced by hand: applying the documented instrumentation rules to
each source (or the tracer's per-line diff contract for interpreted
programs) and simulating the run manually. Tests compare pipeline output
against these frozen values; nothing here is derived from the code under
test.

Step tuples are (step, line, var, old, new) with lines numbered in the
original source.
"""

from __future__ import annotations

from dataclasses import dataclass

UNINIT = "<uninit>"


@dataclass(frozen=True)
class OracleFixture:
    name: str
    lang: str
    source: str
    stdin: str
    expected_stdout: str
    steps: list[tuple[int, int, str, str, str]]


CPP_SUM = OracleFixture(
    name="cpp_sum",
    lang="cpp",
    source="""\
#include <bits/stdc++.h>
using namespace std;
int main() {
    int n;
    cin >> n;
    int s = 0;
    for (int i = 1; i <= n; i++) {
        s += i;
    }
    cout << s << endl;
    return 0;
}
""",
    stdin="4\n",
    expected_stdout="10\n",
    steps=[
        (1, 6, "s", UNINIT, "0"),
        (2, 8, "s", "0", "1"),
        (3, 8, "s", "1", "3"),
        (4, 8, "s", "3", "6"),
        (5, 8, "s", "6", "10"),
    ],
)

C_ARITH = OracleFixture(
    name="c_arith",
    lang="c",
    source="""\
int main() {
    int a = 2;
    int b = 3;
    a = a * b;
    b = b - 1;
    printf("%d %d\\n", a, b);
    return 0;
}
""",
    stdin="",
    expected_stdout="6 2\n",
    steps=[
        (1, 2, "a", UNINIT, "2"),
        (2, 3, "b", UNINIT, "3"),
        (3, 4, "a", "2", "6"),
        (4, 5, "b", "3", "2"),
    ],
)

CPP_STRING = OracleFixture(
    name="cpp_string",
    lang="cpp",
    source="""\
#include <bits/stdc++.h>
using namespace std;
int main() {
    string word;
    cin >> word;
    string out = "";
    int i = 0;
    while (i < (int)word.size()) {
        out += word[i];
        i += 2;
    }
    cout << out << "\\n";
    return 0;
}
""",
    stdin="abcdef\n",
    expected_stdout="ace\n",
    steps=[
        (1, 6, "out", UNINIT, ""),
        (2, 7, "i", UNINIT, "0"),
        (3, 9, "out", "", "a"),
        (4, 10, "i", "0", "2"),
        (5, 9, "out", "a", "ac"),
        (6, 10, "i", "2", "4"),
        (7, 9, "out", "ac", "ace"),
        (8, 10, "i", "4", "6"),
    ],
)

CPP_FLAG = OracleFixture(
    name="cpp_flag",
    lang="cpp",
    source="""\
#include <bits/stdc++.h>
using namespace std;
int main() {
    long long x;
    cin >> x;
    long long y = x * 2;
    bool big = false;
    if (y > 100) {
        big = true;
    }
    cout << (big ? "BIG" : "SMALL") << endl;
    return 0;
}
""",
    stdin="60\n",
    expected_stdout="BIG\n",
    steps=[
        (1, 6, "y", UNINIT, "120"),
        (2, 7, "big", UNINIT, "0"),
        (3, 9, "big", "0", "1"),
    ],
)

CPP_COLLATZ = OracleFixture(
    name="cpp_collatz",
    lang="cpp",
    source="""\
#include <bits/stdc++.h>
using namespace std;
int main() {
    int n;
    cin >> n;
    int c = 0;
    while (n > 1) {
        if (n % 2 == 0) {
            n /= 2;
        } else {
            n = 3 * n + 1;
        }
        c++;
    }
    cout << c << endl;
    return 0;
}
""",
    stdin="6\n",
    expected_stdout="8\n",
    steps=[
        (1, 6, "c", UNINIT, "0"),
        (2, 9, "n", UNINIT, "3"),
        (3, 13, "c", "0", "1"),
        (4, 11, "n", "3", "10"),
        (5, 13, "c", "1", "2"),
        (6, 9, "n", "10", "5"),
        (7, 13, "c", "2", "3"),
        (8, 11, "n", "5", "16"),
        (9, 13, "c", "3", "4"),
        (10, 9, "n", "16", "8"),
        (11, 13, "c", "4", "5"),
        (12, 9, "n", "8", "4"),
        (13, 13, "c", "5", "6"),
        (14, 9, "n", "4", "2"),
        (15, 13, "c", "6", "7"),
        (16, 9, "n", "2", "1"),
        (17, 13, "c", "7", "8"),
    ],
)

PY_BASIC = OracleFixture(
    name="py_basic",
    lang="python",
    source="""\
a = 1
a = a + 2
print(a)
""",
    stdin="",
    expected_stdout="3\n",
    steps=[
        (1, 1, "a", UNINIT, "1"),
        (2, 2, "a", "1", "3"),
    ],
)

PY_LOOP = OracleFixture(
    name="py_loop",
    lang="python",
    source="""\
n = int(input())
s = 0
for i in range(1, n + 1):
    s = s + i
print(s)
""",
    stdin="4\n",
    expected_stdout="10\n",
    steps=[
        (1, 1, "n", UNINIT, "4"),
        (2, 2, "s", UNINIT, "0"),
        (3, 3, "i", UNINIT, "1"),
        (4, 4, "s", "0", "1"),
        (5, 3, "i", "1", "2"),
        (6, 4, "s", "1", "3"),
        (7, 3, "i", "2", "3"),
        (8, 4, "s", "3", "6"),
        (9, 3, "i", "3", "4"),
        (10, 4, "s", "6", "10"),
    ],
)

PY_UPPER = OracleFixture(
    name="py_upper",
    lang="python",
    source="""\
word = input()
out = ''
for ch in word:
    out = out + ch.upper()
print(out)
""",
    stdin="ab\n",
    expected_stdout="AB\n",
    steps=[
        (1, 1, "word", UNINIT, "'ab'"),
        (2, 2, "out", UNINIT, "''"),
        (3, 3, "ch", UNINIT, "'a'"),
        (4, 4, "out", "''", "'A'"),
        (5, 3, "ch", "'a'", "'b'"),
        (6, 4, "out", "'A'", "'AB'"),
    ],
)

PY_PRINT = OracleFixture(
    name="py_print",
    lang="python",
    source="print(7)\n",
    stdin="",
    expected_stdout="7\n",
    steps=[],
)

PY_ZERODIV = OracleFixture(
    name="py_zerodiv",
    lang="python",
    source="""\
x = 5
y = x - 5
z = x / y
print(z)
""",
    stdin="",
    expected_stdout="",
    steps=[
        (1, 1, "x", UNINIT, "5"),
        (2, 2, "y", UNINIT, "0"),
    ],
)

COMPILED_FIXTURES = [CPP_SUM, C_ARITH, CPP_STRING, CPP_FLAG, CPP_COLLATZ]
INTERPRETED_FIXTURES = [PY_BASIC, PY_LOOP, PY_UPPER, PY_PRINT, PY_ZERODIV]
ALL_FIXTURES = COMPILED_FIXTURES + INTERPRETED_FIXTURES
