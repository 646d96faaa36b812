import sys
from pathlib import Path

import pytest

from freechr.frontend import compile_program, parse_program
from freechr.program import HeadPredicate, compose, make_rule
from freechr.terms import IntVal, TupleVal

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "freechr" / "examples"


def gcd_program():
    """zero ⊙ subtract, written directly with Python functions."""
    zero = make_rule(
        "zero",
        [],
        [HeadPredicate(lambda n: n == IntVal(0), "n=0")],
        lambda n: True,
        lambda n: [],
        "true",
        "[]",
    )
    subtract = make_rule(
        "subtract",
        [HeadPredicate(lambda n: isinstance(n, IntVal) and 0 < n.value, "0<n")],
        [HeadPredicate(lambda m: isinstance(m, IntVal) and 0 < m.value, "0<m")],
        lambda n, m: n.value <= m.value,
        lambda n, m: [m.value - n.value],
        "n<=m",
        "[m-n]",
    )
    return compose(zero, subtract)


def _edge(v):
    return isinstance(v, TupleVal) and len(v.items) == 2


def trans_program():
    return make_rule(
        "trans",
        [HeadPredicate(_edge, "(x,y)"), HeadPredicate(_edge, "(y,z)")],
        [],
        lambda e1, e2: e1.items[1] == e2.items[0] and e1.items[0] != e2.items[1],
        lambda e1, e2: [(e1.items[0], e2.items[1])],
    )


def load_example(name):
    return compile_program(parse_program((EXAMPLES / name).read_text()))


@pytest.fixture
def gcd():
    return gcd_program()


@pytest.fixture
def trans():
    return trans_program()


def pytest_terminal_summary(terminalreporter):
    results = sys.modules.get("test_acceptance")
    if results is None or not results.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results.RESULTS):
        terminalreporter.write_line(results.RESULTS[n])
