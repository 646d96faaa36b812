import pytest
from hypothesis import given, strategies as st

from freechr.terms import (
    BinOp,
    BoolVal,
    EvalError,
    IntVal,
    Lit,
    Neg,
    Not,
    SymVal,
    TupleTerm,
    TupleVal,
    Var,
    as_value,
    equiv_true,
    eval_term,
    free_vars,
    match_pattern,
    render_value,
    substitute,
)

a, b, c = SymVal("a"), SymVal("b"), SymVal("c")


def test_eval_subtraction():
    t = BinOp("-", Var("M"), Var("N"))
    assert eval_term(t, {"N": IntVal(3), "M": IntVal(6)}) == IntVal(3)


def test_eval_literal():
    assert eval_term(Lit(IntVal(0)), {}) == IntVal(0)


def test_div_by_zero():
    with pytest.raises(EvalError) as e:
        eval_term(BinOp("div", Lit(IntVal(1)), Lit(IntVal(0))), {})
    assert e.value.kind == "DivByZero"


def test_eval_conjunction_false():
    t = BinOp(
        "and",
        BinOp("<", Lit(IntVal(0)), Var("N")),
        BinOp("<=", Var("N"), Var("M")),
    )
    # 0 < 9 holds, 9 <= 6 does not
    assert eval_term(t, {"N": IntVal(9), "M": IntVal(6)}) == BoolVal(False)


@pytest.mark.parametrize(
    "term, expected",
    [
        (BinOp("mod", Lit(IntVal(-7)), Lit(IntVal(3))), IntVal(2)),
        (BinOp("div", Lit(IntVal(-7)), Lit(IntVal(2))), IntVal(-4)),
        (BinOp("*", Lit(IntVal(6)), Lit(IntVal(7))), IntVal(42)),
        (Neg(Lit(IntVal(5))), IntVal(-5)),
        (Not(Lit(BoolVal(False))), BoolVal(True)),
        (BinOp("or", Lit(BoolVal(False)), Lit(BoolVal(True))), BoolVal(True)),
        (TupleTerm((Lit(IntVal(1)), Lit(a))), TupleVal((IntVal(1), a))),
        (BinOp("=", Lit(a), Lit(a)), BoolVal(True)),
        (BinOp("!=", Lit(IntVal(1)), Lit(BoolVal(True))), BoolVal(True)),
    ],
)
def test_eval_table(term, expected):
    assert eval_term(term, {}) == expected


@pytest.mark.parametrize(
    "term, kind",
    [
        (Var("X"), "UnboundVar"),
        (BinOp("+", Lit(IntVal(1)), Lit(a)), "TypeMismatch"),
        (BinOp("and", Lit(IntVal(1)), Lit(BoolVal(True))), "TypeMismatch"),
        (BinOp("<", Lit(a), Lit(b)), "TypeMismatch"),
        (BinOp("mod", Lit(IntVal(1)), Lit(IntVal(0))), "DivByZero"),
        (BinOp("+", Lit(IntVal(2**63 - 1)), Lit(IntVal(1))), "Overflow"),
        (Neg(Lit(IntVal(-(2**63)))), "Overflow"),
    ],
)
def test_eval_errors(term, kind):
    with pytest.raises(EvalError) as e:
        eval_term(term, {})
    assert e.value.kind == kind


def test_strict_boolean_operators():
    # both operands are evaluated, so an error on the right surfaces
    t = BinOp("or", Lit(BoolVal(True)), Var("X"))
    with pytest.raises(EvalError):
        eval_term(t, {})


def test_equiv_true():
    assert equiv_true(Lit(BoolVal(True)), {}) is True
    assert equiv_true(BinOp("!=", Var("X"), Var("Z")), {"X": a, "Z": c}) is True
    with pytest.raises(EvalError) as e:
        equiv_true(Lit(IntVal(1)), {})
    assert e.value.kind == "TypeMismatch"


def test_match_pattern():
    p = TupleTerm((Var("X"), Var("Y")))
    assert match_pattern(p, TupleVal((a, b)), {}) == {"X": a, "Y": b}
    q = TupleTerm((Var("Y"), Var("Z")))
    assert match_pattern(q, TupleVal((b, c)), {"Y": b}) == {"Y": b, "Z": c}
    assert match_pattern(q, TupleVal((a, c)), {"Y": b}) is None
    assert match_pattern(Lit(IntVal(0)), IntVal(3), {}) is None
    assert match_pattern(TupleTerm((Var("X"), Var("X"))), TupleVal((a, a)), {}) == {"X": a}
    assert match_pattern(TupleTerm((Var("X"), Var("X"))), TupleVal((a, b)), {}) is None
    assert match_pattern(p, IntVal(3), {}) is None


def test_match_does_not_mutate():
    s = {"Y": b}
    match_pattern(TupleTerm((Var("Y"), Var("Z"))), TupleVal((b, c)), s)
    assert s == {"Y": b}


def test_free_vars():
    assert free_vars(BinOp("-", Var("M"), Var("N"))) == {"M", "N"}
    assert free_vars(Lit(IntVal(0))) == set()
    assert free_vars(TupleTerm((Var("X"), Var("X")))) == {"X"}


def test_value_invariants():
    with pytest.raises(ValueError):
        TupleVal((IntVal(1),))
    with pytest.raises(ValueError):
        SymVal("Abc")
    with pytest.raises(ValueError):
        SymVal("and")
    with pytest.raises(ValueError):
        Var("x")
    with pytest.raises(TypeError):
        IntVal(True)
    assert IntVal(1) != BoolVal(True)


def test_as_value_and_render():
    v = as_value((1, "a", (True, 2)))
    assert v == TupleVal((IntVal(1), a, TupleVal((BoolVal(True), IntVal(2)))))
    assert render_value(v) == "tuple:[int:1,sym:a,tuple:[bool:true,int:2]]"
    assert str(v) == "(1,a,(true,2))"


# -- properties


values = st.recursive(
    st.one_of(
        st.integers(-50, 50).map(IntVal),
        st.booleans().map(BoolVal),
        st.sampled_from(["a", "b", "c"]).map(SymVal),
    ),
    lambda inner: st.lists(inner, min_size=2, max_size=3).map(lambda xs: TupleVal(tuple(xs))),
    max_leaves=6,
)

patterns = st.recursive(
    st.one_of(values.map(Lit), st.sampled_from(["X", "Y", "Z"]).map(Var)),
    lambda inner: st.lists(inner, min_size=2, max_size=3).map(lambda xs: TupleTerm(tuple(xs))),
    max_leaves=6,
)

int_terms = st.recursive(
    st.one_of(st.integers(-20, 20).map(lambda n: Lit(IntVal(n))), st.sampled_from(["X", "Y"]).map(Var)),
    lambda inner: st.one_of(
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "div", "mod"]), inner, inner),
        st.builds(Neg, inner),
    ),
    max_leaves=8,
)


@given(patterns, values)
def test_match_roundtrip(p, v):
    s = match_pattern(p, v, {})
    if s is not None:
        assert free_vars(p) <= s.keys()
        assert eval_term(p, s) == v
        assert eval_term(substitute(p, s), {}) == v


@given(int_terms, st.dictionaries(st.sampled_from(["X", "Y", "Q"]), st.integers(-5, 5).map(IntVal)))
def test_ground_terms_ignore_substitution(t, s):
    if free_vars(t):
        return

    def ev(sub):
        try:
            return eval_term(t, sub)
        except EvalError as e:
            return e.kind

    assert ev(s) == ev({})
    assert ev(s) == ev(s)


@given(int_terms, st.integers(-5, 5), st.integers(-5, 5))
def test_eval_matches_python_arithmetic(t, x, y):
    def py(u):
        if isinstance(u, Lit):
            return u.value.value
        if isinstance(u, Var):
            return {"X": x, "Y": y}[u.name]
        if isinstance(u, Neg):
            return -py(u.arg)
        l, r = py(u.left), py(u.right)
        if u.op in ("div", "mod") and r == 0:
            raise ZeroDivisionError
        return {"+": l + r, "-": l - r, "*": l * r}.get(u.op) if u.op not in ("div", "mod") else (
            l // r if u.op == "div" else l % r
        )

    try:
        expected = IntVal(py(t))
    except ZeroDivisionError:
        with pytest.raises(EvalError):
            eval_term(t, {"X": IntVal(x), "Y": IntVal(y)})
        return
    assert eval_term(t, {"X": IntVal(x), "Y": IntVal(y)}) == expected
