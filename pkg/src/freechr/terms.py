"""Constraint domain values, expression terms, evaluation and one-sided matching.

Values are integers, booleans, symbols and tuples.  Terms are a small
expression language over those values.  ``eval_term`` is the bottom-up
evaluator, ``match_pattern`` instantiates head patterns against ground values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

SYMBOL_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


class EvalError(Exception):
    """Raised when a term cannot be evaluated.

    ``kind`` is one of ``UnboundVar``, ``TypeMismatch``, ``DivByZero``,
    ``Overflow``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message


# -- values ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IntVal:
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError(f"IntVal needs an int, got {self.value!r}")
        if not INT_MIN <= self.value <= INT_MAX:
            raise ValueError(f"integer out of 64-bit range: {self.value}")

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, slots=True)
class BoolVal:
    value: bool

    def __post_init__(self):
        if not isinstance(self.value, bool):
            raise TypeError(f"BoolVal needs a bool, got {self.value!r}")

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True, slots=True)
class SymVal:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not SYMBOL_RE.match(self.name):
            raise ValueError(f"invalid symbol name {self.name!r}")
        if self.name in RESERVED:
            raise ValueError(f"{self.name!r} is a reserved word")

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class TupleVal:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuples need at least two components")
        for item in self.items:
            if not isinstance(item, _VALUE_TYPES):
                raise TypeError(f"tuple component is not a value: {item!r}")

    def __str__(self):
        return "(" + ",".join(str(v) for v in self.items) + ")"


Value = Union[IntVal, BoolVal, SymVal, TupleVal]
_VALUE_TYPES = (IntVal, BoolVal, SymVal, TupleVal)

RESERVED = frozenset({"and", "or", "not", "div", "mod", "true", "false"})


def is_value(x) -> bool:
    return isinstance(x, _VALUE_TYPES)


def as_value(x) -> Value:
    """Lift a plain Python int/bool/str/tuple into a domain value.

    Values pass through unchanged, which lets embedded rule bodies return
    either form.
    """
    if isinstance(x, _VALUE_TYPES):
        return x
    if isinstance(x, bool):
        return BoolVal(x)
    if isinstance(x, int):
        return IntVal(x)
    if isinstance(x, str):
        return SymVal(x)
    if isinstance(x, (tuple, list)):
        return TupleVal(tuple(as_value(i) for i in x))
    raise TypeError(f"cannot convert {x!r} to a domain value")


_TAG_ORDER = {BoolVal: 0, IntVal: 1, SymVal: 2, TupleVal: 3}


def value_key(v: Value):
    """Total order over values, used for canonical multisets and dumps."""
    if isinstance(v, TupleVal):
        return (3, tuple(value_key(i) for i in v.items))
    if isinstance(v, SymVal):
        return (2, v.name)
    return (_TAG_ORDER[type(v)], v.value)


def render_value(v: Value) -> str:
    """Tagged rendering for machine output: ``int:6``, ``sym:a``, ``tuple:[...]``."""
    if isinstance(v, IntVal):
        return f"int:{v.value}"
    if isinstance(v, BoolVal):
        return "bool:true" if v.value else "bool:false"
    if isinstance(v, SymVal):
        return f"sym:{v.name}"
    return "tuple:[" + ",".join(render_value(i) for i in v.items) + "]"


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Lit:
    value: Value


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __post_init__(self):
        if not VAR_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Term"


ARITH_OPS = ("+", "-", "*", "div", "mod")
ORDER_OPS = ("<", "<=")
EQ_OPS = ("=", "!=")
BOOL_OPS = ("and", "or")
BINARY_OPS = ARITH_OPS + ORDER_OPS + EQ_OPS + BOOL_OPS


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: "Term"
    right: "Term"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class TupleTerm:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuple terms need at least two components")


Term = Union[Lit, Var, Neg, Not, BinOp, TupleTerm]
Substitution = Mapping[str, Value]


def _int(v: Value, op: str) -> int:
    if not isinstance(v, IntVal):
        raise EvalError("TypeMismatch", f"{op} expects integers, got {v}")
    return v.value


def _bool(v: Value, op: str) -> bool:
    if not isinstance(v, BoolVal):
        raise EvalError("TypeMismatch", f"{op} expects booleans, got {v}")
    return v.value


def _checked(n: int) -> IntVal:
    if not INT_MIN <= n <= INT_MAX:
        raise EvalError("Overflow", f"{n} does not fit in 64 bits")
    return IntVal(n)


def eval_term(t: Term, s: Substitution) -> Value:
    """Evaluate ``t`` under substitution ``s``.

    Integer division and modulo round towards negative infinity.  ``and`` and
    ``or`` evaluate both operands.
    """
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Var):
        try:
            return s[t.name]
        except KeyError:
            raise EvalError("UnboundVar", t.name) from None
    if isinstance(t, Neg):
        return _checked(-_int(eval_term(t.arg, s), "-"))
    if isinstance(t, Not):
        return BoolVal(not _bool(eval_term(t.arg, s), "not"))
    if isinstance(t, TupleTerm):
        return TupleVal(tuple(eval_term(i, s) for i in t.items))
    if not isinstance(t, BinOp):
        raise TypeError(f"not a term: {t!r}")

    op = t.op
    a = eval_term(t.left, s)
    b = eval_term(t.right, s)
    if op in EQ_OPS:
        return BoolVal((a == b) == (op == "="))
    if op in BOOL_OPS:
        x, y = _bool(a, op), _bool(b, op)
        return BoolVal(x and y if op == "and" else x or y)
    x, y = _int(a, op), _int(b, op)
    if op == "<":
        return BoolVal(x < y)
    if op == "<=":
        return BoolVal(x <= y)
    if op == "+":
        return _checked(x + y)
    if op == "-":
        return _checked(x - y)
    if op == "*":
        return _checked(x * y)
    if y == 0:
        raise EvalError("DivByZero", f"{x} {op} 0")
    return _checked(x // y if op == "div" else x % y)


def equiv_true(t: Term, s: Substitution) -> bool:
    v = eval_term(t, s)
    if not isinstance(v, BoolVal):
        raise EvalError("TypeMismatch", f"expected a boolean, got {v}")
    return v.value


def match_pattern(p: Term, v: Value, s: Substitution):
    """Extend ``s`` so that ``p`` instantiates to ``v``; ``None`` if impossible.

    Only ``Lit``, ``Var`` and ``TupleTerm`` may occur in ``p``.  A variable
    that is already bound must agree with ``v``.  The input mapping is never
    mutated.
    """
    out = dict(s)
    return out if _match(p, v, out) else None


def _match(p, v, out) -> bool:
    if isinstance(p, Var):
        bound = out.get(p.name)
        if bound is None:
            out[p.name] = v
            return True
        return bound == v
    if isinstance(p, Lit):
        return p.value == v
    if isinstance(p, TupleTerm):
        if not isinstance(v, TupleVal) or len(v.items) != len(p.items):
            return False
        return all(_match(pi, vi, out) for pi, vi in zip(p.items, v.items))
    raise ValueError(f"operator in head pattern: {p!r}")


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lit):
        return frozenset()
    if isinstance(t, (Neg, Not)):
        return free_vars(t.arg)
    if isinstance(t, BinOp):
        return free_vars(t.left) | free_vars(t.right)
    return frozenset().union(*(free_vars(i) for i in t.items))


def substitute(t: Term, s: Substitution) -> Term:
    """Replace bound variables of ``t`` by literals."""
    if isinstance(t, Var):
        return Lit(s[t.name]) if t.name in s else t
    if isinstance(t, Lit):
        return t
    if isinstance(t, Neg):
        return Neg(substitute(t.arg, s))
    if isinstance(t, Not):
        return Not(substitute(t.arg, s))
    if isinstance(t, BinOp):
        return BinOp(t.op, substitute(t.left, s), substitute(t.right, s))
    return TupleTerm(tuple(substitute(i, s) for i in t.items))
