"""Textual ground-CHR dialect: parser, pretty printer, compiler to FreeCHR.

    program  := { rule }
    rule     := NAME "@" heads arrow [ guard "|" ] body ";"
    heads    := patterns [ "\\" patterns ]
    arrow    := "<=>" | "==>"
    pattern  := INT | SYMBOL | VAR | "(" pattern { "," pattern } ")"
    guard    := expr { "," expr }
    body     := [ expr { "," expr } ]

``%`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

from .classic import ClassicRule
from .program import HeadPredicate, compose_all, make_rule
from .terms import (
    BinOp,
    BoolVal,
    IntVal,
    Lit,
    Neg,
    Not,
    RESERVED,
    SymVal,
    TupleTerm,
    TupleVal,
    Var,
    equiv_true,
    eval_term,
    match_pattern,
)

TRUE = Lit(BoolVal(True))


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class ValidationError(Exception):
    """Semantic error: ``DuplicateRuleName``, ``BothHeadsEmpty`` or ``UnboundBodyVar``."""

    def __init__(self, kind: str, rule: str, line: int = 0, column: int = 0, detail: str = ""):
        msg = f"{kind} in rule {rule!r}"
        if detail:
            msg += f": {detail}"
        if line:
            msg = f"{line}:{column}: {msg}"
        super().__init__(msg)
        self.kind = kind
        self.rule = rule
        self.line = line
        self.column = column


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<op><=>|==>|<=|=<|>=|!=|[@\\,;|()<>=+\-*])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = pos + tok.rfind("\n") + 1
        else:
            if kind == "name" and tok in RESERVED:
                kind = "op"
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class SourceProgram:
    rules: list
    spans: list = field(default_factory=list)  # (line, column) of each rule name
    path: str | None = None


# binary operator precedence, loosest first
_LEVELS = [("or",), ("and",), ("<", "<=", "=<", ">", ">=", "=", "!="), ("+", "-"), ("*", "div", "mod")]
_COMPARISON = 2


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(tok.line, tok.col, f"{msg}, found {found!r}")

    def at(self, *texts) -> bool:
        return self.tok.kind == "op" and self.tok.text in texts

    def expect(self, text):
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    # -- rules

    def program(self) -> SourceProgram:
        rules, spans = [], []
        while self.tok.kind != "eof":
            start = self.tok
            rules.append(self.rule())
            spans.append((start.line, start.col))
        return SourceProgram(rules, spans)

    def rule(self) -> ClassicRule:
        if self.tok.kind != "name":
            raise self.error("expected a rule name")
        name_tok = self.advance()
        self.expect("@")
        first = self.patterns()
        second = None
        if self.at("\\"):
            self.advance()
            second = self.patterns()
        if not self.at("<=>", "==>"):
            raise self.error("expected '<=>' or '==>'")
        arrow = self.advance()
        if arrow.text == "==>" and second is not None:
            raise ParseError(arrow.line, arrow.col, "'\\' is not allowed in a propagation rule")
        if second is not None:
            kept, removed = first, second
        elif arrow.text == "==>":
            kept, removed = first, []
        else:
            kept, removed = [], first
        if not kept and not removed:
            raise ValidationError("BothHeadsEmpty", name_tok.text, name_tok.line, name_tok.col)

        exprs = self.expr_list()
        if self.at("|"):
            bar = self.advance()
            if not exprs:
                raise ParseError(bar.line, bar.col, "empty guard before '|'")
            guard = exprs[0]
            for e in exprs[1:]:
                guard = BinOp("and", guard, e)
            body = self.expr_list()
        else:
            guard, body = TRUE, exprs
        self.expect(";")
        return ClassicRule(name_tok.text, tuple(kept), tuple(removed), guard, tuple(body))

    def patterns(self) -> list:
        # an arrow directly after '@' means the head is empty
        if self.at("<=>", "==>"):
            return []
        out = [self.pattern()]
        while self.at(","):
            self.advance()
            out.append(self.pattern())
        return out

    def pattern(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Lit(_int_value(tok))
        if self.at("-") and self.toks[self.i + 1].kind == "int":
            self.advance()
            return Lit(_int_value(self.advance(), negative=True))
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        if tok.kind == "name":
            self.advance()
            return Lit(SymVal(tok.text))
        if self.at("true", "false"):
            self.advance()
            return Lit(BoolVal(tok.text == "true"))
        if self.at("("):
            self.advance()
            items = [self.pattern()]
            while self.at(","):
                self.advance()
                items.append(self.pattern())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return TupleTerm(tuple(items))
        raise self.error("expected a head pattern")

    # -- expressions

    def expr_list(self) -> list:
        if self.at(";", "|"):
            return []
        out = [self.expr()]
        while self.at(","):
            self.advance()
            out.append(self.expr())
        return out

    def expr(self, level=0):
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = _LEVELS[level]
        while self.at(*ops):
            op = self.advance()
            right = self.expr(level + 1)
            left = _binop(op.text, left, right)
            if level == _COMPARISON and self.at(*ops):
                raise self.error("comparison operators do not chain")
        return left

    def unary(self):
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        if self.at("not"):
            self.advance()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return Lit(_int_value(tok))
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        if tok.kind == "name":
            self.advance()
            return Lit(SymVal(tok.text))
        if self.at("true", "false"):
            self.advance()
            return Lit(BoolVal(tok.text == "true"))
        if self.at("("):
            self.advance()
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect(")")
            return items[0] if len(items) == 1 else TupleTerm(tuple(items))
        raise self.error("expected an expression")


def _int_value(tok: Token, negative=False) -> IntVal:
    n = -int(tok.text) if negative else int(tok.text)
    try:
        return IntVal(n)
    except ValueError:
        raise ParseError(tok.line, tok.col, "integer literal out of 64-bit range") from None


def _binop(op, left, right):
    if op == "=<":
        op = "<="
    if op == ">":
        return BinOp("<", right, left)
    if op == ">=":
        return BinOp("<=", right, left)
    return BinOp(op, left, right)


def parse_program(text: str, path: str | None = None) -> SourceProgram:
    """Parse and validate a program.

    Raises ``ParseError`` for syntax errors and ``ValidationError`` for
    duplicate rule names, rules without heads and unbound guard/body variables.
    """
    sp = _Parser(text).program()
    sp.path = path
    seen = set()
    for r, (line, col) in zip(sp.rules, sp.spans):
        if r.name in seen:
            raise ValidationError("DuplicateRuleName", r.name, line, col)
        seen.add(r.name)
        unbound = r.unbound_vars()
        if unbound:
            raise ValidationError("UnboundBodyVar", r.name, line, col, ", ".join(sorted(unbound)))
    return sp


def parse_values(text: str) -> list:
    """Parse a comma-separated list of ground values, e.g. ``6,9`` or ``(a,b),(b,c)``."""
    p = _Parser(text)
    if p.tok.kind == "eof":
        return []
    out = [_ground(p.pattern(), p)]
    while p.at(","):
        p.advance()
        out.append(_ground(p.pattern(), p))
    if p.tok.kind != "eof":
        raise p.error("expected ',' or end of input")
    return out


def _ground(t, p):
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, TupleTerm):
        return TupleVal(tuple(_ground(i, p) for i in t.items))
    raise p.error(f"variable {t.name} in a ground value", p.toks[p.i - 1])


# -- pretty printing ---------------------------------------------------------

_PREC = {"or": 1, "and": 2, "<": 3, "<=": 3, "=": 3, "!=": 3, "+": 4, "-": 4, "*": 5, "div": 5, "mod": 5}
_SPACED = {"or", "and", "div", "mod"}


def format_term(t, prec: int = 0) -> str:
    if isinstance(t, Lit):
        return str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, TupleTerm):
        return "(" + ", ".join(format_term(i) for i in t.items) + ")"
    if isinstance(t, Neg):
        return "-" + format_term(t.arg, 6)
    if isinstance(t, Not):
        return "not " + format_term(t.arg, 6)
    p = _PREC[t.op]
    # left-associative; comparisons do not associate at all
    left = format_term(t.left, p + 1 if p == 3 else p)
    right = format_term(t.right, p + 1)
    op = f" {t.op} " if t.op in _SPACED else t.op
    s = f"{left}{op}{right}"
    return f"({s})" if p < prec else s


def _conjuncts(g) -> list:
    if isinstance(g, BinOp) and g.op == "and":
        return _conjuncts(g.left) + [g.right]
    return [g]


def format_rule(r: ClassicRule) -> str:
    pats = lambda ps: ", ".join(format_term(p) for p in ps)
    if not r.removed:
        head = f"{pats(r.kept)} ==>"
    elif not r.kept:
        head = f"{pats(r.removed)} <=>"
    else:
        head = f"{pats(r.kept)} \\ {pats(r.removed)} <=>"
    guard = ""
    if r.guard != TRUE:
        guard = " " + ", ".join(format_term(g, 1) for g in _conjuncts(r.guard)) + " |"
    body = ", ".join(format_term(b, 1) for b in r.body)
    return f"{r.name} @ {head}{guard} {body};".replace("  ", " ").replace(" ;", ";")


def format_program(sp) -> str:
    rules = sp.rules if isinstance(sp, SourceProgram) else sp
    return "\n".join(format_rule(r) for r in rules) + "\n"


# -- compilation -------------------------------------------------------------


def joint_match(heads, values):
    sigma = {}
    for p, v in zip(heads, values):
        sigma = match_pattern(p, v, sigma)
        if sigma is None:
            return None
    return sigma


def _head_predicate(p) -> HeadPredicate:
    def test(v):
        return match_pattern(p, v, {}) is not None

    return HeadPredicate(test, format_term(p))


def compile_rule(r: ClassicRule):
    heads = r.heads

    def guard(*values):
        sigma = joint_match(heads, values)
        return sigma is not None and equiv_true(r.guard, sigma)

    def body(*values):
        sigma = joint_match(heads, values)
        return tuple(eval_term(b, sigma) for b in r.body)

    guard_desc = "match(" + ", ".join(format_term(h) for h in heads) + ")"
    if r.guard != TRUE:
        guard_desc += " and " + format_term(r.guard, 3)
    return make_rule(
        r.name,
        [_head_predicate(p) for p in r.kept],
        [_head_predicate(p) for p in r.removed],
        guard,
        body,
        guard_desc,
        "[" + ", ".join(format_term(b) for b in r.body) + "]",
    )


def compile_program(sp):
    """Compile parsed rules into a left-nested FreeCHR composition."""
    rules = sp.rules if isinstance(sp, SourceProgram) else sp
    return compose_all([compile_rule(r) for r in rules])
