"""FreeCHR programs as a free algebra: single rules composed with ``compose``.

A program is a binary tree of ``Rule`` leaves and ``Compose`` nodes.  Every
interpretation of a program (running it, embedding it, printing it) is a
``fold_program`` over that tree.  ``enumerate_program`` decorates every head
predicate with its global pattern index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union


class BuildError(Exception):
    """Invalid program construction.  ``kind`` names the violated rule."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


@dataclass(frozen=True, eq=False)
class HeadPredicate:
    """Unary test on a single constraint value.

    Equality is identity: two predicates with the same descriptor are still
    different functions.
    """

    test: Callable
    descriptor: str = "<pred>"

    def __call__(self, value) -> bool:
        return self.test(value)

    def __str__(self):
        return self.descriptor


@dataclass(frozen=True)
class FreeRule:
    """``name @ kept \\ removed`` with guard and body functions.

    ``guard`` and ``body`` are called with the matched values as positional
    arguments, kept heads first, then removed heads, each left to right.
    """

    name: str
    kept: tuple
    removed: tuple
    guard: Callable
    body: Callable
    guard_desc: str = "<guard>"
    body_desc: str = "<body>"

    @property
    def heads(self) -> tuple:
        return self.kept + self.removed

    @property
    def head_count(self) -> int:
        return len(self.kept) + len(self.removed)


@dataclass(frozen=True)
class Rule:
    rule: FreeRule


@dataclass(frozen=True)
class Compose:
    left: "Program"
    right: "Program"


Program = Union[Rule, Compose]


def _as_predicate(h) -> HeadPredicate:
    if isinstance(h, HeadPredicate):
        return h
    if callable(h):
        return HeadPredicate(h, getattr(h, "__name__", "<pred>"))
    raise BuildError("BadPredicate", repr(h))


def make_rule(
    name: str,
    kept: Sequence,
    removed: Sequence,
    guard: Callable | None = None,
    body: Callable | None = None,
    guard_desc: str | None = None,
    body_desc: str | None = None,
) -> Rule:
    """Validate and wrap a single rule.

    Plain callables in ``kept``/``removed`` are wrapped as predicates.  A
    missing guard always holds; a missing body produces nothing.
    """
    if not name:
        raise BuildError("EmptyName")
    if not kept and not removed:
        raise BuildError("EmptyHeads", name)
    if guard is None:
        guard = _always
        guard_desc = guard_desc or "true"
    if body is None:
        body = _nothing
        body_desc = body_desc if body_desc is not None else ""
    rule = FreeRule(
        name,
        tuple(_as_predicate(h) for h in kept),
        tuple(_as_predicate(h) for h in removed),
        guard,
        body,
        guard_desc if guard_desc is not None else "<guard>",
        body_desc if body_desc is not None else "<body>",
    )
    return Rule(rule)


def _always(*values):
    return True


def _nothing(*values):
    return ()


def fold_program(p, on_rule: Callable, on_compose: Callable):
    """Structural fold; rules are visited left to right in textual order."""
    if isinstance(p, (Rule, EnumRule)):
        return on_rule(p.rule)
    return on_compose(
        fold_program(p.left, on_rule, on_compose),
        fold_program(p.right, on_rule, on_compose),
    )


def rules_of(p) -> list:
    """The flattened left-to-right rule sequence of a program."""
    return fold_program(p, lambda r: [r], lambda a, b: a + b)


def compose(p1: Program, p2: Program) -> Compose:
    seen = set()
    for r in rules_of(p1) + rules_of(p2):
        if r.name in seen:
            raise BuildError("DuplicateRuleName", r.name)
        seen.add(r.name)
    return Compose(p1, p2)


def compose_all(programs: Sequence[Program]) -> Program:
    """Left-nested composition of one or more programs."""
    if not programs:
        raise BuildError("EmptyProgram")
    out = programs[0]
    for p in programs[1:]:
        out = compose(out, p)
    return out


# -- enumerated programs -----------------------------------------------------


@dataclass(frozen=True)
class EnumRule:
    """A rule whose head predicates carry pattern indices.

    ``kept_idx`` and ``removed_idx`` run parallel to ``rule.kept`` and
    ``rule.removed``.
    """

    rule: FreeRule
    kept_idx: tuple
    removed_idx: tuple

    @property
    def name(self) -> str:
        return self.rule.name

    @property
    def indices(self) -> tuple:
        """Indices in head order (kept then removed)."""
        return self.kept_idx + self.removed_idx


@dataclass(frozen=True)
class EnumCompose:
    left: "EnumProgram"
    right: "EnumProgram"


EnumProgram = Union[EnumRule, EnumCompose]


def _enum_rule(r: FreeRule, start: int) -> EnumRule:
    # removed heads right-to-left first, then kept heads right-to-left
    n, m = len(r.kept), len(r.removed)
    removed_idx = tuple(start + m - 1 - j for j in range(m))
    kept_idx = tuple(start + m + n - 1 - j for j in range(n))
    return EnumRule(r, kept_idx, removed_idx)


def enumerate_program(p: Program, start: int = 1) -> EnumProgram:
    def go(q, nxt):
        if isinstance(q, Rule):
            return _enum_rule(q.rule, nxt), nxt + q.rule.head_count
        left, nxt = go(q.left, nxt)
        right, nxt = go(q.right, nxt)
        return EnumCompose(left, right), nxt

    return go(p, start)[0]


def labels_of_rule(r: EnumRule) -> frozenset:
    return frozenset(r.indices)


def labels(p: EnumProgram) -> frozenset:
    return fold_program_enum(p, labels_of_rule, frozenset.union)


def fold_program_enum(p: EnumProgram, on_rule: Callable, on_compose: Callable):
    """Fold over enumerated rules (the ``EnumRule`` leaves, not the bare rules)."""
    if isinstance(p, EnumRule):
        return on_rule(p)
    return on_compose(
        fold_program_enum(p.left, on_rule, on_compose),
        fold_program_enum(p.right, on_rule, on_compose),
    )


def enum_rules_of(p: EnumProgram) -> list:
    return fold_program_enum(p, lambda r: [r], lambda a, b: a + b)


def unenumerate(p: EnumProgram) -> Program:
    return fold_program_enum(p, lambda r: Rule(r.rule), Compose)


def rule_for_label(p: EnumProgram, label: int):
    """Return ``(enum_rule, position)`` for the head carrying ``label``.

    ``position`` is 0-based into the head sequence kept + removed.  Raises
    ``KeyError`` if no head carries the label.
    """
    for r in enum_rules_of(p):
        idx = r.indices
        if label in idx:
            return r, idx.index(label)
    raise KeyError(label)


class LabelIndex:
    """Precomputed label -> (rule, position) lookup for the engines."""

    def __init__(self, p: EnumProgram):
        self.program = p
        self.rules = enum_rules_of(p)
        self.table = {}
        for r in self.rules:
            for pos, l in enumerate(r.indices):
                self.table[l] = (r, pos)

    def __contains__(self, label: int) -> bool:
        return label in self.table

    def __getitem__(self, label: int):
        return self.table[label]


def dump_enumerated(p: EnumProgram) -> str:
    """One line per rule: ``name @ kept[desc#idx ...] \\ removed[desc#idx ...]``."""
    lines = []
    for r in enum_rules_of(p):
        kept = " ".join(f"{h}#{i}" for h, i in zip(r.rule.kept, r.kept_idx))
        removed = " ".join(f"{h}#{i}" for h, i in zip(r.rule.removed, r.removed_idx))
        lines.append(f"{r.name} @ kept[{kept}] \\ removed[{removed}]")
    return "\n".join(lines)
