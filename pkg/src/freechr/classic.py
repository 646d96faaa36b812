"""Classical ground CHR: textual rules, groundings, and a refined-semantics engine.

The FreeCHR engine in ``refined`` is checked against this module.  Embedded
rules fold every head predicate into the rule guard, so this engine never
looks at individual head patterns.  Its partner search is written
independently (lexicographic product over store ids) but enumerates
assignments in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from .program import LabelIndex, enum_rules_of, enumerate_program
from .refined import (
    Active,
    DEFAULT_MAX_STEPS,
    EngineError,
    Inactive,
    RefinedState,
    StepLimit,
    TraceEvent,
    initial_state,
    step as refined_step,
)
from .terms import BoolVal, Lit, as_value, equiv_true, eval_term, free_vars, match_pattern


@dataclass(frozen=True)
class ClassicRule:
    """``name @ kept \\ removed <=> guard | body`` over pattern and expression terms."""

    name: str
    kept: tuple
    removed: tuple
    guard: object = Lit(BoolVal(True))
    body: tuple = ()

    @property
    def heads(self) -> tuple:
        return self.kept + self.removed

    def head_vars(self) -> frozenset:
        return frozenset().union(*(free_vars(h) for h in self.heads))

    def unbound_vars(self) -> frozenset:
        used = free_vars(self.guard).union(*(free_vars(b) for b in self.body))
        return used - self.head_vars()


@dataclass(frozen=True)
class CInstance:
    name: str
    kept: tuple
    removed: tuple
    guard: bool
    body: tuple = ()


@dataclass(frozen=True)
class EnumClassicRule:
    rule: ClassicRule
    kept_idx: tuple
    removed_idx: tuple

    @property
    def indices(self) -> tuple:
        return self.kept_idx + self.removed_idx


def enum_classic(rules: Sequence[ClassicRule], start: int = 1) -> list:
    out = []
    nxt = start
    for r in rules:
        n, m = len(r.kept), len(r.removed)
        removed_idx = tuple(nxt + m - 1 - j for j in range(m))
        kept_idx = tuple(nxt + m + n - 1 - j for j in range(n))
        out.append(EnumClassicRule(r, kept_idx, removed_idx))
        nxt += n + m
    return out


def labels_classic(rules: Sequence[EnumClassicRule]) -> frozenset:
    return frozenset(l for r in rules for l in r.indices)


def ground_instance(r: ClassicRule, values: Sequence):
    """Instantiate ``r`` on ``values`` (head order), or ``None`` if a head does not match.

    The body is only evaluated when the guard holds.
    """
    heads = r.heads
    if len(values) != len(heads):
        raise ValueError(f"{r.name} has {len(heads)} heads, got {len(values)} values")
    sigma = {}
    for p, v in zip(heads, values):
        sigma = match_pattern(p, v, sigma)
        if sigma is None:
            return None
    nk = len(r.kept)
    values = tuple(values)
    if not equiv_true(r.guard, sigma):
        return CInstance(r.name, values[:nk], values[nk:], False)
    body = tuple(eval_term(b, sigma) for b in r.body)
    return CInstance(r.name, values[:nk], values[nk:], True, body)


# -- embedding ---------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddedRule:
    name: str
    kept_idx: tuple
    removed_idx: tuple
    combined_guard: Callable
    body: Callable
    guard_desc: str = ""
    body_desc: str = ""

    @property
    def indices(self) -> tuple:
        return self.kept_idx + self.removed_idx

    @property
    def head_count(self) -> int:
        return len(self.kept_idx) + len(self.removed_idx)


def _combined(heads, guard):
    def combined_guard(*values):
        return all(h(v) for h, v in zip(heads, values)) and bool(guard(*values))

    return combined_guard


def theta_embed(p) -> list:
    """Embed an enumerated FreeCHR program as classical rules.

    Head predicates become conjuncts of the rule guard; indices are kept.
    """
    out = []
    for er in enum_rules_of(p):
        r = er.rule
        descs = [f"{h}(${k + 1})" for k, h in enumerate(r.heads)]
        guard_desc = " and ".join(descs + [f"{r.guard_desc}"])
        out.append(
            EmbeddedRule(
                r.name, er.kept_idx, er.removed_idx, _combined(r.heads, r.guard), r.body, guard_desc, r.body_desc
            )
        )
    return out


def embed_classic(rules: Sequence[EnumClassicRule]) -> list:
    """Classical rules as embedded rules, guarded by their groundings."""
    out = []
    for er in rules:
        r = er.rule

        def guard(*values, r=r):
            inst = ground_instance(r, values)
            return inst is not None and inst.guard

        def body(*values, r=r):
            return ground_instance(r, values).body

        out.append(EmbeddedRule(r.name, er.kept_idx, er.removed_idx, guard, body))
    return out


def dump_embedded(rules: Sequence[EmbeddedRule]) -> str:
    lines = []
    for r in rules:
        kept = " ".join(f"#{i}" for i in r.kept_idx)
        removed = " ".join(f"#{i}" for i in r.removed_idx)
        lines.append(f"{r.name} @ {kept} \\ {removed} <=> {r.guard_desc} | {r.body_desc}")
    return "\n".join(lines)


# -- classical refined engine ------------------------------------------------


class ClassicProgram:
    def __init__(self, rules: Sequence[EmbeddedRule]):
        self.rules = list(rules)
        self.table = {l: (r, pos) for r in self.rules for pos, l in enumerate(r.indices)}


def _guarded(kind, fn, args, state):
    try:
        return fn(*args)
    except Exception as exc:
        raise EngineError(kind, f"{type(exc).__name__}: {exc}", state=state) from exc


def _first_instance(r: EmbeddedRule, active_id: int, position: int, state: RefinedState, reverse=False):
    ids = sorted(state.store, reverse=reverse)
    slots = [[active_id] if k == position else ids for k in range(r.head_count)]
    for combo in product(*slots):
        if len(set(combo)) != len(combo):
            continue
        if (r.name, combo) in state.history:
            continue
        vals = tuple(state.store[i] for i in combo)
        if _guarded("GuardError", r.combined_guard, vals, state):
            return combo, vals
    return None


def step_classic(prog: ClassicProgram, state: RefinedState, reverse=False):
    """One classical transition, or ``None`` when the query is empty."""
    if not state.query:
        return None
    q, h, s, i = state.query, state.history, state.store, state.next_id
    c = q[0]
    if isinstance(c, Inactive):
        return (
            RefinedState((Active(i, c.value, 1),) + q[1:], {**s, i: c.value}, h, i + 1),
            TraceEvent("activate", i, c.value, 1),
        )
    if c.pattern_index not in prog.table:
        return RefinedState(q[1:], s, h, i), TraceEvent("drop", c.id, c.value, c.pattern_index)
    r, pos = prog.table[c.pattern_index]
    found = _first_instance(r, c.id, pos, state, reverse) if c.id in s else None
    if found is None:
        return (
            RefinedState((Active(c.id, c.value, c.pattern_index + 1),) + q[1:], s, h, i),
            TraceEvent("default", c.id, c.value, c.pattern_index, r.name),
        )
    combo, vals = found
    body = tuple(as_value(v) for v in _guarded("BodyError", r.body, vals, state))
    removed = set(combo[len(r.kept_idx):])
    store = {k: v for k, v in s.items() if k not in removed}
    return (
        RefinedState(tuple(Inactive(v) for v in body) + q, store, h | {(r.name, combo)}, i),
        TraceEvent("apply", c.id, c.value, c.pattern_index, r.name, combo, body),
    )


@dataclass
class Divergence:
    step: int
    reason: str
    refined: object = None
    classic: object = None

    def __str__(self):
        lines = [f"divergence at step {self.step}: {self.reason}"]
        if self.refined is not None:
            lines.append(f"  refined: {self.refined.describe()}")
        if self.classic is not None:
            lines.append(f"  classic: {self.classic.describe()}")
        return "\n".join(lines)


@dataclass
class EquivalenceReport:
    steps: int
    divergence: Divergence | None = None
    hit_limit: bool = False

    @property
    def ok(self) -> bool:
        return self.divergence is None


def check_equivalence(p, goal: Sequence, max_steps: int = DEFAULT_MAX_STEPS, classic_step=step_classic):
    """Run the FreeCHR engine and the embedded classical engine in lockstep.

    States and events must be identical after every step.  Reaching
    ``max_steps`` on both sides with identical states is not a divergence.
    """
    ep = enumerate_program(p)
    index = LabelIndex(ep)
    prog = ClassicProgram(theta_embed(ep))
    a = b = initial_state(goal)
    for k in range(max_steps + 1):
        out_a = refined_step(index, a)
        out_b = classic_step(prog, b)
        if out_a is None or out_b is None:
            if out_a is None and out_b is None:
                return EquivalenceReport(k)
            which = "refined" if out_a is None else "classic"
            return EquivalenceReport(k, Divergence(k, f"{which} engine terminated first", a, b))
        if k == max_steps:
            return EquivalenceReport(k, hit_limit=True)
        (a, ev_a), (b, ev_b) = out_a, out_b
        if ev_a != ev_b:
            return EquivalenceReport(k, Divergence(k, f"events differ: {ev_a} vs {ev_b}", a, b))
        if a != b:
            return EquivalenceReport(k, Divergence(k, "states differ", a, b))
    raise AssertionError("unreachable")


def run_classic(rules: Sequence[EmbeddedRule], goal: Sequence, max_steps: int = DEFAULT_MAX_STEPS):
    """Run embedded classical rules; returns ``(final_state, trace)``."""
    prog = ClassicProgram(rules)
    state = initial_state(goal)
    trace = []
    while True:
        out = step_classic(prog, state)
        if out is None:
            return state, trace
        if len(trace) >= max_steps:
            raise StepLimit(max_steps, trace, state)
        state, ev = out
        trace.append(ev)
