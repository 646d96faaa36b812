"""Refined operational semantics for FreeCHR programs.

The state is ``(query, store, history, next_id)``.  ``step`` performs exactly
one ACTIVATE, DROP, APPLY or DEFAULT transition on the query head; ``run``
iterates it to a terminal state and records a trace.

Partner search is deterministic: head positions are filled left to right
(kept heads, then removed heads), candidates in ascending store id, and the
first complete assignment wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .program import EnumRule, LabelIndex, Program, enumerate_program
from .terms import as_value, render_value

DEFAULT_MAX_STEPS = 1_000_000


class EngineError(Exception):
    """A rule function raised.  ``trace`` holds the events before the failure."""

    def __init__(self, kind: str, message: str, trace=(), state=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.trace = list(trace)
        self.state = state


class StepLimit(Exception):
    def __init__(self, max_steps: int, trace=(), state=None, states=None):
        super().__init__(f"step limit of {max_steps} reached")
        self.max_steps = max_steps
        self.trace = list(trace)
        self.state = state
        self.states = states


@dataclass(frozen=True)
class Inactive:
    value: object


@dataclass(frozen=True)
class Active:
    id: int
    value: object
    pattern_index: int


@dataclass(frozen=True)
class RefinedState:
    query: tuple = ()
    store: dict = field(default_factory=dict)
    history: frozenset = frozenset()
    next_id: int = 1

    def store_items(self):
        return sorted(self.store.items())

    def describe(self) -> str:
        q = ", ".join(
            str(i.value) if isinstance(i, Inactive) else f"({i.id},{i.value})#{i.pattern_index}"
            for i in self.query
        )
        s = ", ".join(f"({i},{v})" for i, v in self.store_items())
        h = ", ".join(f"({n},{','.join(map(str, ids))})" for n, ids in sorted(self.history))
        return f"<[{q}], {{{s}}}, {{{h}}}, {self.next_id}>"


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    active_id: int
    value: object
    pattern_index: int
    rule: str | None = None
    matched_ids: tuple = ()
    body: tuple = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rule": self.rule,
            "active_id": self.active_id,
            "pattern_index": self.pattern_index,
            "value": render_value(self.value),
            "matched_ids": list(self.matched_ids),
            "body": [render_value(v) for v in self.body],
        }

    def to_text(self) -> str:
        head = f"{self.kind.upper():8} ({self.active_id},{self.value})#{self.pattern_index}"
        if self.kind == "apply":
            ids = ",".join(map(str, self.matched_ids))
            body = ", ".join(map(str, self.body))
            return f"{head} {self.rule}[{ids}] -> [{body}]"
        if self.kind == "default":
            return f"{head} {self.rule}"
        return head


def initial_state(goal: Sequence) -> RefinedState:
    return RefinedState(tuple(Inactive(as_value(v)) for v in goal), {}, frozenset(), 1)


def _call(kind, fn, args, state):
    try:
        return fn(*args)
    except Exception as exc:  # rule functions are user code
        raise EngineError(kind, f"{type(exc).__name__}: {exc}", state=state) from exc


def find_matching(er: EnumRule, active_id: int, position: int, state: RefinedState):
    """First partner assignment for ``er`` with ``position`` fixed to the active id.

    Returns a tuple of ``(id, value)`` pairs in head order, or ``None``.
    """
    store = state.store
    if active_id not in store:
        return None
    rule = er.rule
    preds = rule.kept + rule.removed
    n = len(preds)
    if not _call("PredicateError", preds[position], (store[active_id],), state):
        return None
    candidates = sorted(store.items())
    chosen = [None] * n
    chosen[position] = (active_id, store[active_id])
    used = {active_id}

    def fill(k):
        if k == n:
            ids = tuple(c[0] for c in chosen)
            if (rule.name, ids) in state.history:
                return False
            vals = tuple(c[1] for c in chosen)
            return bool(_call("GuardError", rule.guard, vals, state))
        if k == position:
            return fill(k + 1)
        for i, v in candidates:
            if i in used or not _call("PredicateError", preds[k], (v,), state):
                continue
            chosen[k] = (i, v)
            used.add(i)
            if fill(k + 1):
                return True
            used.discard(i)
        chosen[k] = None
        return False

    return tuple(chosen) if fill(0) else None


def step(index: LabelIndex, state: RefinedState):
    """One transition.  Returns ``(new_state, event)`` or ``None`` when terminal."""
    if not state.query:
        return None
    head, rest = state.query[0], state.query[1:]

    if isinstance(head, Inactive):
        i = state.next_id
        store = dict(state.store)
        store[i] = head.value
        new = RefinedState((Active(i, head.value, 1),) + rest, store, state.history, i + 1)
        return new, TraceEvent("activate", i, head.value, 1)

    if head.pattern_index not in index:
        new = RefinedState(rest, state.store, state.history, state.next_id)
        return new, TraceEvent("drop", head.id, head.value, head.pattern_index)

    er, pos = index[head.pattern_index]
    match = find_matching(er, head.id, pos, state)
    if match is None:
        bumped = Active(head.id, head.value, head.pattern_index + 1)
        new = RefinedState((bumped,) + rest, state.store, state.history, state.next_id)
        return new, TraceEvent("default", head.id, head.value, head.pattern_index, er.name)

    ids = tuple(i for i, _ in match)
    vals = tuple(v for _, v in match)
    produced = _call("BodyError", er.rule.body, vals, state)
    try:
        body = tuple(as_value(v) for v in produced)
    except (TypeError, ValueError) as exc:
        raise EngineError("BodyError", str(exc), state=state) from exc
    store = dict(state.store)
    for i, _ in match[len(er.kept_idx):]:
        del store[i]
    new = RefinedState(
        tuple(Inactive(v) for v in body) + state.query,
        store,
        state.history | {(er.name, ids)},
        state.next_id,
    )
    return new, TraceEvent("apply", head.id, head.value, head.pattern_index, er.name, ids, body)


@dataclass
class RunResult:
    final: RefinedState
    trace: list
    states: list | None = None  # states[k] is the state before trace[k]


def run_enumerated(
    p, goal: Sequence, max_steps: int = DEFAULT_MAX_STEPS, keep_states: bool = False, stepper=step
) -> RunResult:
    index = LabelIndex(p) if not isinstance(p, LabelIndex) else p
    state = initial_state(goal)
    trace = []
    states = [state] if keep_states else None
    while True:
        try:
            out = stepper(index, state)
        except EngineError as exc:
            exc.trace = trace
            exc.state = state
            raise
        if out is None:
            return RunResult(state, trace, states)
        if len(trace) >= max_steps:
            raise StepLimit(max_steps, trace, state, states)
        state, event = out
        trace.append(event)
        if keep_states:
            states.append(state)


def run(p: Program, goal: Sequence, max_steps: int = DEFAULT_MAX_STEPS, keep_states: bool = False) -> RunResult:
    """Enumerate ``p`` and run it on ``goal`` to a terminal state."""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    return run_enumerated(enumerate_program(p), goal, max_steps, keep_states)
