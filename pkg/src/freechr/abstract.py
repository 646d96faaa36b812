"""Very abstract semantics: nondeterministic rewriting of plain multisets.

Also home of ``abstract_r``, which forgets the bookkeeping of a refined state,
and ``check_refined_trace``, which verifies that every refined transition maps
to zero or one abstract rule application.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable

from .program import FreeRule, LabelIndex, rules_of
from .refined import Inactive, RefinedState, StepLimit
from .terms import as_value, value_key


def multiset(values: Iterable) -> Counter:
    return Counter(as_value(v) for v in values)


def canonical(m: Counter) -> tuple:
    """Sorted ``(value, count)`` pairs; equal multisets give equal tuples."""
    return tuple(sorted(((v, c) for v, c in m.items() if c > 0), key=lambda vc: value_key(vc[0])))


def format_multiset(m: Counter) -> str:
    items = []
    for v, c in canonical(m):
        items.extend([str(v)] * c)
    return "{" + ", ".join(items) + "}"


def abstract_r(state: RefinedState) -> Counter:
    """Store values plus not-yet-activated query values.

    Active query items are skipped; their value is either still in the store
    or has been removed by a rule.
    """
    m = Counter(state.store.values())
    m.update(i.value for i in state.query if isinstance(i, Inactive))
    return m


def abstract_applicable(rule: FreeRule, m: Counter) -> list:
    """All instances of ``rule`` applicable to ``m``, deduplicated by values.

    Each entry is ``(selection, result)`` where ``selection`` lists the
    matched values in head order.
    """
    occurrences = [v for v, _ in canonical(m) for _ in range(m[v])]
    preds = rule.kept + rule.removed
    nk = len(rule.kept)
    seen = set()
    out = []
    for pick in permutations(range(len(occurrences)), len(preds)):
        sel = tuple(occurrences[i] for i in pick)
        if sel in seen:
            continue
        seen.add(sel)
        if not all(h(v) for h, v in zip(preds, sel)):
            continue
        if not rule.guard(*sel):
            continue
        result = m.copy()
        result.subtract(sel[nk:])
        result.update(as_value(v) for v in rule.body(*sel))
        out.append((sel, +result))
    return out


def abstract_run(p, m, seed: int = 0, max_steps: int = 100_000) -> Counter:
    """Apply randomly chosen applicable instances until none is left.

    Candidates are listed in a canonical order before sampling, so a seed
    replays exactly.
    """
    rng = random.Random(seed)
    rules = rules_of(p)
    state = +multiset(m)
    steps = 0
    while True:
        candidates = [res for r in rules for _, res in abstract_applicable(r, state)]
        if not candidates:
            return state
        if steps == max_steps:
            raise StepLimit(max_steps, state=state)
        state = rng.choice(candidates)
        steps += 1


@dataclass
class Violation:
    step: int
    reason: str

    def __str__(self):
        return f"violation at step {self.step}: {self.reason}"


def check_refined_trace(p, trace, states) -> Violation | None:
    """Check each refined step against the abstract semantics.

    ``states`` holds the state before each event plus the final one.  Returns
    ``None`` when every step is sound, else the first ``Violation``.
    """
    index = p if isinstance(p, LabelIndex) else LabelIndex(p)
    if len(states) != len(trace) + 1:
        return Violation(0, "need one state snapshot per event plus the final state")
    for k, ev in enumerate(trace):
        before, after = abstract_r(states[k]), abstract_r(states[k + 1])
        if ev.kind != "apply":
            if before != after:
                return Violation(k, f"{ev.kind} changed the abstract state")
            continue
        reason = _check_apply(index, ev, states[k], before, after)
        if reason:
            return Violation(k, reason)
    return None


def _check_apply(index: LabelIndex, ev, state, before: Counter, after: Counter):
    er = next((r for r in index.rules if r.name == ev.rule), None)
    if er is None:
        return f"unknown rule {ev.rule}"
    rule = er.rule
    if len(ev.matched_ids) != rule.head_count:
        return "matched id count differs from head count"
    if len(set(ev.matched_ids)) != len(ev.matched_ids):
        return "matched ids are not distinct"
    try:
        vals = tuple(state.store[i] for i in ev.matched_ids)
    except KeyError as exc:
        return f"matched id {exc.args[0]} not in store"
    if not all(h(v) for h, v in zip(rule.heads, vals)) or not rule.guard(*vals):
        return "matched values do not satisfy the rule"
    body = tuple(as_value(v) for v in rule.body(*vals))
    if body != tuple(ev.body):
        return "body values differ from the rule body"
    expected = before.copy()
    expected.subtract(vals[len(er.kept_idx):])
    if min(expected.values(), default=0) < 0:
        return "removed values missing from abstract state"
    expected.update(body)
    if +expected != +after:
        return "abstract state is not the result of one rule application"
    return None
