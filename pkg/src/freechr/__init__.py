"""Constraint Handling Rules as a free algebra, run under the refined semantics."""

from .abstract import abstract_applicable, abstract_r, abstract_run, check_refined_trace, multiset
from .classic import ClassicRule, check_equivalence, enum_classic, ground_instance, step_classic, theta_embed
from .frontend import compile_program, parse_program, parse_values
from .program import (
    BuildError,
    Compose,
    HeadPredicate,
    Rule,
    compose,
    enumerate_program,
    fold_program,
    labels,
    labels_of_rule,
    make_rule,
    rule_for_label,
    unenumerate,
)
from .refined import EngineError, RefinedState, StepLimit, TraceEvent, find_matching, initial_state, run, step
from .terms import BoolVal, EvalError, IntVal, SymVal, TupleVal, as_value, eval_term, match_pattern

__all__ = [
    "abstract_applicable",
    "abstract_r",
    "abstract_run",
    "check_refined_trace",
    "multiset",
    "ClassicRule",
    "check_equivalence",
    "enum_classic",
    "ground_instance",
    "step_classic",
    "theta_embed",
    "compile_program",
    "parse_program",
    "parse_values",
    "BuildError",
    "Compose",
    "HeadPredicate",
    "Rule",
    "compose",
    "enumerate_program",
    "fold_program",
    "labels",
    "labels_of_rule",
    "make_rule",
    "rule_for_label",
    "unenumerate",
    "EngineError",
    "RefinedState",
    "StepLimit",
    "TraceEvent",
    "find_matching",
    "initial_state",
    "run",
    "step",
    "BoolVal",
    "EvalError",
    "IntVal",
    "SymVal",
    "TupleVal",
    "as_value",
    "eval_term",
    "match_pattern",
]
