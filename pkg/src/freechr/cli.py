"""Command line entry point.

Exit codes: 0 success, 1 check violation, 2 parse/validation error,
3 runtime error (evaluation error, failing rule function, step limit).
"""

from __future__ import annotations

import argparse
import json
import sys

from .abstract import abstract_r, abstract_run, check_refined_trace, format_multiset
from .classic import check_equivalence, dump_embedded, theta_embed
from .frontend import ParseError, ValidationError, compile_program, parse_program, parse_values
from .program import BuildError, LabelIndex, dump_enumerated, enumerate_program
from .refined import DEFAULT_MAX_STEPS, EngineError, StepLimit, run_enumerated
from .terms import EvalError

COMMANDS = ("run", "trace", "enumerate-dump", "embed-dump", "check-soundness", "check-embedding")

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freechr", description="Run and check CHR programs.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("program", help="program file")
    ap.add_argument("--query", default="", help='goal values, e.g. "6,9" or "(a,b),(b,c)"')
    ap.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    ap.add_argument("--seed", type=int, default=0, help="seed for --abstract")
    ap.add_argument("--format", choices=("text", "jsonl"), default="text")
    ap.add_argument("--abstract", action="store_true", help="run: use the randomized abstract executor")
    return ap


def _load(path: str):
    with open(path, encoding="utf-8") as f:
        text = f.read()
    sp = parse_program(text, path)
    if not sp.rules:
        raise BuildError("EmptyProgram", path)
    return compile_program(sp)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out, err = sys.stdout, sys.stderr
    try:
        program = _load(args.program)
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"parse error: {args.program}:{exc}", file=err)
        return EXIT_INPUT
    except (ValidationError, BuildError) as exc:
        print(f"invalid program: {args.program}: {exc}", file=err)
        return EXIT_INPUT
    try:
        goal = parse_values(args.query)
    except ParseError as exc:
        print(f"parse error: --query:{exc}", file=err)
        return EXIT_INPUT

    if args.max_steps < 0:
        print("error: --max-steps must be non-negative", file=err)
        return EXIT_INPUT

    try:
        return _dispatch(args, program, goal, out)
    except StepLimit as exc:
        print(f"runtime error: {exc}", file=err)
        return EXIT_RUNTIME
    except (EngineError, EvalError) as exc:
        print(f"runtime error: {exc}", file=err)
        return EXIT_RUNTIME


def _dispatch(args, program, goal, out) -> int:
    cmd = args.command
    ep = enumerate_program(program)

    if cmd == "enumerate-dump":
        print(dump_enumerated(ep), file=out)
        return EXIT_OK
    if cmd == "embed-dump":
        print(dump_embedded(theta_embed(ep)), file=out)
        return EXIT_OK

    if cmd == "run" and args.abstract:
        final = abstract_run(program, goal, args.seed, args.max_steps)
        print(format_multiset(final), file=out)
        return EXIT_OK

    if cmd == "run":
        res = run_enumerated(ep, goal, args.max_steps)
        if args.format == "jsonl":
            store = [{"id": i, "value": str(v)} for i, v in res.final.store_items()]
            print(json.dumps({"store": store, "multiset": format_multiset(abstract_r(res.final))}), file=out)
        else:
            for i, v in res.final.store_items():
                print(f"{i}: {v}", file=out)
            print(format_multiset(abstract_r(res.final)), file=out)
        return EXIT_OK

    if cmd == "trace":
        res = run_enumerated(ep, goal, args.max_steps)
        for ev in res.trace:
            if args.format == "jsonl":
                print(json.dumps(ev.to_json(), sort_keys=True), file=out)
            else:
                print(ev.to_text(), file=out)
        return EXIT_OK

    if cmd == "check-soundness":
        index = LabelIndex(ep)
        res = run_enumerated(index, goal, args.max_steps, keep_states=True)
        violation = check_refined_trace(index, res.trace, res.states)
        if violation is not None:
            print(str(violation), file=out)
            return EXIT_VIOLATION
        print(f"OK: {len(res.trace)} steps sound", file=out)
        return EXIT_OK

    report = check_equivalence(program, goal, args.max_steps)
    if not report.ok:
        print(str(report.divergence), file=out)
        return EXIT_VIOLATION
    if report.hit_limit:
        raise StepLimit(args.max_steps)
    print(f"OK: {report.steps} steps identical", file=out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
