"""Command-line front door.

Exit codes: 0 deadlock-free, 1 deadlock, 2 usage/parse/validation error,
3 inconclusive (simulate only).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import oracle
from .analyze import analyze
from .l2 import normalize, strip_outer_infinite, to_power_string
from .model import ModelError, default_max_events, unroll, validate
from .parser import MdlSyntaxError, parse
from .smodel import build_mdg, mdg_to_dot
from .verdicts import Deadlock


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc}")
    try:
        program = parse(text)
        validate(program)
    except (MdlSyntaxError, ModelError) as exc:
        raise _Usage(f"{path}: {exc}")
    return program


class _Usage(Exception):
    pass


def cmd_check(args) -> int:
    program = _load(args.path)
    try:
        report = analyze(program, via=args.via, max_events=args.max_events)
    except ModelError as exc:
        raise _Usage(f"{args.path}: {exc}")
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        verdict = report.verdict
        print(f"{args.path}: "
              f"{'DEADLOCK' if isinstance(verdict, Deadlock) else 'deadlock-free'}"
              f" (phase {report.phase})")
        if isinstance(verdict, Deadlock) and verdict.witness is not None:
            print(f"  witness: {verdict.witness.to_dict()}")
        if args.trace:
            _print_trace(report)
    return 1 if isinstance(report.verdict, Deadlock) else 0


def _print_trace(report):
    tr = report.trace
    name = report.program.name_of
    if tr.string_map:
        print("  string mapping:")
        for n, s in tr.string_map.items():
            print(f"    {name(n)} -> {s}")
    for rec in tr.reg_records:
        print(f"  ratio equations ({rec.label}):")
        for eq in rec.equations:
            print(f"    {eq}")
        sol = rec.solution
        if hasattr(sol, "values") and isinstance(sol.values, dict):
            for comp in sol.components:
                vals = ":".join(str(sol.values[v]) for v in comp)
                vars_ = ":".join(f"p{v}" for v in comp)
                print(f"    solution {vars_} = {vals}")
        else:
            print(f"    inconsistent: {sol.detail}")
        if rec.lcm:
            for comp, v in rec.lcm.items():
                print(f"    lcm{list(comp)} = {v}")
        if rec.loop_times:
            times = ", ".join(f"{name(n)}={t}"
                              for n, t in rec.loop_times.items())
            print(f"    sliced loop times: {times}")
    for i, snap in enumerate(tr.fpp_snapshots):
        body = ", ".join(f"{name(n)}: {p}" for n, p in sorted(snap.items()))
        print(f"  fpp[{i}]: {{{body}}}")
        if i < len(tr.set_records):
            rec = tr.set_records[i]
            for nodes, eligible in rec.partition:
                tag = "eligible" if eligible else "waiting"
                print(f"    related set {tuple(name(n) for n in nodes)}: {tag}")
            for nodes, values in rec.solutions:
                vals = ", ".join(f"p{n}={v}" for n, v in values.items())
                print(f"    set solution: {vals}")
            for act in rec.actions:
                print(f"    {act}")


def cmd_mdg(args) -> int:
    program = _load(args.path)
    try:
        queues = _as_queues(program, args.max_events)
    except ModelError as exc:
        raise _Usage(f"{args.path}: {exc}")
    mdg = build_mdg(queues)
    dot = mdg_to_dot(mdg)
    if args.dot == "-":
        sys.stdout.write(dot)
    else:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
        print(f"wrote {args.dot}: {len(mdg.pairs)} pairs, "
              f"{len(mdg.edges)} edges")
    return 0


def _as_queues(program, max_events):
    if all(not _has_inf(body) for _, body in program.nodes):
        return unroll(program, max_events)
    # slice infinite loops down to one consistent round first
    strings = {n: normalize(to_power_string(b)) for n, b in program.nodes}
    finite, verdict = strip_outer_infinite(strings)
    if verdict is not None:
        raise ModelError(
            "program has no consistent finite slice; cannot draw its MDG")
    from .l2 import flatten_items

    cap = default_max_events() if max_events is None else max_events
    return {n: flatten_items(ps, cap=cap) for n, ps in finite.items()}


def _has_inf(body):
    from .model import For, is_infinite

    for st in body:
        if isinstance(st, For):
            if is_infinite(st.count) or _has_inf(st.body):
                return True
    return False


def cmd_reg(args) -> int:
    program = _load(args.path)
    strings = {n: normalize(to_power_string(b)) for n, b in program.nodes}
    from .trace import Trace

    trace = Trace()
    try:
        _, verdict = strip_outer_infinite(strings, trace)
    except ModelError as exc:
        raise _Usage(f"{args.path}: {exc}")
    name = program.name_of
    if not trace.reg_records:
        print("no equations")
        return 0
    rec = trace.reg_records[0]
    if not rec.equations:
        print("no equations; every node is its own component with value 1")
    for eq in rec.equations:
        print(eq)
    sol = rec.solution
    if hasattr(sol, "values") and isinstance(sol.values, dict):
        for comp in sol.components:
            vars_ = ":".join(f"p{v}" for v in comp)
            vals = ":".join(str(sol.values[v]) for v in comp)
            print(f"solution {vars_} = {vals}")
    else:
        print(f"inconsistent: {sol.detail}")
        for eq in sol.equations:
            print(f"  clashing: {eq}")
    return 0


def cmd_simulate(args) -> int:
    program = _load(args.path)
    verdict = oracle.explore(program, max_states=args.max_states)
    if isinstance(verdict, oracle.DeadlockReachable):
        print(f"{args.path}: deadlock reachable "
              f"after {len(verdict.trace)} rendezvous")
        for sym in verdict.trace:
            print(f"  {sym}")
        return 1
    if isinstance(verdict, oracle.Inconclusive):
        print(f"{args.path}: inconclusive after {verdict.states} states")
        return 3
    print(f"{args.path}: deadlock-free ({verdict.states} states explored)")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="mpicheck",
        description="Static deadlock analysis for synchronous "
                    "message-passing programs (.mdl files)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="run the static analysis")
    p.add_argument("path")
    p.add_argument("--trace", action="store_true",
                   help="print stage-by-stage details")
    p.add_argument("--json", action="store_true")
    p.add_argument("--via", choices=["auto", "smodel", "l0", "l2"],
                   default="auto")
    p.add_argument("--max-events", type=int, default=None)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("mdg", help="export the contracted message "
                                   "dependence graph as DOT")
    p.add_argument("path")
    p.add_argument("--dot", default="-", help="output file, - for stdout")
    p.add_argument("--max-events", type=int, default=None)
    p.set_defaults(fn=cmd_mdg)

    p = sub.add_parser("reg", help="print ratio equations and solution")
    p.add_argument("path")
    p.set_defaults(fn=cmd_reg)

    p = sub.add_parser("simulate", help="exhaustive interleaving oracle")
    p.add_argument("path")
    p.add_argument("--max-states", type=int, default=10**6)
    p.set_defaults(fn=cmd_simulate)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
