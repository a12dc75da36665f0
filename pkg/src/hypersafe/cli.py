"""Command-line driver: check, prove, witness, monitor.

Exit codes: 0 when the property is established (proved / closed / log
accepted), 1 when it is not (unknown verdict, failed proof, violation),
2 on usage, parse, or resource errors.  Proof scripts that end with open
goals exit 2.  All stdout reports are deterministic; timing goes to
stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from .errors import EngineError, InputError
from .lts import parse_event, parse_lasso
from .relspec import closure
from .solver import check_hyper, extract_witness, format_strategy, oracle_region
from .specfile import load_specfile
from .kernel.script import run_script


def _parse_domain(text):
    if not text:
        return ()
    lo, _, hi = text.partition("..")
    try:
        return tuple(range(int(lo), int(hi) + 1))
    except ValueError:
        raise EngineError(f"bad domain {text!r}; expected a..b") from None


def _load_spec(args):
    with open(args.spec, "r", encoding="utf-8") as fh:
        text = fh.read()
    return load_specfile(
        text, base_dir=os.path.dirname(os.path.abspath(args.spec)),
        modulus=args.modulus, input_domain=_parse_domain(args.input_domain),
        max_nodes=args.max_nodes, max_closure=args.max_closure)


def cmd_check(args) -> int:
    spec = _load_spec(args)
    started = time.perf_counter()
    verdict = check_hyper(spec.query, spec.max_nodes, spec.max_closure)
    elapsed = time.perf_counter() - started
    print(verdict.status)
    print(f"region {len(verdict.region)}")
    print(f"iterations {verdict.iterations}")
    print(f"nodes {len(verdict.arena)}")
    print(f"time {elapsed:.3f}s", file=sys.stderr)
    if args.oracle:
        reference = oracle_region(verdict.arena)
        if reference != verdict.region:
            print("oracle MISMATCH", file=sys.stderr)
            return 2
        print("oracle agrees")
    if args.strategy_dump and verdict.proved:
        print(format_strategy(verdict))
    return 0 if verdict.proved else 1


def cmd_prove(args) -> int:
    with open(args.script, "r", encoding="utf-8") as fh:
        text = fh.read()
    result = run_script(
        text, base_dir=os.path.dirname(os.path.abspath(args.script)),
        modulus=args.modulus, input_domain=_parse_domain(args.input_domain))
    print(result)
    if args.trace:
        for rule, before, after in result.trace:
            print(f"trace {rule} {before or '-'} -> {after or 'closed'}")
    return result.exit_code


def cmd_witness(args) -> int:
    spec = _load_spec(args)
    m = len(spec.query.universal)
    if len(args.lassos) != m:
        print(f"error: expected {m} universal lasso(s), got {len(args.lassos)}",
              file=sys.stderr)
        return 2
    lassos = [parse_lasso(text) for text in args.lassos]
    verdict = check_hyper(spec.query, spec.max_nodes, spec.max_closure)
    if not verdict.proved:
        print("UNKNOWN")
        return 1
    try:
        witnesses = extract_witness(verdict, lassos)
    except InputError as err:  # unrealizable lasso: not established
        print(f"error: {err}", file=sys.stderr)
        return 1
    for name, witness in zip(spec.existential_names, witnesses):
        print(f"{name}: {witness}")
    return 0


def cmd_monitor(args) -> int:
    spec = _load_spec(args)
    systems = spec.query.universal + spec.query.existential
    if len(args.logs) != len(systems):
        print(f"error: expected {len(systems)} log file(s), got {len(args.logs)}",
              file=sys.stderr)
        return 2
    streams = []
    for path in args.logs:
        with open(path, "r", encoding="utf-8") as fh:
            streams.append([parse_event(tok) for tok in fh.read().split()])
    lengths = {len(s) for s in streams}
    if len(lengths) != 1:
        print("error: log files have different lengths (padding is not allowed)",
              file=sys.stderr)
        return 2
    alphabets = [tuple(sorted(set(sys_.alphabet) | set(stream)))
                 for sys_, stream in zip(systems, streams)]
    graph = closure(spec.query.formula, alphabets, spec.query.atoms, spec.max_closure)
    node = graph.node_id(graph.root)
    for position in range(lengths.pop()):
        events = tuple(stream[position] for stream in streams)
        node = graph.derive_node(node, events)
        if not graph.nonempty(node):
            print(f"VIOLATION at {position}")
            return 1
    print("OK")
    return 0


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modulus", type=int, default=0,
                        help="machine integer bound for programs (default 8)")
    common.add_argument("--input-domain", default="",
                        help="input/havoc value range a..b (default 0..modulus-1)")
    common.add_argument("--max-nodes", type=int, default=0, help="arena node cap")
    common.add_argument("--max-closure", type=int, default=0,
                        help="formula closure cap")
    parser = argparse.ArgumentParser(
        prog="hypersafe",
        description="Verify forall-exists temporal safety hyperproperties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", parents=[common],
                             help="solve a spec automatically")
    p_check.add_argument("spec")
    p_check.add_argument("--oracle", action="store_true",
                         help="cross-check the region with the attractor solver")
    p_check.add_argument("--strategy-dump", action="store_true",
                         help="print the winning strategy table")
    p_check.set_defaults(fn=cmd_check)

    p_prove = sub.add_parser("prove", parents=[common], help="run a proof script")
    p_prove.add_argument("script")
    p_prove.add_argument("--trace", action="store_true",
                         help="print the rule/guard trace")
    p_prove.set_defaults(fn=cmd_prove)

    p_wit = sub.add_parser("witness", parents=[common],
                             help="extract existential witness lassos")
    p_wit.add_argument("spec")
    p_wit.add_argument("lassos", nargs="+", metavar="LASSO",
                       help="one lasso literal per universal system, e.g. 'a (b c)^w'")
    p_wit.set_defaults(fn=cmd_witness)

    p_mon = sub.add_parser("monitor", parents=[common],
                             help="check event logs against the formula")
    p_mon.add_argument("spec")
    p_mon.add_argument("logs", nargs="+", metavar="LOG",
                       help="one log file per quantified system")
    p_mon.set_defaults(fn=cmd_monitor)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (EngineError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
