"""Command line interface: ``lustre-horn compile`` and ``lustre-horn simulate``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .diagnostics import CompileError
from .driver import (DEFAULT_TIMEOUT, CompilerConfig, ExitCode, UsageError, compile_text, parse_prove,
                     run_pipeline, solver_from_env)
from .interpreter import ABSENT, Interpreter, random_inputs, run_trace

TRUE_WORDS = {"true", "t", "1"}
FALSE_WORDS = {"false", "f", "0"}


class _Parser(argparse.ArgumentParser):
    """Reports malformed command lines with the usage exit code (argparse uses 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lustre-horn",
                                 description="Compile Lustre programs with automata to Horn clauses.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log pipeline progress")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a program and optionally check a property")
    c.add_argument("file", type=Path)
    c.add_argument("--node", dest="main", help="main node (defines the Reach relation)")
    c.add_argument("--horn", type=Path, help="write the Horn system to this .smt2 file")
    c.add_argument("--emit-clocked", type=Path, help="write the program after automaton expansion")
    c.add_argument("--emit-normalized", type=Path, help="write the normalized program")
    c.add_argument("--emit-state-tree", type=Path, help="write the memory tree of the main node")
    c.add_argument("--inline", action="store_true", help="inline the generated state nodes")
    c.add_argument("--prove", metavar="NODE:OUTPUT", help="boolean output that must always hold")
    c.add_argument("--solver", nargs="+", metavar="ARG",
                   help="solver command; '{file}' is replaced by the Horn file (default: $HORN_SOLVER)")
    c.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="solver timeout in seconds")

    s = sub.add_parser("simulate", help="run a node on input valuations and print its outputs as CSV")
    s.add_argument("file", type=Path)
    s.add_argument("--node", required=True)
    s.add_argument("--steps", type=int, help="number of instants (default: every input row)")
    s.add_argument("--input", type=Path, help="CSV file with one column per input (default: random)")
    s.add_argument("--seed", type=int, default=0, help="seed for random inputs")
    s.add_argument("--inline", action="store_true", help="simulate the inlined program")
    return ap


def parse_value(text: str, ty: str, types) -> Any:
    t = text.strip()
    if ty == "bool":
        if t.lower() in TRUE_WORDS:
            return True
        if t.lower() in FALSE_WORDS:
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if ty == "int":
        return int(t)
    if ty == "real":
        return Fraction(t)
    decl = types.type_decl(ty)
    if t not in decl.constructors:
        raise ValueError(f"{text!r} is not a constructor of {ty}")
    return t


def format_value(v: Any) -> str:
    if v is ABSENT:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def read_inputs(path: Path, inputs, types) -> list[dict[str, Any]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        missing = [d.name for d in inputs if d.name not in (reader.fieldnames or [])]
        if missing:
            raise UsageError(f"{path}: missing input column(s) {', '.join(missing)}")
        rows = []
        for k, row in enumerate(reader, start=2):
            try:
                rows.append({d.name: parse_value(row[d.name], d.type, types) for d in inputs})
            except ValueError as exc:
                raise UsageError(f"{path}:{k}: {exc}") from exc
    return rows


def cmd_compile(args) -> int:
    cfg = CompilerConfig(
        input=args.file, main=args.main, horn=args.horn, emit_clocked=args.emit_clocked,
        emit_normalized=args.emit_normalized, emit_state_tree=args.emit_state_tree, inline=args.inline,
        prove=parse_prove(args.prove) if args.prove else None,
        solver=args.solver or solver_from_env(), timeout=args.timeout)
    res = run_pipeline(cfg)
    for d in res.diagnostics:
        print(d.render(str(args.file)), file=sys.stderr)
    for w in res.warnings:
        print(f"{args.file}: warning: {w}", file=sys.stderr)
    if res.outcome is not None:
        print(res.outcome.value)
    elif cfg.prove is not None:
        print("no solver configured; Horn file written without checking", file=sys.stderr)
    return res.exit_code


def cmd_simulate(args) -> int:
    try:
        text = args.file.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
    try:
        res = compile_text(text, args.node, inline=args.inline)
    except CompileError as exc:
        for d in exc.diagnostics:
            print(d.render(str(args.file)), file=sys.stderr)
        return ExitCode.DIAGNOSTICS
    node = res.source.node(args.node)
    if args.input is not None:
        rows = read_inputs(args.input, node.inputs, res.source)
        if args.steps is not None:
            if args.steps > len(rows):
                raise UsageError(f"{args.input} has {len(rows)} rows, fewer than --steps {args.steps}")
            rows = rows[:args.steps]
    else:
        rows = random_inputs(node.inputs, res.source, 10 if args.steps is None else args.steps, args.seed)
    trace = run_trace(res.normalized, args.node, rows, Interpreter(res.normalized))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow([d.name for d in node.outputs])
    for o in trace.outputs:
        w.writerow([format_value(o[d.name]) for d in node.outputs])
    sys.stdout.write(out.getvalue())
    return ExitCode.OK


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"lustre-horn: error: {exc}", file=sys.stderr)
        return ExitCode.USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "compile":
            return int(cmd_compile(args))
        return int(cmd_simulate(args))
    except UsageError as exc:
        print(f"lustre-horn: error: {exc}", file=sys.stderr)
        return ExitCode.USAGE


if __name__ == "__main__":
    sys.exit(main())
