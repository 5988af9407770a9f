"""Command line front end: verify, optimize, isel, dot, bench, samples."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import samples
from .bench import bench_dir, peak_rss_bytes
from .gxl import GxlError, parse_gxl, write_dot, write_gxl
from .ir import Graph
from .isel import select
from .opt import RULES, OptConfig, VerificationError, optimize
from .verify import ERROR, to_json, verify

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _Fail(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load(path: str) -> Graph:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise _Fail(EXIT_IO, f"{path}: {exc.strerror or exc}") from None
    try:
        return parse_gxl(data)
    except GxlError as exc:
        raise _Fail(EXIT_IO, f"{path}: {exc}") from None


def _save(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"{path}: {exc.strerror or exc}") from None


def _rules(text: Optional[str]) -> frozenset[str]:
    if text is None:
        return frozenset(RULES)
    rules = frozenset(r.strip() for r in text.split(",") if r.strip())
    unknown = rules - set(RULES)
    if unknown:
        raise _Fail(EXIT_USAGE, f"unknown rule(s): {', '.join(sorted(unknown))}; known: {', '.join(RULES)}")
    return rules


def _emit_report(kind: str, report: dict, text: str, path: str) -> None:
    if kind == "json":
        print(json.dumps({"file": path, **report, "peak_rss_bytes": peak_rss_bytes()}, indent=2))
    elif kind == "text":
        print(text)


def cmd_verify(args) -> int:
    graph = _load(args.input)
    diagnostics = verify(graph)
    if args.json:
        print(to_json(diagnostics))
    else:
        for d in diagnostics:
            print(d)
        if not diagnostics:
            print(f"{args.input}: ok ({len(graph.nodes)} nodes, {len(graph.edges)} edges)")
    return EXIT_VERIFY if any(d.severity == ERROR for d in diagnostics) else EXIT_OK


def _optimize(graph: Graph, args, path: str) -> None:
    try:
        config = OptConfig(rules=_rules(args.rules), max_iterations=args.max_iterations,
                           verify_each_round=args.verify_each_round)
    except ValueError as exc:
        raise _Fail(EXIT_USAGE, str(exc)) from None
    report = optimize(graph, config)
    _emit_report(args.report, report.to_dict(), report.to_text(), path)


def cmd_optimize(args) -> int:
    graph = _load(args.input)
    _optimize(graph, args, args.input)
    _save(args.output, write_gxl(graph))
    return EXIT_OK


def cmd_isel(args) -> int:
    graph = _load(args.input)
    if args.optimize:
        _optimize(graph, args, args.input)
    report = select(graph, parallel=not args.sequential, workers=args.workers)
    _emit_report(args.report, report.to_dict(), report.to_text(), args.input)
    _save(args.output, write_gxl(graph))
    return EXIT_OK


def cmd_dot(args) -> int:
    graph = _load(args.input)
    _save(args.output, write_dot(graph, cluster_blocks=args.cluster_blocks).encode("utf-8"))
    return EXIT_OK


def cmd_bench(args) -> int:
    if not Path(args.directory).is_dir():
        raise _Fail(EXIT_IO, f"{args.directory}: not a directory")
    started = time.perf_counter()
    records = bench_dir(args.directory, jobs=args.jobs)
    total = time.perf_counter() - started
    for r in records:
        if r.ok:
            print(f"{r.file:<32} ok    {r.nodes_before:>8} -> {r.nodes_after:<8} {r.wall_ms():>10.1f} ms")
        else:
            print(f"{r.file:<32} FAIL  {r.error}")
    passed = sum(r.ok for r in records)
    print(f"{passed}/{len(records)} files completed in {total:.2f} s")
    if args.json:
        _save(args.json, json.dumps([r.to_dict() for r in records], indent=2).encode("utf-8"))
    return EXIT_OK if passed == len(records) else EXIT_VERIFY


def cmd_samples(args) -> int:
    out = Path(args.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"{out}: {exc.strerror or exc}") from None
    for name, make in samples.CORPUS.items():
        _save(str(out / f"{name}.gxl"), write_gxl(make()))
    if args.chain:
        _save(str(out / f"chain_{args.chain}.gxl"), write_gxl(samples.chain_program(args.chain)))
    return EXIT_OK


def _add_opt_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rules", help=f"comma separated subset of: {', '.join(RULES)}")
    p.add_argument("--max-iterations", type=int, default=OptConfig.max_iterations)
    p.add_argument("--verify-each-round", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firmkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check a graph against the structural rules")
    p.add_argument("input")
    p.add_argument("--json", action="store_true", help="print diagnostics as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", help="run local optimizations")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_opt_flags(p)
    p.add_argument("--report", choices=("json", "text", "none"), default="text")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("isel", help="select target instructions")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sequential", action="store_true", help="disable the parallel phases")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--optimize", action="store_true", help="optimize before selecting")
    _add_opt_flags(p)
    p.add_argument("--report", choices=("json", "text", "none"), default="text")
    p.set_defaults(func=cmd_isel)

    p = sub.add_parser("dot", help="export Graphviz DOT")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--cluster-blocks", action="store_true")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("bench", help="optimize and select every .gxl file in a directory")
    p.add_argument("directory")
    p.add_argument("--json", metavar="OUT")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("samples", help="write the sample corpus as GXL files")
    p.add_argument("directory")
    p.add_argument("--chain", type=int, default=0, metavar="SEGMENTS",
                   help="also write a chain program with this many segments")
    p.set_defaults(func=cmd_samples)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"firmkit: {exc}", file=sys.stderr)
        return exc.code
    except VerificationError as exc:
        print(f"firmkit: {getattr(args, 'input', '')}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
