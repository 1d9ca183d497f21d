"""Command-line front end: ``analyze``, ``checkify``, ``matrix`` and ``faults list``.

A bare file argument runs ``checkify``, so ``checkify prog.mlp -d modes`` works.
Exit codes follow the verdict: 0 Pass, 1 Error, 2 AnalysisFailed (or a
program that does not parse), 3 Timeout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import faults
from .analyzer import analyze, annotate
from .checkification import AnalysisFailed, CheckifyConfig, report, timed_anatest
from .domains import NAMES as DOMAIN_NAMES
from .domains.base import DomainError
from .program import ParseError
from .reader import parse_program
from .testgen import Universe
from .writer import format_term, print_program

COMMANDS = ("analyze", "checkify", "matrix", "faults")
UNIVERSE_ENV = "CHECKIFY_UNIVERSE"
DEFAULT_MATRIX_DOMAINS = "modes,sharing,shfr,share_clique,depthk"


def universe_from_env(env=None):
    """Universe bounds from ``CHECKIFY_UNIVERSE``, e.g. ``max_list=4,ints=-2..2,atoms=a:b``."""
    text = (env if env is not None else os.environ).get(UNIVERSE_ENV, "").strip()
    if not text:
        return Universe()
    opts = {}
    for item in text.split(","):
        key, _, val = item.partition("=")
        key, val = key.strip(), val.strip()
        if key in ("max_list", "max_depth", "max_size"):
            opts[key] = int(val)
        elif key == "ints":
            lo, _, hi = val.partition("..")
            opts["int_range"] = (int(lo), int(hi))
        elif key == "atoms":
            opts["atoms"] = tuple(a for a in val.split(":") if a)
        else:
            raise ValueError(f"{UNIVERSE_ENV}: unknown bound {key!r}")
    return Universe(**opts)


def _read(path):
    text = Path(path).read_text()
    return parse_program(text, file=str(path))


def _parse_error(path, e):
    print(f"{path}:{e.line}:{e.col}: parse error: {e}", file=sys.stderr)
    return 2


# -- analyze ----------------------------------------------------------------------------

def cmd_analyze(args):
    try:
        program = _read(args.file)
    except ParseError as e:
        return _parse_error(args.file, e)
    with faults.injected(*args.inject):
        try:
            graph = analyze(program, args.domain, k=args.k)
        except (DomainError, RuntimeError, ValueError) as e:
            print(f"{args.file}: analysis failed: {e}", file=sys.stderr)
            return 2
        text = print_program(annotate(graph, args.materialize))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# -- checkify ---------------------------------------------------------------------------

def _config(args):
    return CheckifyConfig(domain=args.domain, seed=args.seed, max_cases=args.max_cases,
                          wall_clock_limit=args.timeout, k=args.k,
                          strategy=args.strategy, universe=universe_from_env(),
                          materialize_versions=args.materialize)


def _describe(v):
    name = type(v).__name__
    if name == "Error":
        loc = v.location
        lines = [f"Error after {v.cases_run} cases at line {loc.line}, col {loc.col}",
                 f"  failing property: {format_term(v.failing)}",
                 f"  check:            {v.check}",
                 f"  input:            {format_term(v.input)}",
                 f"  shrunk input:     {format_term(v.shrunk_input)}"]
        if v.node:
            lines.append(f"  analysis node:    {v.node}")
        return "\n".join(lines)
    if name == "Pass":
        return f"Pass ({v.cases_run} cases)"
    if name == "Timeout":
        return f"Timeout after {v.cases_run} cases: {v.reason}"
    return f"AnalysisFailed ({v.stage}): {v.reason}"


def cmd_checkify(args):
    try:
        program = _read(args.file)
    except ParseError as e:
        if args.json:
            _emit_json(args.json, report(AnalysisFailed(str(e), "parse"), program=str(args.file),
                                         domain=args.domain, seed=args.seed))
        return _parse_error(args.file, e)
    start = time.monotonic()
    with faults.injected(*args.inject):
        verdict, a_ms, t_ms = timed_anatest(program, _config(args), file=str(args.file))
    wall = (time.monotonic() - start) * 1000
    print(_describe(verdict))
    if args.json:
        _emit_json(args.json, report(verdict, program=str(args.file), domain=args.domain,
                                     seed=args.seed, wall_time_ms=wall,
                                     faults_enabled=args.inject, analysis_ms=a_ms,
                                     testing_ms=t_ms))
    return verdict.exit_code


def _emit_json(dest, obj):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if dest == "-":
        print(text)
    else:
        Path(dest).write_text(text + "\n")


# -- matrix -----------------------------------------------------------------------------

def _cell(job):
    path, domain, seed, max_cases, timeout, inject = job
    start = time.monotonic()
    try:
        program = _read(path)
    except ParseError as e:
        verdict, a_ms, t_ms = AnalysisFailed(f"parse error: {e}", "parse"), 0.0, 0.0
    else:
        with faults.injected(*inject):
            cfg = CheckifyConfig(domain=domain, seed=seed, max_cases=max_cases,
                                 wall_clock_limit=timeout, universe=universe_from_env())
            verdict, a_ms, t_ms = timed_anatest(program, cfg, file=str(path))
    wall = (time.monotonic() - start) * 1000
    return report(verdict, program=Path(path).name, domain=domain, seed=seed,
                  wall_time_ms=wall, faults_enabled=inject, analysis_ms=a_ms, testing_ms=t_ms)


def run_matrix(corpus, domains, seed=0, max_cases=1000, timeout=None, inject=(), jobs=1):
    """Reports for every ``.mlp`` file in ``corpus`` under every domain, row-major."""
    files = sorted(Path(corpus).glob("*.mlp"))
    work = [(str(f), d, seed, max_cases, timeout, tuple(inject)) for f in files for d in domains]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_cell, work))
    return [_cell(w) for w in work]


_SHORT = {"Pass": "", "Error": "ERR ", "Timeout": "T/O ", "AnalysisFailed": "n/a"}


def format_matrix(rows, domains, times=True):
    """Text table: one line per program, ``time (analysis time)`` in seconds per domain."""
    by_prog = {}
    for r in rows:
        by_prog.setdefault(r["program"], {})[r["domain"]] = r
    if not by_prog:
        return ""
    width = max(len("program"), *(len(p) for p in by_prog))
    cols = [max(22 if times else 9, len(d) + 2) for d in domains]
    lines = ["program".ljust(width) + "".join(d.rjust(c) for d, c in zip(domains, cols))]
    for prog, cells in by_prog.items():
        out = prog.ljust(width)
        for d, col in zip(domains, cols):
            r = cells.get(d)
            if r is None or r["verdict"] == "AnalysisFailed":
                text = "n/a"
            elif not times:
                text = r["verdict"]
            else:
                text = (f"{_SHORT[r['verdict']]}{r['wall_time_ms'] / 1000:.2f}"
                        f" ({r['analysis_ms'] / 1000:.2f})")
            out += text.rjust(col)
        lines.append(out)
    return "\n".join(lines) + "\n"


def cmd_matrix(args):
    domains = [d.strip() for d in args.domains.split(",") if d.strip()]
    for d in domains:
        if d not in DOMAIN_NAMES:
            print(f"unknown domain {d!r}", file=sys.stderr)
            return 2
    start = time.monotonic()
    rows = run_matrix(args.corpus, domains, args.seed, args.max_cases, args.timeout,
                      args.inject, args.jobs)
    total = (time.monotonic() - start) * 1000
    sys.stdout.write(format_matrix(rows, domains, times=not args.no_times))
    if args.json:
        _emit_json(args.json, {"schema_version": 1, "domains": domains,
                               "total_wall_time_ms": round(total, 3), "rows": rows})
    return 1 if any(r["verdict"] == "Error" for r in rows) else 0


# -- faults -----------------------------------------------------------------------------

def cmd_faults(args):
    rows = faults.table()
    w = max(len(r[0]) for r in rows)
    print(f"{'id'.ljust(w)}  class  detection   description")
    for fid, cls, det, desc in rows:
        print(f"{fid.ljust(w)}  {cls.ljust(5)}  {det.ljust(10)}  {desc}")
    return 0


# -- parser -----------------------------------------------------------------------------

def _common(p, domain_default="modes"):
    p.add_argument("-d", "--domain", default=domain_default, choices=DOMAIN_NAMES)
    p.add_argument("-k", type=int, default=2, help="depth bound for the depthk domain")
    p.add_argument("--inject", action="append", default=[], metavar="FAULT",
                   choices=sorted(faults.REGISTRY), help="enable a seeded fault (repeatable)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--materialize", dest="materialize", action="store_true", default=True,
                   help="print one predicate copy per analysis version (default)")
    g.add_argument("--collapse", dest="materialize", action="store_false",
                   help="merge all versions of a predicate")


def build_parser():
    parser = argparse.ArgumentParser(prog="checkify",
                                     description="Test a static analyzer by running its own output.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print the analysis as an annotated program")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("checkify", help="analyze, instrument and test a program")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cases", type=int, default=1000)
    p.add_argument("--timeout", type=float, default=None, help="wall clock limit in seconds")
    p.add_argument("--strategy", default="random",
                   choices=("random", "breadth_first", "iterative_deepening"))
    p.add_argument("--json", metavar="OUT", help="write the JSON report ('-' for stdout)")
    _common(p)
    p.set_defaults(func=cmd_checkify)

    p = sub.add_parser("matrix", help="run every corpus program under every domain")
    p.add_argument("corpus")
    p.add_argument("-d", "--domains", default=DEFAULT_MATRIX_DOMAINS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cases", type=int, default=1000)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--inject", action="append", default=[], choices=sorted(faults.REGISTRY))
    p.add_argument("--no-times", action="store_true", help="print verdicts only")
    p.add_argument("--json", metavar="OUT")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("faults", help="list the seeded faults")
    p.add_argument("action", choices=("list",))
    p.set_defaults(func=cmd_faults)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in COMMANDS and not argv[0].startswith("-"):
        argv.insert(0, "checkify")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"checkify: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"checkify: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
