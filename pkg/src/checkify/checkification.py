"""Turn analysis results into run-time checks and test them on generated inputs.

The pipeline is: analyze, annotate, flip ``true`` to ``check``, print and
re-read (so every check has a real source line), compile checks into the
program, then run generated goals until a check fails, the case budget runs
out or the clock does.  :func:`containment_check` is an independent oracle:
it traces the plain annotated program and tests every recorded state for
membership in the analysis result directly.
"""

from __future__ import annotations

import json
from importlib import resources
import time
from itertools import islice
from dataclasses import dataclass, field, replace
from typing import Optional

from . import faults
from .analyzer import analyze, annotate, formals, version_names
from .domains import ConcreteDomain, DomainError
from .engine import (Budget, CheckError, PointSnapshot, PredEvent, ProgramError, ResourceLimit,
                     UndefinedPredicate, run_instrumented, trace)
from .modedefs import expand_assertion
from .program import Assertion, Clause, Location, ParseError, Program
from .properties import UnrunnableProperty, check_runnable, eval_check
from .reader import parse_program
from .terms import Atom, Struct, Var, canonical, substitute, unify
from .testgen import Exhausted, GenSpec, NoGenerator, Universe, make_strategy, shrink
from .writer import format_conj, format_term, print_program

REPORT_VERSION = 1


# -- verdicts -----------------------------------------------------------------------

@dataclass(frozen=True)
class Error:
    input: object
    location: Location
    failing: object
    shrunk_input: object
    point: Optional[tuple] = None
    witness: dict = field(default_factory=dict)
    check: str = ""
    node: str = ""
    cases_run: int = 0

    exit_code = 1


@dataclass(frozen=True)
class Timeout:
    cases_run: int = 0
    reason: str = ""

    exit_code = 3


@dataclass(frozen=True)
class Pass:
    cases_run: int

    exit_code = 0


@dataclass(frozen=True)
class AnalysisFailed:
    reason: str
    stage: str = "analysis"

    exit_code = 2


@dataclass
class CheckifyConfig:
    domain: str = "modes"
    max_cases: int = 1000
    steps_per_case: int = 20000
    wall_clock_limit: Optional[float] = None
    seed: int = 0
    materialize_versions: bool = True
    treat_user_checks: str = "ignore"  # or "trust"
    strategy: str = "random"
    k: int = 2
    universe: Universe = field(default_factory=Universe)
    shrink: bool = True

    def __post_init__(self):
        if self.max_cases < 1:
            raise ValueError("max_cases must be at least 1")
        if self.treat_user_checks not in ("ignore", "trust"):
            raise ValueError(f"treat_user_checks must be 'ignore' or 'trust'")

    @property
    def budget(self):
        return Budget(self.steps_per_case, max(1000, self.steps_per_case // 4))


# -- status flip --------------------------------------------------------------------

def _flip(a, treat):
    if a.status == "true":
        # an empty tag marks the check as generated, so flipping again keeps it
        return replace(a, status="check", tag=a.tag if a.tag is not None else ())
    if a.status == "check" and a.tag is None:
        # user-written check: either set aside or assumed
        return replace(a, status="trust") if treat == "trust" else None
    return a


def flip_status(program, treat_user_checks="ignore"):
    """Every ``true`` assertion becomes ``check``; user checks are dropped or trusted."""
    assertions = []
    for a in program.assertions:
        if a.status == "entry":
            assertions.append(a)
            continue
        f = _flip(a, treat_user_checks)
        if f is not None:
            assertions.append(f)
    clauses = []
    for c in program.clauses:
        body = []
        for lit in c.body:
            if isinstance(lit, Assertion):
                lit = _flip(lit, treat_user_checks)
                if lit is None:
                    continue
            body.append(lit)
        clauses.append(replace(c, body=tuple(body)))
    return replace(program, clauses=tuple(clauses), assertions=tuple(assertions))


# -- instrumentation ------------------------------------------------------------------

@dataclass
class Instrumented:
    program: Program
    checks: list  # every check literal, wrapper checks included


def _inner_name(name):
    return f"{name}$i"


def instrument(program):
    """Compile ``check`` assertions into a runnable program.

    Point checks stay as body literals, which the interpreter evaluates when
    running instrumented.  Predicate checks become a wrapper clause that
    checks the calls conjunction, runs the renamed original, and then checks
    the success conjunction.  Raises :class:`UnrunnableProperty` up front.
    """
    checks = []
    wrapped = {}
    for a in program.assertions:
        if a.kind == "pred" and a.status == "check":
            check_runnable(a.calls)
            check_runnable(a.success)
            wrapped.setdefault(a.key, []).append(a)
    clauses = []
    done = set()
    for c in program.clauses:
        for lit in c.body:
            if isinstance(lit, Assertion) and lit.status == "check":
                check_runnable(lit.calls)
                checks.append(lit)
        key = c.key
        if key in wrapped:
            if key not in done:
                done.add(key)
                clauses.append(_wrapper(key, wrapped[key], checks))
            head = c.head
            clauses.append(replace(c, head=Struct(_inner_name(key[0]), head.args)
                                   if isinstance(head, Struct) else Atom(_inner_name(key[0]))))
        else:
            clauses.append(c)
    # predicate checks for predicates without clauses still guard their calls
    for key, asserts in wrapped.items():
        if key not in done:
            clauses.append(_wrapper(key, asserts, checks))
    return Instrumented(replace(program, clauses=tuple(clauses)), checks)


def _wrapper(key, asserts, checks):
    name, n = key
    args = tuple(Var(f"A{i + 1}") for i in range(n))
    calls, success = [], []
    for a in asserts:
        hargs = a.head.args if isinstance(a.head, Struct) else ()
        if all(isinstance(x, Var) for x in hargs) and len(set(hargs)) == len(hargs):
            m = dict(zip(hargs, args))
            c = tuple(substitute(p, m) for p in a.calls)
            s = tuple(substitute(p, m) for p in a.success)
        else:
            c, s = a.calls, a.success
        tag = a.tag
        if c:
            calls.append(Assertion("check", "program_point", calls=c, location=a.location,
                                   role="calls", tag=tag + ("calls",) if tag else ("calls",)))
        if s:
            success.append(Assertion("check", "program_point", calls=s, location=a.location,
                                     role="success", tag=tag + ("success",) if tag else ("success",)))
    inner = Struct(_inner_name(name), args) if n else Atom(_inner_name(name))
    head = Struct(name, args) if n else Atom(name)
    checks.extend(calls + success)
    return Clause(head, tuple(calls) + (inner,) + tuple(success))


# -- preparing a program --------------------------------------------------------------

@dataclass
class Prepared:
    graph: object
    annotated: Program
    flipped: Program
    text: str
    instrumented: Instrumented


def _copy_tags(src, dst):
    """Carry ``tag`` fields from ``src`` onto the structurally identical re-read ``dst``."""
    if len(src.assertions) != len(dst.assertions) or len(src.clauses) != len(dst.clauses):
        raise ValueError("printed program does not re-read to the same shape")
    assertions = tuple(replace(b, tag=a.tag) for a, b in zip(src.assertions, dst.assertions))
    clauses = []
    for c1, c2 in zip(src.clauses, dst.clauses):
        body = []
        for l1, l2 in zip(c1.body, c2.body):
            body.append(replace(l2, tag=l1.tag) if isinstance(l2, Assertion) else l2)
        clauses.append(replace(c2, body=tuple(body)))
    return replace(dst, clauses=tuple(clauses), assertions=assertions)


def prepare_from_graph(graph, config, file=None):
    annotated = annotate(graph, config.materialize_versions)
    flipped = flip_status(annotated, config.treat_user_checks)
    text = print_program(flipped)
    reread = _copy_tags(flipped, parse_program(text, file=file))
    return Prepared(graph, annotated, flipped, text, instrument(reread))


def prepare(program, config, file=None):
    graph = analyze(program, config.domain, k=config.k,
                    treat_user_checks=config.treat_user_checks)
    return prepare_from_graph(graph, config, file)


# -- test inputs ------------------------------------------------------------------------

def goal_specs(program, universe=None):
    """One generation spec per entry assertion; exported predicates without entries get none."""
    universe = universe or Universe()
    specs = []
    for e in program.entries():
        specs.append(GenSpec.from_entry(e, universe, program.modedefs))
    if not specs:
        for name, n in program.exported():
            head = Struct(name, tuple(Var(f"A{i + 1}") for i in range(n))) if n else Atom(name)
            specs.append(GenSpec(head, (), universe))
    return specs


def satisfies(spec, goal):
    """Whether ``goal`` is an instance of the spec's head meeting its call conditions."""
    b = {}
    if not unify(spec.head, goal, b):
        return False
    return eval_check(spec.calls, b) is None


def input_stream(specs, config):
    """Goals in the order anatest runs them: uniform rotation over the specs."""
    gens = [make_strategy(config.strategy, seed=config.seed * 7919 + i).goals(s)
            if config.strategy == "random" else make_strategy(config.strategy).goals(s)
            for i, s in enumerate(specs)]
    live = list(range(len(gens)))
    i = 0
    while live:
        j = live[i % len(live)]
        try:
            yield specs[j], next(gens[j])
        except (StopIteration, Exhausted):
            live.remove(j)
            continue
        i += 1


# -- the driver --------------------------------------------------------------------------

def _analysis(program, config):
    try:
        return analyze(program, config.domain, k=config.k,
                       treat_user_checks=config.treat_user_checks)
    except (DomainError, RecursionError, RuntimeError, ValueError) as e:
        return AnalysisFailed(f"{type(e).__name__}: {e}")


def anatest(program, config=None, file=None):
    """Analyze, check-instrument and test ``program``; returns a verdict."""
    return timed_anatest(program, config, file)[0]


def timed_anatest(program, config=None, file=None):
    """``(verdict, analysis_ms, testing_ms)``, timed on a monotonic clock."""
    config = config or CheckifyConfig()
    t0 = time.monotonic()
    graph = _analysis(program, config)
    t1 = time.monotonic()
    if isinstance(graph, AnalysisFailed):
        return graph, (t1 - t0) * 1000, 0.0
    verdict = anatest_from_graph(program, graph, config, file)
    return verdict, (t1 - t0) * 1000, (time.monotonic() - t1) * 1000


def anatest_from_graph(program, graph, config=None, file=None):
    config = config or CheckifyConfig()
    try:
        prep = prepare_from_graph(graph, config, file)
    except UnrunnableProperty as e:
        return AnalysisFailed(f"property {e.name} has no run-time check", "instrumentation")
    except (ParseError, ValueError) as e:
        return AnalysisFailed(f"annotated output is malformed: {e}", "output")
    try:
        specs = goal_specs(program, config.universe)
    except NoGenerator as e:
        return AnalysisFailed(str(e), "generation")
    if not specs:
        return Pass(0)
    return run_cases(prep, specs, config)


def _run(prep, goal, config):
    try:
        return run_instrumented(prep.instrumented.program, goal, config.budget)
    except (ProgramError, UndefinedPredicate, RecursionError):
        return None


def run_cases(prep, specs, config):
    start = time.monotonic()
    cases = limited = 0
    stream = input_stream(specs, config)
    while cases < config.max_cases:
        if config.wall_clock_limit is not None and time.monotonic() - start > config.wall_clock_limit:
            return Timeout(cases, "wall clock")
        try:
            spec, goal = next(stream)
        except StopIteration:
            break
        except Exhausted as e:
            return AnalysisFailed(str(e), "generation")
        cases += 1
        res = _run(prep, goal, config)
        if isinstance(res, ResourceLimit):
            limited += 1
        elif isinstance(res, CheckError):
            return _error(prep, spec, goal, res, config, cases)
    if cases and limited == cases:
        return Timeout(cases, "every case exceeded its step budget")
    return Pass(cases)


def _error(prep, spec, goal, res, config, cases):
    loc = res.location
    where = (loc, res.assertion.role if res.assertion else None)

    def still_fails(g):
        if not satisfies(spec, g):
            return False
        r = _run(prep, g, config)
        return isinstance(r, CheckError) and (
            r.location, r.assertion.role if r.assertion else None) == where

    shrunk = shrink(goal, still_fails) if config.shrink else goal
    tag = res.assertion.tag if res.assertion else None
    graph = prep.graph
    node = ""
    if tag and tag[0]:
        node = ", ".join(graph.node(n).label for n in tag[0] if n in graph._by_id)
    return Error(goal, loc, res.failing, shrunk, point_key(tag), res.witness,
                 format_conj(res.assertion.calls) if res.assertion else "", node, cases)


def point_key(tag):
    """Normalize a check tag to ``(node ids, clause, point)`` or ``(node ids, role)``."""
    if tag is None:
        return None
    if len(tag) == 3 and tag[1] == "pred":
        return (tuple(tag[0]), tag[2])
    return tuple(tag)


# -- the independent oracle ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    point: tuple
    binding: dict
    goal: object


def containment_check(program, graph, inputs, budget=None, materialize_versions=True):
    """Trace each input on the annotated program and test every state against ``graph``.

    Returns violations in execution order, input by input.  Uses only the
    interpreter and the domain's membership test, never the property checks.
    """
    d = graph.domain
    annotated = annotate(graph, materialize_versions)
    names = version_names(graph)
    by_name = {}
    for n in graph.nodes:
        name = names[n.id] if materialize_versions else n.key[0]
        by_name.setdefault((name, n.key[1]), []).append(n)
    budget = budget or Budget(20000, 5000)
    out = []
    for goal in inputs:
        tr = trace(annotated, goal, budget)
        for ev in tr.events:
            if isinstance(ev, PointSnapshot):
                key, ci = ev.clause_id
                grp = by_name.get(key)
                if not grp:
                    continue
                asubs = [graph.points.get((n.id, ci, ev.point)) for n in grp]
                if not _member(d, ev.binding, asubs):
                    out.append(Violation((tuple(n.id for n in grp), ci, ev.point), ev.binding, goal))
            elif isinstance(ev, PredEvent):
                grp = by_name.get(ev.key)
                if not grp:
                    continue
                binding = dict(zip(formals(len(ev.args)), ev.args))
                asubs = [n.call if ev.kind == "calls" else n.success for n in grp]
                if not _member(d, binding, asubs):
                    out.append(Violation((tuple(n.id for n in grp), ev.kind), binding, goal))
    return out


def _member(d, binding, asubs):
    asubs = [a for a in asubs if a is not None]
    if not asubs:
        return False
    joined = asubs[0]
    for a in asubs[1:]:
        joined = d.lub(joined, a)
    vs = d.vars(joined)
    if not all(v in binding for v in vs):
        return True
    return d.gamma_member({v: binding[v] for v in vs}, joined)


def first_violation(program, graph, inputs, budget=None, materialize_versions=True):
    """First input with a violation and that violation's point, or None."""
    for goal in inputs:
        v = containment_check(program, graph, [goal], budget, materialize_versions)
        if v:
            return v[0]
    return None


def concrete_mismatches(program, goal, budget=None):
    """Points where the concrete-domain analysis of ``goal`` differs from its trace.

    The analysis starts from the singleton call ``goal``; each program point's
    binding set is compared with the set of snapshots the interpreter records
    there.  Returns ``{(predicate, clause, point): (predicted, observed)}``.
    """
    dom = ConcreteDomain()
    args = goal.args if isinstance(goal, Struct) else ()
    key = (goal.name, len(args))
    graph = analyze(program, dom, entry_asubs=[(key, dom.singleton(formals(len(args)), args))])
    names = version_names(graph)
    predicted, vars_at = {}, {}
    for (nid, ci, idx), a in graph.points.items():
        n = graph.node(nid)
        where = ((names[n.id], n.key[1]), ci, idx)
        predicted[where] = predicted.get(where, frozenset()) | a.rows
        vars_at[where] = a.vars
    observed = {}
    for ev in trace(annotate(graph), goal, budget or Budget(200000, 50000)).events:
        if isinstance(ev, PointSnapshot):
            where = (ev.clause_id[0], ev.clause_id[1], ev.point)
            vs = vars_at.get(where, tuple(ev.binding))
            row = canonical(tuple(ev.binding[v] for v in vs))
            observed[where] = observed.get(where, frozenset()) | {row}
    out = {}
    for where in set(predicted) | set(observed):
        p, o = predicted.get(where, frozenset()), observed.get(where, frozenset())
        if p != o:
            out[where] = (p, o)
    return out


@dataclass(frozen=True)
class CrossCheck:
    verdict: object
    violation: Violation | None

    @property
    def agree(self):
        """Both clean, or both convict the same input at the same point."""
        v = self.violation
        if isinstance(self.verdict, Pass):
            return v is None
        if isinstance(self.verdict, Error):
            return (v is not None and v.point == self.verdict.point
                    and canonical((v.goal,)) == canonical((self.verdict.input,)))
        return False


def cross_validate(program, config=None, file=None):
    """Run anatest and the containment oracle on one analysis and one input stream."""
    config = config or CheckifyConfig()
    graph = analyze(program, config.domain, k=config.k,
                    treat_user_checks=config.treat_user_checks)
    verdict = anatest_from_graph(program, graph, config, file)
    n = getattr(verdict, "cases_run", config.max_cases)
    goals = [g for _, g in islice(input_stream(goal_specs(program, config.universe), config), n)]
    return CrossCheck(verdict, first_violation(program, graph, goals, config.budget,
                                               config.materialize_versions))


# -- reports ------------------------------------------------------------------------------

def verdict_name(v):
    return type(v).__name__


def report(verdict, *, program="", domain="", seed=0, wall_time_ms=0.0, faults_enabled=(),
           analysis_ms=None, testing_ms=None):
    """JSON-ready dict for a verdict, following the bundled report schema.

    Phase timings are optional; when given, an Error's testing time is flagged
    as an early exit since the run stopped at the first failing check.
    """
    loc = None
    failing = witness = shrunk = None
    cases = getattr(verdict, "cases_run", 0)
    if isinstance(verdict, Error):
        l = verdict.location
        loc = {"file": l.file or program, "line": l.line, "col": l.col}
        failing = format_term(verdict.failing)
        witness = format_term(verdict.input)
        shrunk = format_term(verdict.shrunk_input)
    out = {
        "schema_version": REPORT_VERSION,
        "program": program,
        "domain": domain,
        "seed": seed,
        "verdict": verdict_name(verdict),
        "location": loc,
        "failing_property": failing,
        "witness": witness,
        "shrunk_witness": shrunk,
        "cases_run": cases,
        "wall_time_ms": round(wall_time_ms, 3),
        "faults": sorted(faults_enabled),
    }
    if analysis_ms is not None:
        out["analysis_ms"] = round(analysis_ms, 3)
        out["testing_ms"] = round(testing_ms or 0.0, 3)
        out["early_exit"] = isinstance(verdict, Error)
    if isinstance(verdict, Error):
        out["check"] = verdict.check
        out["node"] = verdict.node
    if isinstance(verdict, (AnalysisFailed, Timeout)):
        out["reason"] = verdict.reason
    return out


def load_schema():
    return json.loads(resources.files("checkify").joinpath("report.schema.json").read_text())


def report_json(verdict, **kw):
    return json.dumps(report(verdict, **kw), indent=2, sort_keys=True)
