"""Iterative SLD-resolution interpreter with cut, budgets, checks and tracing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import count

from .program import Assertion
from .properties import eval_check
from .terms import (NIL, Atom, Num, Struct, Var, deref, fresh_var, functor, is_ground, mklist,
                    resolve, substitute, term_vars, unify)


class UndefinedPredicate(Exception):
    def __init__(self, key):
        self.key = key
        super().__init__(f"undefined predicate {key[0]}/{key[1]}")


class ProgramError(Exception):
    """Run-time error raised by the executed program (instantiation or type error)."""


class EvaluationError(ArithmeticError, ProgramError):
    """Non-numeric operand or undefined arithmetic operation in ``is/2`` and comparisons."""


@dataclass(frozen=True)
class Budget:
    max_steps: int = 10 ** 6
    max_depth: int = 10 ** 4


@dataclass
class Solutions:
    bindings: list


@dataclass
class CheckError:
    location: object
    failing: object
    witness: dict
    assertion: Assertion = None


@dataclass
class ResourceLimit:
    reason: str
    steps: int = 0


@dataclass(frozen=True)
class PointSnapshot:
    clause_id: tuple  # (predicate key, clause index within the predicate)
    point: int
    binding: dict  # source variable -> resolved term


@dataclass(frozen=True)
class PredEvent:
    key: tuple
    kind: str  # "calls" | "success"
    args: tuple


@dataclass
class ExecutionTrace:
    events: list = field(default_factory=list)
    outcome: object = None

    @property
    def snapshots(self):
        return [e for e in self.events if isinstance(e, PointSnapshot)]


# -- arithmetic ---------------------------------------------------------------

def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise EvaluationError(f"not a number: {x!r}")
    if isinstance(x, float) and not math.isfinite(x):
        raise EvaluationError("float overflow")
    return x


def _int_div(a, b):
    if not (isinstance(a, int) and isinstance(b, int)):
        raise EvaluationError("// expects integers")
    if b == 0:
        raise EvaluationError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _div(a, b):
    if b == 0:
        raise EvaluationError("division by zero")
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return a / b


def _mod(a, b):
    if not (isinstance(a, int) and isinstance(b, int)):
        raise EvaluationError("mod expects integers")
    if b == 0:
        raise EvaluationError("division by zero")
    return a % b


def _pow_float(a, b):
    try:
        return float(a) ** float(b)
    except (OverflowError, ZeroDivisionError) as e:
        raise EvaluationError(str(e)) from None


def _pow_int(a, b):
    if not (isinstance(a, int) and isinstance(b, int)):
        return _pow_float(a, b)
    if b < 0 and a not in (1, -1):
        raise EvaluationError("negative integer exponent")
    if abs(b) > 4096:
        raise EvaluationError("exponent too large")
    return a ** b if b >= 0 else int(a ** b)


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "//": _int_div,
    "mod": _mod,
    "**": _pow_float,
    "^": _pow_int,
    "min": min,
    "max": max,
}
_UNARY = {"-": lambda a: -a, "+": lambda a: a, "abs": abs}


def eval_arith(t, b):
    t = deref(t, b)
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        raise ProgramError("arithmetic on an unbound variable")
    if isinstance(t, Struct):
        if len(t.args) == 2 and t.name in _BINARY:
            x, y = eval_arith(t.args[0], b), eval_arith(t.args[1], b)
            return _num(_BINARY[t.name](x, y))
        if len(t.args) == 1 and t.name in _UNARY:
            return _num(_UNARY[t.name](eval_arith(t.args[0], b)))
    raise EvaluationError(f"not an arithmetic expression: {t!r}")


# -- builtins -------------------------------------------------------------------
# Each builtin maps (args, bindings) to an iterable of alternatives; an
# alternative is a list of term pairs still to be unified.

_YES = ([],)
_NO = ()


def _test(ok):
    return _YES if ok else _NO


def _compare(op):
    def run(args, b):
        x, y = eval_arith(args[0], b), eval_arith(args[1], b)
        return _test(op(x, y))
    return run


def _bi_is(args, b):
    return ([(args[0], Num(eval_arith(args[1], b)))],)


def _bi_neq(args, b):
    trial = dict(b)
    return _test(not unify(args[0], args[1], trial))


def _bi_length(args, b):
    lst, n = deref(args[0], b), deref(args[1], b)
    if not isinstance(n, (Var, Num)) or (isinstance(n, Num) and not isinstance(n.value, int)):
        raise ProgramError("length/2: length must be an integer")
    k = 0
    t = lst
    while isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
        k += 1
        t = deref(t.args[1], b)
    if t == NIL:
        return ([(n, Num(k))],)
    if not isinstance(t, Var):
        return _NO
    if isinstance(n, Num):
        if n.value < k:
            return _NO
        return ([(t, mklist([fresh_var("_E") for _ in range(n.value - k)]))],)

    def grow():
        extra = 0
        while True:
            yield [(t, mklist([fresh_var("_E") for _ in range(extra)])), (n, Num(k + extra))]
            extra += 1
    return grow()


def _bi_arg(args, b):
    n, t, a = deref(args[0], b), deref(args[1], b), args[2]
    if isinstance(t, Var):
        raise ProgramError("arg/3: unbound term")
    if not isinstance(t, Struct):
        raise ProgramError("arg/3: term must be compound")
    if isinstance(n, Num) and isinstance(n.value, int):
        if 1 <= n.value <= len(t.args):
            return ([(a, t.args[n.value - 1])],)
        return _NO
    if isinstance(n, Var):
        return ([(n, Num(i + 1)), (a, x)] for i, x in enumerate(t.args))
    raise ProgramError("arg/3: index must be an integer")


BUILTINS = {
    ("=", 2): lambda a, b: ([(a[0], a[1])],),
    ("\\=", 2): _bi_neq,
    ("==", 2): lambda a, b: _test(resolve(a[0], b) == resolve(a[1], b)),
    ("\\==", 2): lambda a, b: _test(resolve(a[0], b) != resolve(a[1], b)),
    ("is", 2): _bi_is,
    ("<", 2): _compare(lambda x, y: x < y),
    (">", 2): _compare(lambda x, y: x > y),
    ("=<", 2): _compare(lambda x, y: x <= y),
    (">=", 2): _compare(lambda x, y: x >= y),
    ("=:=", 2): _compare(lambda x, y: x == y),
    ("=\\=", 2): _compare(lambda x, y: x != y),
    ("length", 2): _bi_length,
    ("arg", 3): _bi_arg,
    ("true", 0): lambda a, b: _YES,
    ("fail", 0): lambda a, b: _NO,
    ("var", 1): lambda a, b: _test(isinstance(deref(a[0], b), Var)),
    ("nonvar", 1): lambda a, b: _test(not isinstance(deref(a[0], b), Var)),
    ("atom", 1): lambda a, b: _test(isinstance(deref(a[0], b), Atom)),
    ("number", 1): lambda a, b: _test(isinstance(deref(a[0], b), Num)),
    ("integer", 1): lambda a, b: _test(isinstance(deref(a[0], b), Num)
                                       and isinstance(deref(a[0], b).value, int)),
    ("ground", 1): lambda a, b: _test(is_ground(resolve(a[0], b))),
}


def is_builtin(key):
    return key in BUILTINS


def run_builtin(key, args, b):
    """Alternatives of a builtin call, as lists of pairs to unify."""
    return BUILTINS[key](args, b)


# -- machine ----------------------------------------------------------------------

class _Halt(Exception):
    def __init__(self, outcome):
        self.outcome = outcome


class _Activation:
    __slots__ = ("clause_id", "varmap")

    def __init__(self, clause_id, varmap):
        self.clause_id, self.varmap = clause_id, varmap


class _Compiled:
    __slots__ = ("clause_id", "head", "body", "vars", "n_goals")

    def __init__(self, clause_id, clause):
        self.clause_id = clause_id
        self.head = clause.head
        self.body = clause.body
        self.vars = clause.variables()
        self.n_goals = sum(1 for lit in clause.body if not isinstance(lit, Assertion))


class Machine:
    def __init__(self, program, budget=None, checks=False, tracing=False, max_solutions=None):
        self.budget = budget or Budget()
        self.checks = checks
        self.tracing = tracing
        self.max_solutions = max_solutions
        self.preds = {}
        for key, clauses in program.predicates().items():
            self.preds[key] = [_Compiled((key, i), c) for i, c in enumerate(clauses)]
        self.events = []
        self.steps = 0

    # continuation nodes are tuples (item, next)
    def _body(self, comp, varmap, depth, barrier, rest, goal):
        act = _Activation(comp.clause_id, varmap) if self.tracing else None
        items = []
        idx = 0
        for lit in comp.body:
            if isinstance(lit, Assertion):
                if self.checks and lit.status == "check":
                    items.append(("check", lit, varmap))
                continue
            if self.tracing:
                items.append(("point", act, idx))
            items.append(("call", substitute(lit, varmap), depth + 1, barrier))
            idx += 1
        if self.tracing:
            items.append(("point", act, idx))
            items.append(("exit", comp.clause_id[0], goal))
        node = rest
        for it in reversed(items):
            node = (it, node)
        return node

    def _snapshot(self, act, idx):
        b = self.bindings
        snap = {v: resolve(act.varmap[v], b) for v in act.varmap}
        self.events.append(PointSnapshot(act.clause_id, idx, snap))

    def _try_clauses(self, goal, key, start, depth, rest):
        clauses = self.preds[key]
        barrier = len(self.cps)
        b = self.bindings
        for j in range(start, len(clauses)):
            comp = clauses[j]
            mark = len(self.trail)
            varmap = {v: Var(v.name, next(self._ids)) for v in comp.vars}
            head = substitute(comp.head, varmap)
            if unify(head, goal, b, self.trail):
                if j + 1 < len(clauses):
                    self.cps.append(("clauses", mark, goal, key, j + 1, depth, rest))
                return True, self._body(comp, varmap, depth, barrier, rest, goal)
            self._undo(mark)
        return False, None

    def _undo(self, mark):
        b, trail = self.bindings, self.trail
        while len(trail) > mark:
            del b[trail.pop()]

    def _apply_alternatives(self, it, rest, mark):
        for pairs in it:
            ok = True
            for x, y in pairs:
                if not unify(x, y, self.bindings, self.trail):
                    ok = False
                    break
            if ok:
                return True
            self._undo(mark)
        return False

    def _backtrack(self):
        """Resume the most recent choicepoint; returns the continuation or raises StopIteration."""
        while self.cps:
            cp = self.cps.pop()
            self._undo(cp[1])
            if cp[0] == "clauses":
                _, mark, goal, key, j, depth, rest = cp
                ok, node = self._try_clauses(goal, key, j, depth, rest)
                if ok:
                    return node, True
            else:
                _, mark, it, rest = cp
                if self._apply_alternatives(it, rest, mark):
                    self.cps.append(cp)
                    return rest, True
        return None, False

    def run(self, goal):
        self.bindings = {}
        self.trail = []
        self.cps = []
        self._ids = _IDS
        goal_vars = term_vars(goal)
        solutions = []
        node = (("call", goal, 0, 0), None)
        budget = self.budget
        while True:
            if node is None:
                solutions.append({v: resolve(v, self.bindings) for v in goal_vars})
                if self.max_solutions is not None and len(solutions) >= self.max_solutions:
                    return Solutions(solutions)
                node, ok = self._backtrack()
                if not ok:
                    return Solutions(solutions)
                continue
            self.steps += 1
            if self.steps > budget.max_steps:
                return ResourceLimit("steps", self.steps)
            item, rest = node
            kind = item[0]
            if kind == "call":
                _, g, depth, barrier = item
                if depth > budget.max_depth:
                    return ResourceLimit("depth", self.steps)
                g = deref(g, self.bindings)
                if isinstance(g, Var):
                    raise ProgramError("unbound goal")
                if isinstance(g, Num):
                    raise ProgramError(f"goal is not callable: {g!r}")
                if g == Atom("!"):
                    del self.cps[barrier:]
                    node = rest
                    continue
                if isinstance(g, Struct) and g.name == "," and len(g.args) == 2:
                    node = (("call", g.args[0], depth, barrier),
                            (("call", g.args[1], depth, barrier), rest))
                    continue
                key = functor(g)
                if key in self.preds:
                    if self.tracing:
                        self.events.append(PredEvent(key, "calls", tuple(
                            resolve(a, self.bindings) for a in getattr(g, "args", ()))))
                    ok, nxt = self._try_clauses(g, key, 0, depth, rest)
                elif key in BUILTINS:
                    args = g.args if isinstance(g, Struct) else ()
                    mark = len(self.trail)
                    it = iter(run_builtin(key, args, self.bindings))
                    ok = self._apply_alternatives(it, rest, mark)
                    if ok and key in _NONDET:
                        self.cps.append(("builtin", mark, it, rest))
                    nxt = rest
                else:
                    raise UndefinedPredicate(key)
                if not ok:
                    node, ok = self._backtrack()
                    if not ok:
                        return Solutions(solutions)
                else:
                    node = nxt
            elif kind == "point":
                self._snapshot(item[1], item[2])
                node = rest
            elif kind == "exit":
                g = item[2]
                self.events.append(PredEvent(item[1], "success", tuple(
                    resolve(a, self.bindings) for a in getattr(g, "args", ()))))
                node = rest
            elif kind == "check":
                a, varmap = item[1], item[2]
                props = [substitute(p, varmap) for p in a.calls]
                failing = eval_check(props, self.bindings)
                if failing is not None:
                    witness = {}
                    for p in props:
                        for v in term_vars(p):
                            witness.setdefault(v.name, resolve(v, self.bindings))
                    return CheckError(a.location, _source_prop(a, props, failing), witness, a)
                node = rest
            else:  # pragma: no cover
                raise AssertionError(kind)


_IDS = count(1_000_000_000)
_NONDET = {("length", 2), ("arg", 3)}


def _source_prop(a, renamed, failing):
    for src, ren in zip(a.calls, renamed):
        if ren is failing:
            return src
    return failing


def solve(program, goal, budget=None, max_solutions=None):
    """All answers of ``goal`` in SLD order, or ResourceLimit when the budget runs out."""
    return Machine(program, budget, max_solutions=max_solutions).run(goal)


def run_instrumented(program, goal, budget=None, max_solutions=None):
    """Like :func:`solve` but evaluates ``check`` literals; halts at the first violation."""
    return Machine(program, budget, checks=True, max_solutions=max_solutions).run(goal)


def trace(program, goal, budget=None, max_solutions=None, checks=False):
    """Run ``goal`` recording a snapshot at every program point plus predicate call/exit events."""
    m = Machine(program, budget, checks=checks, tracing=True, max_solutions=max_solutions)
    try:
        outcome = m.run(goal)
    except (ProgramError, UndefinedPredicate) as e:
        outcome = e
    return ExecutionTrace(m.events, outcome)
