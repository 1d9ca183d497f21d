"""The concrete domain: an asub is a finite set of bindings.

Running the analyzer over it from a singleton entry behaves like a tabling
interpreter, which makes it a reference for the per-point states of a trace.
Bindings are stored as tuples of terms in canonical variable form, so two
bindings that differ only by renaming are one element.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice

from ..engine import ProgramError, UndefinedPredicate, is_builtin, run_builtin
from ..properties import eval_check
from ..terms import Atom, Struct, Var, canonical, rename_fresh, resolve, unify
from .base import Domain, DomainError


class CardinalityLimit(DomainError):
    pass


@dataclass(frozen=True)
class ConcAsub:
    vars: tuple
    rows: frozenset

    @property
    def bot(self):
        return not self.rows

    def bindings(self):
        """Each row as a ``{var: term}`` dict with fresh run-time variables."""
        for row in self.rows:
            terms, _ = rename_fresh(Struct("t", row)) if row else (Struct("t", ()), {})
            yield dict(zip(self.vars, terms.args))


def _canon(terms):
    return canonical(tuple(terms))


class ConcreteDomain(Domain):
    name = "concrete"

    def __init__(self, cap=5000, max_alternatives=64):
        self.cap = cap
        self.max_alternatives = max_alternatives

    def _make(self, vars, rows):
        rows = frozenset(rows)
        if len(rows) > self.cap:
            raise CardinalityLimit(f"more than {self.cap} bindings at one point")
        return ConcAsub(tuple(vars), rows)

    def bottom(self, vars):
        return ConcAsub(tuple(vars), frozenset())

    def is_bottom(self, a):
        return not a.rows

    def top(self, vars):
        raise DomainError("the concrete domain needs explicit entry bindings")

    def singleton(self, vars, terms):
        return self._make(vars, {_canon(terms)})

    def vars(self, a):
        return a.vars

    def _align(self, a, b):
        return b if a.vars == b.vars else self.project(b, a.vars)

    def leq(self, a, b):
        return a.rows <= self._align(a, b).rows

    def lub(self, a, b):
        return self._make(a.vars, a.rows | self._align(a, b).rows)

    def glb(self, a, b):
        return ConcAsub(a.vars, a.rows & self._align(a, b).rows)

    def extend(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        fresh = tuple(Var(f"_N{i}", -2) for i in range(len(new)))
        return self._make(a.vars + new, {_canon(r + fresh) for r in a.rows})

    def extend_unknown(self, a, vars):
        raise DomainError("the concrete domain cannot add unknown bindings")

    def project(self, a, vars):
        vars = tuple(vars)
        idx = [a.vars.index(v) for v in vars]
        return self._make(vars, {_canon(tuple(r[i] for i in idx)) for r in a.rows})

    def rename(self, a, mapping):
        return ConcAsub(tuple(mapping.get(v, v) for v in a.vars), a.rows)

    def combine(self, a, b):
        rows = set()
        for r in a.rows:
            for s in b.rows:
                moved, _ = rename_fresh(Struct("t", s))
                rows.add(_canon(r + moved.args))
        return self._make(a.vars + b.vars, rows)

    def split(self, a):
        return [ConcAsub(a.vars, frozenset((r,))) for r in a.rows]

    def _each(self, a, step):
        """Apply ``step(binding_dict, store)`` to every row; it yields result stores."""
        rows = set()
        for env in a.bindings():
            for store in step(env):
                rows.add(_canon(resolve(env[v], store) for v in a.vars))
                if len(rows) > self.cap:
                    raise CardinalityLimit(f"more than {self.cap} bindings at one point")
        return ConcAsub(a.vars, frozenset(rows))

    def unify(self, a, t1, t2):
        def step(env):
            store = {}
            if unify(_inst(t1, env), _inst(t2, env), store):
                yield store
        return self._each(a, step)

    def amgu(self, a, x, t):
        return self.unify(a, x, t)

    def builtin(self, a, key, args):
        if not is_builtin(key):
            return NotImplemented

        def step(env):
            inst = [_inst(t, env) for t in args]
            try:
                alts = list(islice(run_builtin(key, inst, {}), self.max_alternatives + 1))
            except (ProgramError, UndefinedPredicate):
                return
            if len(alts) > self.max_alternatives:
                raise CardinalityLimit(f"{key[0]}/{key[1]} has too many solutions")
            for alt in alts:
                store = {}
                if all(unify(l, r, store) for l, r in alt):
                    yield store
        return self._each(a, step)

    def subterm(self, a, t, s):
        raise DomainError("subterm is handled by running the builtin")

    def entails(self, a, props):
        return all(eval_check(props, env) is None for env in a.bindings())

    def restrict(self, a, props):
        keep = set()
        for row, env in zip(a.rows, a.bindings()):
            if eval_check(props, env) is None:
                keep.add(row)
        return ConcAsub(a.vars, frozenset(keep))

    def expresses(self, p):
        return True

    def from_properties(self, vars, props):
        raise DomainError("the concrete domain has no property abstraction")

    def to_properties(self, a):
        return [Atom("unreachable")] if not a.rows else []

    def alpha(self, binding, vars):
        return ConcAsub(tuple(vars), frozenset((_canon(binding[v] for v in vars),)))

    def gamma_member(self, binding, a):
        return _canon(binding[v] for v in a.vars) in a.rows


def _inst(t, env):
    if isinstance(t, Var):
        return env.get(t, t)
    if isinstance(t, Struct):
        return Struct(t.name, tuple(_inst(x, env) for x in t.args))
    return t
