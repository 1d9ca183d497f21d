"""Depth-k patterns: each variable is approximated by a term cut at depth k.

Leaves below the cut, and run-time variables, become the wildcard ``TOP``.
A pattern stands for every instance of it, so the set of represented terms
is closed under instantiation and aliasing never needs to be tracked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import faults
from ..engine import EvaluationError, eval_arith
from ..terms import NIL, TOP, Atom, Num, Struct, Var, fresh_var, term_vars
from .base import Domain

_CLASH = object()


def truncate(p, k):
    if k <= 0:
        return TOP
    if isinstance(p, Struct):
        return Struct(p.name, tuple(truncate(a, k - 1) for a in p.args))
    return p


def pattern_of(t, env, k):
    """Pattern of term ``t`` where variables take their pattern from ``env``."""
    if isinstance(t, Var):
        return truncate(env.get(t, TOP), k)
    if k <= 0:
        return TOP
    if isinstance(t, Struct):
        return Struct(t.name, tuple(pattern_of(a, env, k - 1) for a in t.args))
    return t


def anti_unify(p, q):
    if p == q:
        return p
    if isinstance(p, Struct) and isinstance(q, Struct) and p.name == q.name \
            and len(p.args) == len(q.args):
        return Struct(p.name, tuple(anti_unify(a, b) for a, b in zip(p.args, q.args)))
    return TOP


def meet(p, q, inner=False):
    """Greatest common instance of two patterns, or ``_CLASH``."""
    if p == TOP and q == TOP:
        if inner and faults.active("depthk_glb_not_greatest"):
            return NIL
        return TOP
    if p == TOP:
        return q
    if q == TOP:
        return p
    if isinstance(p, Struct) and isinstance(q, Struct):
        if p.name != q.name or len(p.args) != len(q.args):
            return _CLASH
        args = []
        for a, b in zip(p.args, q.args):
            m = meet(a, b, True)
            if m is _CLASH:
                return _CLASH
            args.append(m)
        return Struct(p.name, tuple(args))
    return p if p == q else _CLASH


def instance_of(p, q):
    """True when every term described by ``p`` is described by ``q``."""
    if q == TOP:
        return True
    if p == TOP:
        return False
    if isinstance(q, Struct):
        return (isinstance(p, Struct) and p.name == q.name and len(p.args) == len(q.args)
                and all(instance_of(a, b) for a, b in zip(p.args, q.args)))
    return p == q


def is_concrete(p):
    if p == TOP:
        return False
    if isinstance(p, Struct):
        return all(is_concrete(a) for a in p.args)
    return True


@dataclass(frozen=True)
class DkAsub:
    vars: tuple
    pats: tuple
    bot: bool = False

    def as_dict(self):
        return dict(zip(self.vars, self.pats))

    def __repr__(self):
        if self.bot:
            return "<bottom>"
        return "{" + ", ".join(f"{v!r}:{p!r}" for v, p in zip(self.vars, self.pats)) + "}"


class DepthKDomain(Domain):
    def __init__(self, k=2):
        self.k = k
        self.name = "depthk"

    def _make(self, vars, env):
        vars = tuple(vars)
        return DkAsub(vars, tuple(truncate(env.get(v, TOP), self.k) for v in vars))

    def bottom(self, vars):
        vars = tuple(vars)
        return DkAsub(vars, (TOP,) * len(vars), True)

    def is_bottom(self, a):
        return a.bot

    def top(self, vars):
        vars = tuple(vars)
        return DkAsub(vars, (TOP,) * len(vars))

    def vars(self, a):
        return a.vars

    def _align(self, a, b):
        return b if a.vars == b.vars else self.project(b, a.vars)

    def leq(self, a, b):
        if a.bot:
            return True
        if b.bot:
            return False
        b = self._align(a, b)
        return all(instance_of(p, q) for p, q in zip(a.pats, b.pats))

    def lub(self, a, b):
        if a.bot:
            return b
        if b.bot:
            return a
        b = self._align(a, b)
        return DkAsub(a.vars, tuple(anti_unify(p, q) for p, q in zip(a.pats, b.pats)))

    def glb(self, a, b):
        if a.bot:
            return a
        if b.bot:
            return self.bottom(a.vars)
        b = self._align(a, b)
        pats = []
        for p, q in zip(a.pats, b.pats):
            m = meet(p, q)
            if m is _CLASH:
                return self.bottom(a.vars)
            pats.append(truncate(m, self.k))
        return DkAsub(a.vars, tuple(pats))

    def extend(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        return DkAsub(a.vars + new, a.pats + (TOP,) * len(new), a.bot)

    extend_unknown = extend

    def project(self, a, vars):
        vars = tuple(vars)
        if a.bot:
            return self.bottom(vars)
        d = a.as_dict()
        return DkAsub(vars, tuple(d[v] for v in vars))

    def rename(self, a, mapping):
        return DkAsub(tuple(mapping.get(v, v) for v in a.vars), a.pats, a.bot)

    def combine(self, a, b):
        return DkAsub(a.vars + b.vars, a.pats + b.pats, a.bot or b.bot)

    def amgu(self, a, x, t):
        if a.bot:
            return a
        env = a.as_dict()
        for _ in range(2):
            m = meet(env[x], pattern_of(t, env, self.k))
            if m is _CLASH:
                return self.bottom(a.vars)
            env[x] = truncate(m, self.k)
            if not self._push(env, t, m):
                return self.bottom(a.vars)
        return self._make(a.vars, env)

    def _push(self, env, t, m):
        """Refine the variables of ``t`` with the matching parts of pattern ``m``."""
        if m == TOP:
            return True
        if isinstance(t, Var):
            r = meet(env[t], m)
            if r is _CLASH:
                return False
            env[t] = truncate(r, self.k)
            return True
        if isinstance(t, Struct):
            if not isinstance(m, Struct) or m.name != t.name or len(m.args) != len(t.args):
                return False
            return all(self._push(env, a, p) for a, p in zip(t.args, m.args))
        return t == m

    def builtin(self, a, key, args):
        if a.bot:
            return a
        env = a.as_dict()

        def concrete(t):
            p = pattern_of(t, env, 10 ** 6)
            return p if is_concrete(p) else None

        if key == ("is", 2):
            e = concrete(args[1])
            if e is None:
                return NotImplemented
            try:
                val = Num(eval_arith(e, {}))
            except (EvaluationError, ArithmeticError, TypeError):
                return NotImplemented
            return self.unify(a, args[0], val)
        if key in (("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2)):
            l, r = concrete(args[0]), concrete(args[1])
            if l is None or r is None:
                return NotImplemented
            try:
                lv, rv = eval_arith(l, {}), eval_arith(r, {})
            except (EvaluationError, ArithmeticError, TypeError):
                return NotImplemented
            ok = {"<": lv < rv, ">": lv > rv, "=<": lv <= rv, ">=": lv >= rv,
                  "=:=": lv == rv, "=\\=": lv != rv}[key[0]]
            return a if ok else self.bottom(a.vars)
        return NotImplemented

    def subterm(self, a, t, s):
        return a

    def expresses(self, p):
        if isinstance(p, Atom):
            return p.name == "unreachable"
        return (isinstance(p, Struct) and p.name == "instance" and len(p.args) == 2
                and isinstance(p.args[0], Var))

    def from_properties(self, vars, props):
        a = self.top(vars)
        env = a.as_dict()
        for p in props:
            if p == Atom("unreachable"):
                return self.bottom(vars)
            if self.expresses(p) and p.args[0] in env:
                pat = _wild(p.args[1])
                m = meet(env[p.args[0]], pat)
                if m is _CLASH:
                    return self.bottom(vars)
                env[p.args[0]] = m
        return self._make(vars, env)

    def to_properties(self, a):
        if a.bot:
            return [Atom("unreachable")]
        return [Struct("instance", (v, _unwild(p))) for v, p in zip(a.vars, a.pats) if p != TOP]

    def alpha(self, binding, vars):
        vars = tuple(vars)
        return DkAsub(vars, tuple(pattern_of(binding[v], {}, self.k) for v in vars))

    def gamma_member(self, binding, a):
        if a.bot:
            return False
        return self.leq(self.alpha(binding, a.vars), a)


def _unwild(p):
    """Replace wildcards by distinct fresh variables, as a reader would."""
    if p == TOP:
        return fresh_var()
    if isinstance(p, Struct):
        return Struct(p.name, tuple(_unwild(x) for x in p.args))
    return p


def _wild(t):
    """Replace variables by the wildcard."""
    if isinstance(t, Var):
        return TOP
    if isinstance(t, Struct):
        return Struct(t.name, tuple(_wild(x) for x in t.args))
    return t
