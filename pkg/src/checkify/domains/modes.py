"""Simple modes domain: ground / var / ngv / nonvar / nonground / any per variable.

A value is a set of instantiation classes: G (ground), V (free variable) and
N (neither).  The seven lattice points are the sets that can be written with
those names; ``{G, V}`` has no name and is widened to ``any``.  Besides the
per-variable value the asub keeps the set of variable pairs that may share,
which is what lets unification update aliased variables soundly.  Pairs are
never printed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .. import faults
from ..properties import ground_type
from ..terms import Atom, Struct, Var, is_ground, occurrences, term_vars
from .base import Domain

G, V, N = 1, 2, 4
ANY = G | V | N
NAMES = {G: "ground", V: "var", N: "ngv", G | N: "nonvar", V | N: "nonground", ANY: "any"}
BY_NAME = {"ground": G, "var": V, "ngv": N, "nonvar": G | N, "nonground": V | N,
           "any": ANY, "term": ANY, "gnd": G}
VALUES = (0, G, V, N, G | N, V | N, ANY)


def normalize(m):
    return ANY if m == G | V else m


def close(m):
    """Values reachable from ``m`` by further instantiation."""
    if m & V:
        m |= N | G
    if m & N:
        m |= G
    return m


def _pair(x, y):
    return frozenset((x, y))


@dataclass(frozen=True)
class ModesAsub:
    vars: tuple
    cls: tuple
    pairs: frozenset = frozenset()
    bot: bool = False

    def value(self, v):
        return self.cls[self.vars.index(v)]

    def as_dict(self):
        return dict(zip(self.vars, self.cls))

    def __repr__(self):
        if self.bot:
            return "<bottom>"
        return "{" + ", ".join(f"{v!r}:{NAMES.get(c, c)}" for v, c in zip(self.vars, self.cls)) + "}"


def _make(vars, cls_map, pairs):
    vars = tuple(vars)
    cls = tuple(normalize(cls_map[v]) for v in vars)
    if any(c == 0 for c in cls):
        return ModesAsub(vars, (0,) * len(vars), frozenset(), True)
    ground = {v for v, c in zip(vars, cls) if c == G}
    vs = set(vars)
    pairs = frozenset(p for p in pairs if not (p & ground) and p <= vs and len(p) == 2)
    return ModesAsub(vars, cls, pairs)


class ModesDomain(Domain):
    name = "modes"

    def bottom(self, vars):
        vars = tuple(vars)
        return ModesAsub(vars, (0,) * len(vars), frozenset(), True)

    def is_bottom(self, a):
        return a.bot

    def top(self, vars):
        vars = tuple(vars)
        return ModesAsub(vars, (ANY,) * len(vars),
                         frozenset(_pair(x, y) for x, y in combinations(vars, 2)))

    def vars(self, a):
        return a.vars

    def _align(self, a, b):
        if a.vars == b.vars:
            return b
        return self.project(b, a.vars)

    def leq(self, a, b):
        if a.bot:
            return True
        if b.bot:
            return False
        b = self._align(a, b)
        return all(x & ~y == 0 for x, y in zip(a.cls, b.cls)) and a.pairs <= b.pairs

    def lub(self, a, b):
        if a.bot:
            return b
        if b.bot:
            return a
        b = self._align(a, b)
        return _make(a.vars, {v: x | y for v, x, y in zip(a.vars, a.cls, b.cls)}, a.pairs | b.pairs)

    def glb(self, a, b):
        if a.bot:
            return a
        if b.bot:
            return self.bottom(a.vars)
        b = self._align(a, b)
        return _make(a.vars, {v: x & y for v, x, y in zip(a.vars, a.cls, b.cls)}, a.pairs & b.pairs)

    def extend(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        if a.bot:
            return self.bottom(a.vars + new)
        return ModesAsub(a.vars + new, a.cls + (V,) * len(new), a.pairs)

    def extend_unknown(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        if a.bot:
            return self.bottom(a.vars + new)
        return ModesAsub(a.vars + new, a.cls + (ANY,) * len(new), a.pairs)

    def project(self, a, vars):
        vars = tuple(vars)
        if a.bot:
            return self.bottom(vars)
        d = a.as_dict()
        return _make(vars, {v: d[v] for v in vars}, a.pairs)

    def rename(self, a, mapping):
        vars = tuple(mapping.get(v, v) for v in a.vars)
        if a.bot:
            return self.bottom(vars)
        pairs = frozenset(frozenset(mapping.get(v, v) for v in p) for p in a.pairs)
        return ModesAsub(vars, a.cls, pairs)

    def combine(self, a, b):
        if a.bot or b.bot:
            return self.bottom(a.vars + b.vars)
        return ModesAsub(a.vars + b.vars, a.cls + b.cls, a.pairs | b.pairs)

    # -- unification ------------------------------------------------------------
    def term_class(self, c, t):
        if isinstance(t, Var):
            return c[t]
        vs = term_vars(t)
        m = 0
        if all(c[v] & G for v in vs):
            m |= G
        if any(c[v] & (V | N) for v in vs):
            m |= N
        return m

    def amgu(self, a, x, t):
        if a.bot:
            return a
        c = a.as_dict()
        pairs = set(a.pairs)
        blind = faults.active("modes_aliasing_blind")

        def sharers(v):
            return {w for p in pairs if v in p for w in p if w != v}

        if isinstance(t, Var) and c[x] != V and c[t] == V:
            x, t = t, x
        tvars = [v for v in term_vars(t) if c[v] != G]
        linked = set(tvars)
        for v in tvars:
            linked |= sharers(v)
        sx = sharers(x)
        if c[x] == V:
            ct = self.term_class(c, t)
            if isinstance(t, Var) or blind:
                newx = ct
            else:
                newx = close(ct) & ~V
            if not blind:
                for w in sx:
                    add = 0
                    if c[w] & V:
                        add |= ct
                    if c[w] & N and ct & G:
                        add |= G
                    c[w] |= add
            c[x] = newx
            for p in {x} | sx:
                for q in linked:
                    if p != q:
                        pairs.add(_pair(p, q))
            return _make(a.vars, c, pairs)
        # general case: both sides may already be bound
        cx, ct = c[x], self.term_class(c, t)
        r = close(cx) & close(ct)
        if not isinstance(t, Var) or not (cx & V) or not (ct & V):
            r &= ~V
        if r == 0:
            return self.bottom(a.vars)
        c[x] = r
        if isinstance(t, Var):
            c[t] = r
        elif r == G:
            for v in tvars:
                c[v] = G
        else:
            for v in tvars:
                c[v] = close(c[v])
        if not blind:
            for w in (sx | linked) - {x} - set(tvars):
                c[w] = close(c[w])
        group = ({x} | sx | linked)
        for p, q in combinations(group, 2):
            pairs.add(_pair(p, q))
        return _make(a.vars, c, pairs)

    def subterm(self, a, t, s):
        if a.bot:
            return a
        c = a.as_dict()
        tvars = [v for v in term_vars(t) if c[v] != G]
        if not tvars:
            c[s] = G
            return _make(a.vars, c, a.pairs)
        c[s] = ANY
        pairs = set(a.pairs)
        linked = set(tvars)
        for v in tvars:
            linked |= {w for p in a.pairs if v in p for w in p}
        for q in linked:
            if q != s:
                pairs.add(_pair(s, q))
        return _make(a.vars, c, pairs)

    # -- properties -------------------------------------------------------------
    def _prop_mask(self, p):
        """``(variables, mask)`` a property imposes, or None when it says nothing here."""
        if isinstance(p, Atom):
            return ("bottom", 0) if p.name == "unreachable" else None
        if not isinstance(p, Struct):
            return None
        name, args = p.name, p.args
        if len(args) == 1:
            arg = args[0]
            if name in BY_NAME:
                m = BY_NAME[name]
            elif name in ("list",):
                m = G | N
            elif name in ("num", "int", "atom", "atomic"):
                m = G
            elif name == "free":
                return ([v for v in _items(arg) if isinstance(v, Var)], V)
            else:
                return None
            if name == "ground" and not isinstance(arg, Var):
                return ([v for v in term_vars(arg)], G)
            return ([arg], m) if isinstance(arg, Var) else None
        if name == "list" and len(args) == 2 and isinstance(args[1], Var):
            return ([args[1]], G if ground_type(args[0]) else G | N)
        if name == "instance" and len(args) == 2 and isinstance(args[0], Var):
            pat = args[1]
            if isinstance(pat, Var) or pat == Atom("$top"):
                return None
            if is_ground(pat) and Atom("$top") not in _leaves(pat):
                return ([args[0]], G)
            return ([args[0]], G | N)
        return None

    def expresses(self, p):
        return (isinstance(p, Struct) and len(p.args) == 1 and p.name in BY_NAME
                and isinstance(p.args[0], Var))

    def from_properties(self, vars, props):
        a = self.top(vars)
        c = a.as_dict()
        for p in props:
            r = self._prop_mask(p)
            if r is None:
                continue
            vs, m = r
            if vs == "bottom":
                return self.bottom(vars)
            for v in vs:
                if v in c:
                    c[v] &= m
        return _make(a.vars, c, a.pairs)

    def to_properties(self, a):
        if a.bot:
            return [Atom("unreachable")]
        out = []
        for v, m in zip(a.vars, a.cls):
            if m == N:
                out.append(Struct("nonground", (v,)))
                out.append(Struct("nonvar", (v,)))
            else:
                out.append(Struct(NAMES[m], (v,)))
        return out

    @staticmethod
    def concrete_class(t):
        if isinstance(t, Var):
            return V
        return G if is_ground(t) else N

    def alpha(self, binding, vars):
        vars = tuple(vars)
        terms = {v: binding[v] for v in vars}
        c = {v: self.concrete_class(terms[v]) for v in vars}
        occ = {v: set(occurrences(terms[v])) for v in vars}
        pairs = {_pair(x, y) for x, y in combinations(vars, 2) if occ[x] & occ[y]}
        return _make(vars, c, pairs)

    def gamma_member(self, binding, a):
        if a.bot:
            return False
        b = self.alpha(binding, a.vars)
        if b.bot:
            return False
        return self.leq(b, a)


def _items(t):
    out = []
    while isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
        out.append(t.args[0])
        t = t.args[1]
    return out


def _leaves(t):
    if isinstance(t, Struct):
        for a in t.args:
            yield from _leaves(a)
    else:
        yield t
