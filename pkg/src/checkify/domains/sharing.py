"""Set-sharing domains: plain sharing, sharing with freeness and linearity, and cliques.

An asub lists the sharing groups: each group is the set of program variables
whose bindings contain one common run-time variable.  A variable in no group
is ground.  The ``shfr`` flavour also keeps definitely free and definitely
linear variables.  The ``share_clique`` flavour keeps the same groups but
prints maximal cliques compactly and widens large group sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations

from .. import faults
from ..properties import ground_type
from ..terms import Atom, Struct, Var, is_ground, list_items, mklist, occurrences, term_vars
from .base import Domain, DomainError

STAR_LIMIT = 1 << 14
CLIQUE_WIDEN = 64


@dataclass(frozen=True)
class ShAsub:
    vars: tuple
    sh: frozenset
    free: frozenset = frozenset()
    lin: frozenset = frozenset()
    bot: bool = False

    def __repr__(self):
        if self.bot:
            return "<bottom>"
        groups = sorted(sorted(v.name for v in g) for g in self.sh)
        return f"<sh={groups} free={sorted(v.name for v in self.free)}>"


def powerset(vs):
    vs = list(vs)
    return frozenset(frozenset(c) for c in chain.from_iterable(
        combinations(vs, r) for r in range(1, len(vs) + 1)))


def star(groups):
    """Closure of a group set under pairwise union."""
    out = set(groups)
    frontier = list(out)
    while frontier:
        new = []
        for g in frontier:
            for h in list(out):
                u = g | h
                if u not in out:
                    out.add(u)
                    new.append(u)
        if len(out) > STAR_LIMIT:
            raise DomainError("sharing closure too large")
        frontier = new
    return out


def _bin(a, b):
    return {g | h for g in a for h in b}


def _linear_term(t):
    seen = set()
    for v in occurrences(t):
        if v in seen:
            return False
        seen.add(v)
    return True


class SharingDomain(Domain):
    def __init__(self, flavour="sharing"):
        if flavour not in ("sharing", "shfr", "share_clique"):
            raise ValueError(flavour)
        self.flavour = flavour
        self.name = flavour
        self.freeness = flavour == "shfr"

    # -- construction ---------------------------------------------------------
    def _make(self, vars, sh, free=frozenset(), lin=frozenset()):
        vars = tuple(vars)
        vs = set(vars)
        sh = frozenset(g & vs for g in sh if g & vs)
        if self.flavour == "share_clique" and len(sh) > CLIQUE_WIDEN:
            sh = powerset(set().union(*sh))
        if not self.freeness:
            return ShAsub(vars, sh)
        nonground = set().union(*sh) if sh else set()
        free = frozenset(v for v in free if v in nonground)
        ground = vs - nonground
        lin = frozenset(v for v in lin if v in vs) | ground | free
        return ShAsub(vars, sh, free, lin)

    def bottom(self, vars):
        return ShAsub(tuple(vars), frozenset(), bot=True)

    def is_bottom(self, a):
        return a.bot

    def top(self, vars):
        return self._make(vars, powerset(vars))

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
        return a.sh <= b.sh and a.free >= b.free and a.lin >= b.lin

    def lub(self, a, b):
        if a.bot:
            return b
        if b.bot:
            return a
        b = self._align(a, b)
        return self._make(a.vars, a.sh | b.sh, a.free & b.free, a.lin & b.lin)

    def glb(self, a, b):
        if a.bot:
            return a
        if b.bot:
            return self.bottom(a.vars)
        b = self._align(a, b)
        sh = a.sh & b.sh
        nonground = set().union(*sh) if sh else set()
        if not (a.free | b.free) <= nonground:
            return self.bottom(a.vars)
        return self._make(a.vars, sh, a.free | b.free, a.lin | b.lin)

    def extend(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        if a.bot:
            return self.bottom(a.vars + new)
        singles = {frozenset((v,)) for v in new}
        return self._make(a.vars + new, a.sh | singles, a.free | set(new), a.lin | set(new))

    def extend_unknown(self, a, vars):
        new = tuple(v for v in vars if v not in a.vars)
        if a.bot:
            return self.bottom(a.vars + new)
        return self._make(a.vars + new, a.sh | powerset(new), a.free, a.lin)

    def project(self, a, vars):
        if a.bot:
            return self.bottom(vars)
        return self._make(vars, a.sh, a.free, a.lin)

    def rename(self, a, mapping):
        vars = tuple(mapping.get(v, v) for v in a.vars)
        if a.bot:
            return self.bottom(vars)
        m = lambda s: frozenset(mapping.get(v, v) for v in s)
        return ShAsub(vars, frozenset(m(g) for g in a.sh), m(a.free), m(a.lin))

    def combine(self, a, b):
        if a.bot or b.bot:
            return self.bottom(a.vars + b.vars)
        return self._make(a.vars + b.vars, a.sh | b.sh, a.free | b.free, a.lin | b.lin)

    # -- unification ----------------------------------------------------------
    def _independent(self, a, xs, ys):
        return not any(g & xs and g & ys for g in a.sh)

    def _lin_term(self, a, t):
        if isinstance(t, Var):
            return t in a.lin
        tv = term_vars(t)
        if not _linear_term(t):
            # repeated occurrences only matter for nonground variables
            nonground = set().union(*a.sh) if a.sh else set()
            counts = {}
            for v in occurrences(t):
                counts[v] = counts.get(v, 0) + 1
            if any(n > 1 and v in nonground for v, n in counts.items()):
                return False
        if not all(v in a.lin for v in tv):
            return False
        return all(self._independent(a, {u}, {w}) for u, w in combinations(tv, 2))

    def amgu(self, a, x, t):
        if a.bot:
            return a
        tv = set(term_vars(t))
        rx = {g for g in a.sh if x in g}
        rt = {g for g in a.sh if g & tv}
        irr = set(a.sh) - rx - rt
        if not rx or not rt:
            # one side is ground: the other becomes ground too, and any variable
            # that shared with it may have been bound, so it is no longer known free
            touched = set().union(*rx, *rt)
            return self._make(a.vars, irr, a.free - touched, a.lin)
        if self.freeness:
            indep = self._independent(a, {x}, tv)
            lin_x = x in a.lin
            lin_t = self._lin_term(a, t)
            rx2 = rx if (indep and lin_t) else star(rx)
            rt2 = rt if (indep and lin_x) else star(rt)
        else:
            rx2, rt2 = star(rx), star(rt)
        sh = irr | _bin(rx2, rt2)
        if not self.freeness:
            return self._make(a.vars, sh)
        affected = set().union(*rx, *rt)
        x_free = x in a.free
        t_free = isinstance(t, Var) and t in a.free
        free = set(a.free)
        if x_free and t_free:
            pass
        elif x_free:
            free -= set().union(*rx)
        elif t_free:
            free -= set().union(*rt)
        else:
            free -= affected
        lin = set(a.lin) - affected
        vx, vt = set().union(*rx), set().union(*rt)
        # binding a free variable leaves the other side's bindings untouched
        if x_free:
            lin |= (vt - vx) & a.lin
            if lin_t and indep:
                lin.add(x)
        if t_free:
            lin |= (vx - vt) & a.lin
            if lin_x and indep:
                lin.add(t)
        return self._make(a.vars, sh, free, lin | free)

    def subterm(self, a, t, s):
        if a.bot:
            return a
        tv = set(term_vars(t))
        keep = {g for g in a.sh if s not in g}
        rt = {g for g in keep if g & tv}
        sh = keep | {g | {s} for g in rt}
        return self._make(a.vars, sh, a.free - {s}, a.lin - {s})

    # -- properties -----------------------------------------------------------
    @staticmethod
    def _var_items(t):
        return [v for v in list_items(t)[0] if isinstance(v, Var)]

    def expresses(self, p):
        if isinstance(p, Atom):
            return p.name == "unreachable"
        if not isinstance(p, Struct):
            return False
        if p.name in ("ground", "mshare", "clique") and len(p.args) == 1:
            return True
        if self.freeness and p.name in ("var", "free", "linear") and len(p.args) == 1:
            return True
        return False

    def from_properties(self, vars, props):
        vars = tuple(vars)
        sh = set(powerset(vars))
        free, lin = set(), set()
        allowed, cliques, universe = None, [], set()
        for p in props:
            if isinstance(p, Atom):
                if p.name == "unreachable":
                    return self.bottom(vars)
                continue
            if not isinstance(p, Struct):
                continue
            n, args = p.name, p.args
            if len(args) == 1:
                arg = args[0]
                if n in ("ground", "num", "int", "atom"):
                    gv = set(term_vars(arg))
                    sh = {g for g in sh if not g & gv}
                elif n == "var" and isinstance(arg, Var):
                    free.add(arg)
                elif n == "free":
                    free.update(self._var_items(arg))
                elif n == "linear":
                    lin.update(self._var_items(arg))
                elif n == "mshare":
                    allowed = allowed or set()
                    for grp in list_items(arg)[0]:
                        g = frozenset(self._var_items(grp))
                        allowed.add(g)
                        universe |= g
                elif n == "clique":
                    c = frozenset(self._var_items(arg))
                    cliques.append(c)
                    universe |= c
            elif n == "list" and len(args) == 2 and ground_type(args[0]):
                gv = set(term_vars(args[1]))
                sh = {g for g in sh if not g & gv}
            elif n == "instance" and len(args) == 2 and is_ground(args[1]) \
                    and Atom("$top") not in set(_leaves(args[1])):
                sh = {g for g in sh if args[0] not in g}
        if allowed is not None:
            def ok(g):
                h = g & universe
                return not h or h in allowed or any(h <= c for c in cliques)
            sh = {g for g in sh if ok(g)}
        if not self.freeness:
            free, lin = set(), set()
        return self._make(vars, sh, free, lin)

    def _cliques(self, sh):
        """Maximal variable sets (size >= 3) whose every nonempty subset is a group."""
        nonground = sorted(set().union(*sh), key=lambda v: v.name) if sh else []
        found = []
        for r in range(len(nonground), 2, -1):
            for c in combinations(nonground, r):
                cs = frozenset(c)
                if any(cs <= f for f in found):
                    continue
                if all(g in sh for g in powerset(cs)):
                    found.append(cs)
        return found

    def to_properties(self, a):
        if a.bot:
            return [Atom("unreachable")]
        order = {v: i for i, v in enumerate(a.vars)}
        srt = lambda s: sorted(s, key=order.__getitem__)
        nonground = set().union(*a.sh) if a.sh else set()
        ground = [v for v in a.vars if v not in nonground]
        if faults.active("spurious_ground_vars"):
            lone = [v for v in a.vars if v in nonground
                    and all(g == frozenset((v,)) for g in a.sh if v in g)]
            ground = srt(set(ground) | set(lone))
        out = []
        if ground:
            out.append(Struct("ground", (mklist(ground),)))
        groups = set(a.sh)
        cliques = self._cliques(a.sh) if self.flavour == "share_clique" else []
        for c in cliques:
            groups = {g for g in groups if not g <= c}
        glist = sorted((srt(g) for g in groups), key=lambda g: (len(g), [order[v] for v in g]))
        out.append(Struct("mshare", (mklist([mklist(g) for g in glist]),)))
        for c in cliques:
            out.append(Struct("clique", (mklist(srt(c)),)))
        if self.freeness:
            if a.free:
                out.append(Struct("free", (mklist(srt(a.free)),)))
            lin = [v for v in srt(a.lin) if v in nonground and v not in a.free]
            if lin:
                out.append(Struct("linear", (mklist(lin),)))
        return out

    def alpha(self, binding, vars):
        vars = tuple(vars)
        terms = {v: binding[v] for v in vars}
        occ = {}
        for v in vars:
            for u in term_vars(terms[v]):
                occ.setdefault(u, set()).add(v)
        sh = {frozenset(g) for g in occ.values()}
        free = {v for v in vars if isinstance(terms[v], Var)}
        lin = {v for v in vars if _linear_term(terms[v])}
        return self._make(vars, sh, free, lin)

    def gamma_member(self, binding, a):
        if a.bot:
            return False
        return self.leq(self.alpha(binding, a.vars), a)


def _leaves(t):
    if isinstance(t, Struct):
        for x in t.args:
            yield from _leaves(x)
    else:
        yield t
