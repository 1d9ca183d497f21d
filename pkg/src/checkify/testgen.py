"""Properties as generators: random and exhaustive goals satisfying call preconditions.

Terms live in a small bounded universe (a handful of atoms, small integers,
``f/1``, ``g/2`` and short lists).  The size of a term is its number of
nodes, except that a list counts one node for the whole spine plus its
elements.  Random generation draws a size from a geometric distribution and
then picks uniformly among the terms of that size, using exact counts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count, islice

from .modedefs import expand_assertion
from .properties import eval_check
from .terms import (NIL, Atom, Num, Struct, Var, list_items, mklist, rename_fresh, substitute,
                    term_vars)

_FRESH = count(1)


class NoGenerator(Exception):
    def __init__(self, prop):
        self.prop = prop
        super().__init__(f"no generator for property {prop}")


class Exhausted(Exception):
    pass


def fresh(name="_G"):
    return Var(name, next(_FRESH))


@dataclass(frozen=True)
class Universe:
    atoms: tuple = ("a", "b", "c", "g1", "g2")
    int_range: tuple = (-4, 4)
    functors: tuple = (("f", 1), ("g", 2))
    max_list: int = 6
    max_depth: int = 4
    max_size: int = 16

    @property
    def ints(self):
        return tuple(range(self.int_range[0], self.int_range[1] + 1))


DEFAULT_UNIVERSE = Universe()


# -- counting -----------------------------------------------------------------------

class _Counts:
    """Exact numbers of terms by (size, depth bound) for uniform sampling."""

    def __init__(self, u, ground):
        self.u = u
        self.ground = ground
        self.leaves = len(u.atoms) + len(u.ints) + 1 + (0 if ground else 1)  # +1 for []
        self.term = lru_cache(maxsize=None)(self._term)
        self.seq = lru_cache(maxsize=None)(self._seq)

    def _term(self, s, d):
        if s <= 0 or d <= 0:
            return 0
        if s == 1:
            return self.leaves
        total = 0
        for _, ar in self.u.functors:
            total += self.seq(ar, s - 1, d - 1)
        for n in range(1, self.u.max_list + 1):
            total += self.seq(n, s - 1, d - 1)
        return total

    def _seq(self, n, s, d):
        """Sequences of ``n`` terms of total size ``s``, each of depth <= d."""
        if n == 0:
            return 1 if s == 0 else 0
        if s < n:
            return 0
        return sum(self.term(i, d) * self.seq(n - 1, s - i, d) for i in range(1, s - n + 2))


class _Sampler:
    def __init__(self, u, rng, ground=False, reuse=0.2):
        self.u = u
        self.rng = rng
        self.counts = _counts(u, ground)
        self.ground = ground
        self.reuse = reuse
        self.vars = []

    def var(self):
        if self.vars and self.rng.random() < self.reuse:
            return self.rng.choice(self.vars)
        v = fresh()
        self.vars.append(v)
        return v

    def term(self, s, d=None):
        d = self.u.max_depth if d is None else d
        c = self.counts
        if c.term(s, d) == 0:
            raise ValueError(f"no term of size {s}")
        if s == 1:
            k = self.rng.randrange(c.leaves)
            if k < len(self.u.atoms):
                return Atom(self.u.atoms[k])
            k -= len(self.u.atoms)
            if k < len(self.u.ints):
                return Num(self.u.ints[k])
            k -= len(self.u.ints)
            return NIL if k == 0 else self.var()
        options = [("f", name, ar) for name, ar in self.u.functors]
        options += [("l", None, n) for n in range(1, self.u.max_list + 1)]
        weights = [c.seq(n, s - 1, d - 1) for _, _, n in options]
        kind, name, n = self.rng.choices(options, weights)[0]
        args = self.seq(n, s - 1, d - 1)
        return Struct(name, tuple(args)) if kind == "f" else mklist(args)

    def seq(self, n, s, d):
        c = self.counts
        out = []
        while n > 0:
            sizes = range(1, s - n + 2)
            weights = [c.term(i, d) * c.seq(n - 1, s - i, d) for i in sizes]
            i = self.rng.choices(list(sizes), weights)[0]
            out.append(self.term(i, d))
            s -= i
            n -= 1
        return out


@lru_cache(maxsize=None)
def _counts(u, ground):
    return _Counts(u, ground)


def enumerate_terms(size, u=DEFAULT_UNIVERSE, ground=False, depth=None):
    """All terms of exactly ``size`` (fresh variables for variable leaves)."""
    d = u.max_depth if depth is None else depth
    if d <= 0 or size <= 0:
        return
    if size == 1:
        if not ground:
            yield fresh()
        yield from (Atom(a) for a in u.atoms)
        yield from (Num(i) for i in u.ints)
        yield NIL
        return
    for name, ar in u.functors:
        for args in _enum_seq(ar, size - 1, u, ground, d - 1):
            yield Struct(name, tuple(args))
    for n in range(1, u.max_list + 1):
        for args in _enum_seq(n, size - 1, u, ground, d - 1):
            yield mklist(args)


def _enum_seq(n, s, u, ground, d):
    if n == 0:
        if s == 0:
            yield []
        return
    for i in range(1, s - n + 2):
        for t in enumerate_terms(i, u, ground, d):
            for rest in _enum_seq(n - 1, s - i, u, ground, d):
                yield [t] + rest


# -- per-argument generators --------------------------------------------------------

_PRIORITY = ("var", "num", "int", "atom", "list2", "list", "ground", "nonvar", "any")


def _classify(p):
    if isinstance(p, Struct):
        if p.name == "list" and len(p.args) == 2:
            return "list2"
        if len(p.args) == 1 and p.name in ("var", "num", "int", "atom", "list", "ground",
                                          "nonvar", "any", "term", "gnd"):
            return {"term": "any", "gnd": "ground"}.get(p.name, p.name)
    return None


def _arg_kind(props):
    """Pick the generator for one argument from the properties on it."""
    kinds = []
    for p in props:
        k = _classify(p)
        if k is None:
            raise NoGenerator(_pname(p))
        kinds.append((k, p))
    if not kinds:
        return ("any", None)
    return min(kinds, key=lambda kp: _PRIORITY.index(kp[0]))


def _pname(p):
    if isinstance(p, Struct):
        return f"{p.name}/{len(p.args)}"
    return str(p)


@dataclass
class GenSpec:
    """What to generate: a head whose variables are filled subject to ``calls``."""

    head: object
    calls: tuple = ()
    universe: Universe = DEFAULT_UNIVERSE
    kinds: dict = field(default_factory=dict)

    def __post_init__(self):
        by_var = {}
        for p in self.calls:
            if not isinstance(p, Struct) or not isinstance(p.args[-1], Var):
                raise NoGenerator(_pname(p))
            by_var.setdefault(p.args[-1], []).append(p)
        self.kinds = {v: _arg_kind(by_var.get(v, ())) for v in self.variables}

    @property
    def variables(self):
        return term_vars(self.head)

    @classmethod
    def from_entry(cls, entry, universe=DEFAULT_UNIVERSE, modedefs=()):
        a = expand_assertion(entry, modedefs)
        return cls(a.head, tuple(a.calls), universe)

    def instantiate(self, values):
        return substitute(self.head, dict(zip(self.variables, values)))

    def accepts(self, values):
        binding = dict(zip(self.variables, values))
        return eval_check(self.calls, binding) is None


# -- strategies ---------------------------------------------------------------------

class RandomStrategy:
    name = "random"

    def __init__(self, seed=0, mean_size=3.0, reuse=0.2, max_tries=200):
        self.seed = seed
        self.mean_size = mean_size
        self.reuse = reuse
        self.max_tries = max_tries

    def _size(self, rng, u, lo=1):
        p = 1.0 / self.mean_size
        s = lo
        while s < u.max_size and rng.random() > p:
            s += 1
        return s

    def _value(self, kind, prop, sampler, rng, u):
        if kind == "var":
            v = fresh()
            sampler.vars.append(v)
            return v
        if kind in ("num", "int"):
            return Num(rng.choice(u.ints))
        if kind == "atom":
            return Atom(rng.choice(u.atoms))
        if kind in ("list", "list2"):
            n = min(self._size(rng, u, 0), u.max_list)
            if kind == "list2":
                elem = _element_kind(prop)
                return mklist([self._value(elem[0], elem[1], sampler, rng, u) for _ in range(n)])
            return mklist([self._any(sampler, rng, u, u.max_depth - 1) for _ in range(n)])
        if kind == "ground":
            g = _Sampler(u, rng, ground=True)
            return g.term(self._fit(g, rng, u))
        if kind == "nonvar":
            for _ in range(self.max_tries):
                t = self._any(sampler, rng, u)
                if not isinstance(t, Var):
                    return t
            return NIL
        return self._any(sampler, rng, u)

    def _fit(self, sampler, rng, u, depth=None):
        d = u.max_depth if depth is None else depth
        s = self._size(rng, u)
        while s > 1 and sampler.counts.term(s, d) == 0:
            s -= 1
        return s

    def _any(self, sampler, rng, u, depth=None):
        d = u.max_depth if depth is None else depth
        return sampler.term(self._fit(sampler, rng, u, d), d)

    def goals(self, spec):
        rng = random.Random(self.seed)
        u = spec.universe
        while True:
            for _ in range(self.max_tries):
                sampler = _Sampler(u, rng, reuse=self.reuse)
                values = [self._value(*spec.kinds[v], sampler, rng, u) for v in spec.variables]
                if spec.accepts(values):
                    yield spec.instantiate(values)
                    break
            else:
                raise Exhausted("could not generate a goal satisfying the call conditions")


def _element_kind(prop):
    elem = prop.args[0]
    probe = Struct(elem.name, elem.args + (Var("_E"),)) if isinstance(elem, Struct) \
        else Struct(elem.name, (Var("_E"),))
    k = _classify(probe)
    if k is None:
        raise NoGenerator(_pname(probe))
    return k, probe


class BreadthFirst:
    """Enumerate argument tuples by increasing total size."""

    name = "breadth_first"

    def __init__(self, depth_first_levels=False):
        self.by_depth = depth_first_levels

    def values(self, kind, prop, u):
        if kind == "var":
            yield fresh()
            return
        if kind in ("num", "int"):
            yield from (Num(i) for i in u.ints)
            return
        if kind == "atom":
            yield from (Atom(a) for a in u.atoms)
            return
        if kind == "list":
            for n in range(u.max_list + 1):
                yield mklist([fresh() for _ in range(n)])
            return
        if kind == "list2":
            ek, ep = _element_kind(prop)
            elems = list(islice(self.values(ek, ep, u), 64))
            for n in range(u.max_list + 1):
                yield from _lists_of(elems, n)
            return
        ground = kind == "ground"
        if self.by_depth:
            for d in range(1, u.max_depth + 1):
                for s in range(1, u.max_size + 1):
                    for t in enumerate_terms(s, u, ground, d):
                        if _depth(t) == d and (kind != "nonvar" or not isinstance(t, Var)):
                            yield t
            return
        for s in range(1, u.max_size + 1):
            for t in enumerate_terms(s, u, ground):
                if kind != "nonvar" or not isinstance(t, Var):
                    yield t

    def goals(self, spec):
        u = spec.universe
        seqs = [_Lazy(self.values(*spec.kinds[v], u)) for v in spec.variables]
        for values in _diagonal(seqs):
            values = [_refresh(t) for t in values]
            if spec.accepts(values):
                yield spec.instantiate(values)


class IterativeDeepening(BreadthFirst):
    name = "iterative_deepening"

    def __init__(self):
        super().__init__(depth_first_levels=True)


def _depth(t):
    if isinstance(t, Struct):
        if t.name == "." and len(t.args) == 2:
            items, _ = list_items(t)
            return 1 + max((_depth(x) for x in items), default=0)
        return 1 + max(_depth(a) for a in t.args)
    return 1


def _lists_of(elems, n):
    if n == 0:
        yield NIL
        return
    idx = [0] * n
    # all n-tuples over elems, in lexicographic order
    while True:
        yield mklist([_refresh(elems[i]) for i in idx])
        k = n - 1
        while k >= 0 and idx[k] == len(elems) - 1:
            idx[k] = 0
            k -= 1
        if k < 0:
            return
        idx[k] += 1


def _refresh(t):
    return rename_fresh(t)[0] if term_vars(t) else t


class _Lazy:
    """Memoized view of an iterator with a known-finite flag."""

    def __init__(self, it):
        self.it = iter(it)
        self.items = []
        self.done = False

    def get(self, i):
        while len(self.items) <= i and not self.done:
            try:
                self.items.append(next(self.it))
            except StopIteration:
                self.done = True
        return self.items[i] if i < len(self.items) else None


def _diagonal(seqs):
    """Value tuples in order of increasing index sum, until every sequence runs out."""
    if not seqs:
        yield []
        return
    total = 0
    while True:
        for idx in _compositions(total, len(seqs)):
            vals = [s.get(i) for s, i in zip(seqs, idx)]
            if all(v is not None for v in vals):
                yield vals
        if all(s.done for s in seqs) and total >= sum(len(s.items) - 1 for s in seqs):
            return
        total += 1


def _compositions(total, k):
    if k == 1:
        yield (total,)
        return
    for i in range(total + 1):
        for rest in _compositions(total - i, k - 1):
            yield (i,) + rest


def make_strategy(name, seed=0, **opts):
    if name == "random":
        return RandomStrategy(seed, **opts)
    if name == "breadth_first":
        return BreadthFirst()
    if name == "iterative_deepening":
        return IterativeDeepening()
    raise ValueError(f"unknown strategy {name!r}")


def generate(spec, strategy=None, n=10):
    """First ``n`` goals of ``strategy`` for ``spec``."""
    strategy = strategy or RandomStrategy()
    out = list(islice(strategy.goals(spec), n))
    if len(out) < n:
        raise Exhausted(f"only {len(out)} goals satisfy the call conditions")
    return out


# -- shrinking ----------------------------------------------------------------------

def _positions(t, path=()):
    yield path, t
    if isinstance(t, Struct):
        for i, a in enumerate(t.args):
            yield from _positions(a, path + (i,))


def _replace(t, path, new):
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = _replace(args[i], path[1:], new)
    return Struct(t.name, tuple(args))


def _shrink_steps(goal):
    if not isinstance(goal, Struct):
        return
    positions = [(p, t) for p, t in _positions(goal) if p]
    # drop one list element
    for p, t in positions:
        if isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
            yield _replace(goal, p, t.args[1])
    # replace a compound by one of its arguments
    for p, t in positions:
        if isinstance(t, Struct) and not (t.name == "." and len(t.args) == 2):
            for a in t.args:
                yield _replace(goal, p, a)
    # replace a subterm by a fresh variable
    for p, t in positions:
        if not isinstance(t, Var) and not _is_list_tail(goal, p):
            yield _replace(goal, p, fresh())
    for p, t in positions:
        if isinstance(t, Atom) and t != Atom("a") and t != NIL:
            yield _replace(goal, p, Atom("a"))
        elif isinstance(t, Num) and t.value != 0:
            v = t.value
            yield _replace(goal, p, Num(0 if isinstance(v, int) else 0.0))
            if isinstance(v, int) and abs(v) > 1:
                yield _replace(goal, p, Num(v // 2 if v > 0 else -((-v) // 2)))


def _is_list_tail(goal, p):
    if not p or p[-1] != 1:
        return False
    parent = goal
    for i in p[:-1]:
        parent = parent.args[i]
    return isinstance(parent, Struct) and parent.name == "." and len(parent.args) == 2


def shrink(goal, still_fails, max_steps=500):
    """Greedily shrink ``goal`` while ``still_fails`` holds; returns a local minimum."""
    for _ in range(max_steps):
        for cand in _shrink_steps(goal):
            if still_fails(cand):
                goal = cand
                break
        else:
            return goal
    return goal
