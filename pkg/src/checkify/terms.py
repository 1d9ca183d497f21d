"""Terms of the mini logic language, plus unification and term utilities.

Terms are immutable.  Variables are identified by ``(name, id)``: the parser
produces ``id == 0`` variables, the interpreter and the analyzer mint fresh
ones with unique ids when renaming clauses apart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    id: int = 0

    def __repr__(self):
        return self.name if self.id == 0 else f"{self.name}#{self.id}"


@dataclass(frozen=True, slots=True)
class Atom:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, slots=True, eq=False)
class Num:
    value: Union[int, float]

    def __eq__(self, other):
        return (isinstance(other, Num) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((Num, type(self.value), self.value))

    def __repr__(self):
        return repr(self.value)


@dataclass(frozen=True, slots=True)
class Struct:
    name: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound terms need at least one argument; use Atom")

    @property
    def arity(self):
        return len(self.args)

    def __repr__(self):
        from .writer import format_term
        return format_term(self)


Term = Union[Var, Atom, Num, Struct]

NIL = Atom("[]")
CONS = "."

_fresh_ids = itertools.count(1)


def fresh_var(name="_"):
    return Var(name, next(_fresh_ids))


def mklist(items, tail=NIL):
    out = tail
    for item in reversed(list(items)):
        out = Struct(CONS, (item, out))
    return out


def list_items(t):
    """Return ``(items, tail)`` for a (possibly partial) list term."""
    items = []
    while isinstance(t, Struct) and t.name == CONS and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def is_callable(t):
    return isinstance(t, (Atom, Struct))


def functor(t):
    if isinstance(t, Struct):
        return (t.name, len(t.args))
    if isinstance(t, Atom):
        return (t.name, 0)
    raise TypeError(f"not callable: {t!r}")


def term_vars(t, acc=None):
    """Variables of ``t`` in order of first (depth-first, left-to-right) occurrence."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            acc.setdefault(t, None)
        elif isinstance(t, Struct):
            stack.extend(reversed(t.args))
    return list(acc)


def occurrences(t):
    """Yield every variable occurrence in ``t`` (with repetition)."""
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Struct):
            stack.extend(reversed(t.args))


def is_ground(t):
    return not any(True for _ in occurrences(t))


def term_size(t):
    if isinstance(t, Struct):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def term_depth(t):
    if isinstance(t, Struct):
        return 1 + max(term_depth(a) for a in t.args)
    return 1


def _rebuild(t, leaf):
    """Map ``leaf`` over the non-compound positions of ``t``.

    ``leaf`` may return a compound, which is then traversed too.  List
    spines are walked iteratively so long lists do not exhaust the stack.
    """
    t = leaf(t)
    if not isinstance(t, Struct):
        return t
    if t.name == CONS and len(t.args) == 2:
        heads = []
        while isinstance(t, Struct) and t.name == CONS and len(t.args) == 2:
            heads.append(_rebuild(t.args[0], leaf))
            t = leaf(t.args[1])
        tail = _rebuild(t, leaf) if isinstance(t, Struct) else t
        for h in reversed(heads):
            tail = Struct(CONS, (h, tail))
        return tail
    return Struct(t.name, tuple(_rebuild(a, leaf) for a in t.args))


def substitute(t, mapping):
    """Replace variables by ``mapping`` (no dereferencing chains)."""
    if not mapping:
        return t
    return _rebuild(t, lambda x: mapping.get(x, x) if isinstance(x, Var) else x)


def rename_fresh(t, mapping=None):
    """Copy ``t`` with every variable replaced by a fresh one."""
    if mapping is None:
        mapping = {}
    for v in term_vars(t):
        if v not in mapping:
            mapping[v] = fresh_var(v.name)
    return substitute(t, mapping), mapping


# -- bindings ---------------------------------------------------------------

def deref(t, b):
    while isinstance(t, Var):
        nxt = b.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def resolve(t, b):
    """Fully apply binding ``b`` to ``t``."""
    return _rebuild(t, lambda x: deref(x, b) if isinstance(x, Var) else x)


def occurs_in(v, t, b):
    stack = [t]
    while stack:
        t = deref(stack.pop(), b)
        if t == v:
            return True
        if isinstance(t, Struct):
            stack.extend(t.args)
    return False


def unify(a, b, bindings, trail=None, occurs_check=True):
    """Unify ``a`` and ``b`` destructively extending ``bindings``.

    Newly bound variables are appended to ``trail`` so the caller can undo
    them.  Returns False on failure; partial bindings are left in place and
    must be undone by the caller through the trail.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = deref(x, bindings)
        y = deref(y, bindings)
        if x is y:
            continue
        if isinstance(x, Var):
            if x == y:
                continue
            if occurs_check and isinstance(y, Struct) and occurs_in(x, y, bindings):
                return False
            bindings[x] = y
            if trail is not None:
                trail.append(x)
            continue
        if isinstance(y, Var):
            if occurs_check and isinstance(x, Struct) and occurs_in(y, x, bindings):
                return False
            bindings[y] = x
            if trail is not None:
                trail.append(y)
            continue
        if isinstance(x, Struct):
            if not isinstance(y, Struct) or x.name != y.name or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
            continue
        if x != y:
            return False
    return True


def mgu(a, b, bindings=None):
    """Return an extended copy of ``bindings`` unifying ``a`` and ``b``, or None."""
    out = dict(bindings or {})
    return out if unify(a, b, out) else None


def is_variant(a, b):
    """True when ``a`` and ``b`` are equal up to a bijective variable renaming."""
    fwd, back = {}, {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if isinstance(x, Var) or isinstance(y, Var):
            if not (isinstance(x, Var) and isinstance(y, Var)):
                return False
            if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
                return False
        elif isinstance(x, Struct):
            if not isinstance(y, Struct) or x.name != y.name or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        elif x != y:
            return False
    return True


def canonical(terms, prefix="_V"):
    """Rename the variables of a tuple of terms to ``_V1, _V2, ...`` by first occurrence.

    Two tuples are variants exactly when their canonical forms are equal.
    """
    mapping = {}
    for i, v in enumerate(term_vars(Struct("t", tuple(terms)) if terms else NIL)):
        mapping[v] = Var(f"{prefix}{i + 1}", -1)
    return tuple(substitute(t, mapping) for t in terms)


def subterms(t) -> Iterator:
    yield t
    if isinstance(t, Struct):
        for a in t.args:
            yield from subterms(a)


# Wildcard leaf of depth-bounded patterns; printed as ``_``.
TOP = Atom("$top")
