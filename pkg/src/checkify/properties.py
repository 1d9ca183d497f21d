"""Runnable properties and the observational evaluation of check conjunctions."""

from __future__ import annotations

from itertools import combinations

from . import faults
from .modedefs import apply_prop
from .terms import TOP, Atom, Num, Struct, Var, deref, list_items, occurrences, resolve, term_vars


class UnrunnableProperty(Exception):
    def __init__(self, name):
        self.name = name
        super().__init__(f"property {name!r} has no run-time implementation")


def _is_list(t, b):
    t = deref(t, b)
    while isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
        t = deref(t.args[1], b)
    return t == Atom("[]")


def _elements(t, b):
    out = []
    t = deref(t, b)
    while isinstance(t, Struct) and t.name == "." and len(t.args) == 2:
        out.append(t.args[0])
        t = deref(t.args[1], b)
    return out


def _ground(t, b):
    return not any(True for _ in occurrences(resolve(t, b)))


def _is_var(t, b):
    return isinstance(deref(t, b), Var)


def _typed_list(args, b, ctx):
    typ, lst = args
    if not _is_list(lst, b):
        return False
    return all(_holds(apply_prop(typ, e), b, ctx) for e in _elements(lst, b))


GROUND_TYPES = frozenset({"num", "int", "atom", "atomic", "ground"})


def ground_type(t):
    """True when every term of the element type ``t`` (as in ``list(t, X)``) is ground."""
    if isinstance(t, Atom):
        return t.name in GROUND_TYPES
    return isinstance(t, Struct) and t.name == "list" and len(t.args) == 1 and ground_type(t.args[0])


def _linear_term(t):
    seen = set()
    for v in occurrences(t):
        if v in seen:
            return False
        seen.add(v)
    return True


def _linear(args, b, ctx):
    terms = [resolve(x, b) for x in _elements(args[0], b)]
    if not all(_linear_term(t) for t in terms):
        return False
    if faults.active("linear_as_disjoint"):
        for s, t in combinations(terms, 2):
            if set(term_vars(s)) & set(term_vars(t)):
                return False
    return True


def _free(args, b, ctx):
    return all(_is_var(x, b) for x in _elements(args[0], b))


def _matches(term, pattern, b):
    """One-way match of ``term`` against a depth pattern whose variables are wildcards."""
    stack = [(term, pattern)]
    while stack:
        t, p = stack.pop()
        if isinstance(p, Var) or p == TOP:
            continue
        t = deref(t, b)
        if isinstance(p, Struct):
            if not isinstance(t, Struct) or t.name != p.name or len(t.args) != len(p.args):
                return False
            stack.extend(zip(t.args, p.args))
        elif t != p:
            return False
    return True


def _instance(args, b, ctx):
    return _matches(args[0], args[1], b)


def sharing_groups(variables, b):
    """Sharing groups of binding ``b`` over ``variables``: one group per run-time variable."""
    occ = {}
    for v in variables:
        for u in term_vars(resolve(v, b)):
            occ.setdefault(u, []).append(v)
    return [tuple(g) for g in occ.values()]


def _var_list(t, b):
    """Program variables named in an mshare/clique argument (identity, no dereferencing)."""
    return [x for x in _elements(t, b) if isinstance(x, Var)]


def _mshare(args, b, ctx):
    groups_arg = [_var_list(g, b) for g in _elements(args[0], b)]
    cliques = []
    if not faults.active("mshare_ignores_clique"):
        for p in ctx:
            if isinstance(p, Struct) and p.name == "clique" and len(p.args) == 1:
                cliques.append(set(_var_list(p.args[0], b)))
    universe = {}
    for g in groups_arg:
        for v in g:
            universe.setdefault(v, None)
    for c in cliques:
        for v in c:
            universe.setdefault(v, None)
    if faults.active("mshare_order_sensitive"):
        allowed = {tuple(g) for g in groups_arg}
        for grp in sharing_groups(sorted(universe, key=lambda v: v.name), b):
            if tuple(grp) not in allowed and not any(set(grp) <= c for c in cliques):
                return False
        return True
    allowed = {frozenset(g) for g in groups_arg}
    for grp in sharing_groups(list(universe), b):
        g = frozenset(grp)
        if g not in allowed and not any(g <= c for c in cliques):
            return False
    return True


def _clique(args, b, ctx):
    # A clique alone allows any sharing among its variables; mshare/1 consults it.
    return all(isinstance(x, Var) for x in _elements(args[0], b))


def _num(args, b, ctx):
    return isinstance(deref(args[0], b), Num)


def _int(args, b, ctx):
    t = deref(args[0], b)
    return isinstance(t, Num) and isinstance(t.value, int)


def _atom(args, b, ctx):
    return isinstance(deref(args[0], b), Atom)


def _nonground(args, b, ctx):
    return not _ground(args[0], b)


def _ngv(args, b, ctx):
    return not _is_var(args[0], b) and not _ground(args[0], b)


REGISTRY = {
    ("ground", 1): lambda a, b, c: _ground(a[0], b),
    ("var", 1): lambda a, b, c: _is_var(a[0], b),
    ("nonvar", 1): lambda a, b, c: not _is_var(a[0], b),
    ("nonground", 1): _nonground,
    ("ngv", 1): _ngv,
    ("any", 1): lambda a, b, c: True,
    ("term", 1): lambda a, b, c: True,
    ("list", 1): lambda a, b, c: _is_list(a[0], b),
    ("list", 2): _typed_list,
    ("num", 1): _num,
    ("int", 1): _int,
    ("atom", 1): _atom,
    ("mshare", 1): _mshare,
    ("clique", 1): _clique,
    ("linear", 1): _linear,
    ("free", 1): _free,
    ("instance", 2): _instance,
    ("unreachable", 0): lambda a, b, c: False,
}

_MISSING = {("clique", 1): "clique_rt_missing", ("instance", 2): "instance_rt_missing"}


def prop_key(p):
    if isinstance(p, Atom):
        return (p.name, 0)
    if isinstance(p, Struct):
        return (p.name, len(p.args))
    raise UnrunnableProperty(repr(p))


def is_runnable(key):
    fault = _MISSING.get(key)
    if fault and faults.active(fault):
        return False
    return key in REGISTRY


def check_runnable(props):
    """Raise :class:`UnrunnableProperty` for the first property without an implementation."""
    for p in props:
        key = prop_key(p)
        if not is_runnable(key):
            raise UnrunnableProperty(f"{key[0]}/{key[1]}")
        if key == ("list", 2):
            check_runnable([apply_prop(p.args[0], Var("_"))])


def _holds(p, b, ctx):
    key = prop_key(p)
    if not is_runnable(key):
        raise UnrunnableProperty(f"{key[0]}/{key[1]}")
    args = p.args if isinstance(p, Struct) else ()
    return REGISTRY[key](args, b, ctx)


def eval_check(conjunction, binding):
    """Evaluate a property conjunction under ``binding`` without changing it.

    Returns None when every property holds, else the leftmost failing property.
    """
    ctx = tuple(conjunction)
    for p in ctx:
        if not _holds(p, binding, ctx):
            return p
    return None
