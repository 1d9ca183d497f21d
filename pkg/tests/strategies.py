"""Hypothesis strategies for terms over a small signature."""

from hypothesis import strategies as st

from checkify.terms import NIL, Atom, Num, Struct, Var

ATOMS = ("a", "b", "[]", "foo", "g1")
VAR_NAMES = ("X", "Y", "Z", "W")


def atoms():
    return st.sampled_from(ATOMS).map(Atom)


def nums():
    return st.integers(-20, 20).map(Num)


def variables(names=VAR_NAMES):
    return st.sampled_from(names).map(Var)


def _compound(children):
    return st.one_of(
        st.tuples(st.sampled_from(("f", "h")), children).map(lambda p: Struct(p[0], (p[1],))),
        st.tuples(st.sampled_from(("g", "+", "-")), children, children)
        .map(lambda p: Struct(p[0], (p[1], p[2]))),
        st.lists(children, max_size=3).map(_list),
    )


def _list(items, tail=NIL):
    for x in reversed(items):
        tail = Struct(".", (x, tail))
    return tail


def terms(names=VAR_NAMES, max_leaves=8):
    leaves = st.one_of(atoms(), nums(), variables(names)) if names else st.one_of(atoms(), nums())
    return st.recursive(leaves, _compound, max_leaves=max_leaves)


def ground_terms(max_leaves=8):
    return terms(names=(), max_leaves=max_leaves)
