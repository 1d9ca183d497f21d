"""Mode macros in assertion heads, e.g. ``append(+list,+list,-list)``."""

from __future__ import annotations

from dataclasses import replace

from .program import ModeDef, Program, UnknownMode
from .terms import Atom, Struct, Var, substitute, term_vars

_A, _P = Var("A"), Var("P")

BUILTIN_MODEDEFS = (
    ModeDef("+", _A, _P, calls=(Struct("$apply", (_P, _A)),)),
    ModeDef("-", _A, _P, calls=(Struct("var", (_A,)),), success=(Struct("$apply", (_P, _A)),)),
    ModeDef("+", _A, calls=(Struct("nonvar", (_A,)),)),
    ModeDef("-", _A, calls=(Struct("var", (_A,)),)),
    ModeDef("?", _A),
    ModeDef("?", _A, _P),
)


def apply_prop(prop, arg):
    """``P(A)``: add ``arg`` as the last argument of property ``prop``."""
    if isinstance(prop, Atom):
        return Struct(prop.name, (arg,))
    if isinstance(prop, Struct):
        return Struct(prop.name, prop.args + (arg,))
    raise UnknownMode(repr(prop))


def _eval_apply(t):
    if isinstance(t, Struct):
        args = tuple(_eval_apply(a) for a in t.args)
        if t.name == "$apply" and len(args) == 2:
            return apply_prop(args[0], args[1])
        return Struct(t.name, args)
    return t


def _table(modedefs):
    table = {(m.name, m.arity): m for m in BUILTIN_MODEDEFS}
    for m in modedefs:
        table[(m.name, m.arity)] = m
    return table


def _mode_of(arg, table):
    """Return ``(modedef, prop)`` for a mode occurrence, None for a plain variable."""
    if isinstance(arg, Var):
        return None
    if isinstance(arg, Atom):
        m = table.get((arg.name, 1))
        if m is None:
            raise UnknownMode(arg.name)
        return m, None
    if isinstance(arg, Struct) and len(arg.args) == 1:
        m = table.get((arg.name, 2))
        if m is None:
            raise UnknownMode(arg.name)
        return m, arg.args[0]
    name = arg.name if isinstance(arg, Struct) else repr(arg)
    raise UnknownMode(name)


def expand_assertion(a, modedefs=()):
    """Rewrite mode occurrences in ``a``'s head into calls/success properties."""
    if a.head is None or not isinstance(a.head, Struct):
        return a
    table = _table(modedefs)
    new_args, calls, success = [], [], []
    taken = {v.name for v in _vars_of(a)}
    for i, arg in enumerate(a.head.args, 1):
        mode = _mode_of(arg, table)
        if mode is None:
            new_args.append(arg)
            continue
        m, prop = mode
        name, k = f"Arg{i}", 1
        while name in taken:
            k += 1
            name = f"Arg{i}_{k}"
        taken.add(name)
        v = Var(name)
        mapping = {m.arg: v}
        if m.prop is not None:
            mapping[m.prop] = prop
        calls.extend(_eval_apply(substitute(c, mapping)) for c in m.calls)
        success.extend(_eval_apply(substitute(s, mapping)) for s in m.success)
        new_args.append(v)
    if not calls and not success and all(x is y for x, y in zip(new_args, a.head.args)):
        return a
    return replace(a, head=Struct(a.head.name, tuple(new_args)),
                   calls=tuple(calls) + a.calls, success=tuple(success) + a.success)


def _vars_of(a):
    acc = {}
    for t in (a.head,) + a.calls + a.success:
        term_vars(t, acc)
    return list(acc)


def expand_modes(program, modedefs=None):
    """Return ``program`` with every mode occurrence in assertion heads expanded."""
    defs = program.modedefs if modedefs is None else modedefs
    assertions = tuple(expand_assertion(a, defs) if a.kind == "pred" else a
                       for a in program.assertions)
    return replace(program, assertions=assertions)
