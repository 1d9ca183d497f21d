"""Printing terms and programs back to ``.mlp`` concrete syntax."""

from __future__ import annotations

from collections import Counter

from .program import Assertion, Clause
from .terms import CONS, Atom, Num, Struct, Var, list_items, occurrences

INFIX = {
    ":-": (1200, "xfx"), "=>": (1100, "xfx"), ":": (1090, "xfx"), ",": (1000, "xfy"),
    "=": (700, "xfx"), "\\=": (700, "xfx"), "==": (700, "xfx"), "\\==": (700, "xfx"),
    "is": (700, "xfx"), "<": (700, "xfx"), ">": (700, "xfx"), "=<": (700, "xfx"),
    ">=": (700, "xfx"), "=:=": (700, "xfx"), "=\\=": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "//": (400, "yfx"), "mod": (400, "yfx"),
    "**": (200, "xfx"), "^": (200, "xfy"),
}
PREFIX = {":-": (1200, "fx"), "\\+": (900, "fy"), "-": (200, "fy"), "+": (200, "fy")}
SPACED = {":-", "=>", ":", "is", "mod"}
SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")


def atom_text(name):
    if not name:
        return "''"
    if name in ("[]", "!", ";", "{}"):
        return name
    if name[0].islower() and all(c.isalnum() or c == "_" for c in name):
        return name
    if all(c in SYMBOL_CHARS for c in name) and name != ".":
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "''") + "'"


def var_text(v):
    if v.id <= 0:
        return v.name
    return f"_{v.id}" if v.name == "_" else f"{v.name}_{v.id}"


def _glue(left, right):
    """Insert a space where two symbol-char runs would otherwise fuse."""
    if left and right and left[-1] in SYMBOL_CHARS and right[0] in SYMBOL_CHARS:
        return left + " " + right
    if left and right and left[-1].isalnum() and (right[0].isalnum() or right[0] == "_"):
        return left + " " + right
    return left + right


class _Formatter:
    def __init__(self, names=None):
        self.names = names or {}

    def var(self, v):
        return self.names.get(v) or var_text(v)

    def fmt(self, t, max_prec=1200):
        if isinstance(t, Var):
            return self.var(t)
        if isinstance(t, Num):
            s = repr(t.value)
            return s
        if isinstance(t, Atom):
            if t.name == "$top":
                return "_"
            s = atom_text(t.name)
            if max_prec < 1200 and (t.name in INFIX or t.name in PREFIX):
                prec = max(INFIX.get(t.name, (0,))[0], PREFIX.get(t.name, (0,))[0])
                if prec > max_prec:
                    return "(" + s + ")"
            return s
        if t.name == CONS and len(t.args) == 2:
            items, tail = list_items(t)
            body = ",".join(self.fmt(x, 999) for x in items)
            if tail != Atom("[]"):
                body += "|" + self.fmt(tail, 999)
            return "[" + body + "]"
        if t.name == "$apply" and isinstance(t.args[0], Var) and len(t.args) > 1:
            return self.var(t.args[0]) + "(" + ",".join(self.fmt(a, 999) for a in t.args[1:]) + ")"
        if len(t.args) == 2 and t.name in INFIX:
            prec, typ = INFIX[t.name]
            lmax = prec if typ == "yfx" else prec - 1
            rmax = prec if typ == "xfy" else prec - 1
            left = self.fmt(t.args[0], lmax)
            right = self.fmt(t.args[1], rmax)
            op = "," if t.name == "," else atom_text(t.name)
            if t.name in SPACED:
                s = f"{left} {op} {right}"
            else:
                s = _glue(_glue(left, op), right)
            return f"({s})" if prec > max_prec else s
        if len(t.args) == 1 and t.name in PREFIX:
            prec, typ = PREFIX[t.name]
            amax = prec if typ == "fy" else prec - 1
            arg = t.args[0]
            # -(1) must not read back as the number -1
            if isinstance(arg, Num) and t.name in ("-", "+"):
                return f"{atom_text(t.name)}({self.fmt(arg, 999)})"
            a = self.fmt(arg, amax)
            s = _glue(atom_text(t.name), a)
            if a.startswith("("):
                s = atom_text(t.name) + " " + a
            return f"({s})" if prec > max_prec else s
        return atom_text(t.name) + "(" + ",".join(self.fmt(a, 999) for a in t.args) + ")"


def format_term(t, max_prec=1200, names=None):
    """Render a term in concrete syntax."""
    return _Formatter(names).fmt(t, max_prec)


def format_conj(props, names=None):
    f = _Formatter(names)
    return ", ".join(f.fmt(p, 999) for p in props)


def _assign_names(terms):
    """Printable, unambiguous names for the variables of ``terms``.

    Variables whose name starts with ``_`` and that occur once print as ``_``.
    """
    counts = Counter()
    order = []
    for t in terms:
        for v in occurrences(t):
            if v not in counts:
                order.append(v)
            counts[v] += 1
    names = {}
    used = {v.name for v in order if v.id <= 0}
    for v in order:
        if v.name.startswith("_") and counts[v] == 1:
            names[v] = "_"
            continue
        if v.id <= 0:
            names[v] = v.name if (v.name[0].isupper() or v.name[0] == "_") else "_" + v.name
            continue
        # generated variables are numbered per printed unit, not by their global id
        base = v.name if (v.name[0].isupper() or v.name[0] == "_") else "_" + v.name
        sep = "" if base == "_" else "_"
        k = 1
        while f"{base}{sep}{k}" in used:
            k += 1
        names[v] = f"{base}{sep}{k}"
        used.add(names[v])
    return names


def _assertion_terms(a):
    out = list(a.calls) + list(a.success) + list(a.comp)
    if a.head is not None:
        out.insert(0, a.head)
    return out


def format_point(a, names=None):
    body = format_conj(a.calls, names) if a.calls else "true"
    return f"{a.status}({body})"


def format_pred_assertion(a):
    names = _assign_names(_assertion_terms(a))
    f = _Formatter(names)
    head = f.fmt(a.head, 999)
    comp = ""
    if a.comp:
        comp = " + " + (atom_text(a.comp[0].name) if len(a.comp) == 1 and isinstance(a.comp[0], Atom)
                        else "(" + ",".join(f.fmt(c, 999) for c in a.comp) + ")")
    if a.status == "entry":
        s = f":- entry {head}"
        if a.calls:
            s += f" : ({format_conj(a.calls, names)})"
        return s + comp + "."
    lines = [f":- {a.status} pred {head}"]
    if a.calls:
        lines.append(f"    :  ({format_conj(a.calls, names)})")
    if a.success:
        lines.append(f"    => ({format_conj(a.success, names)})")
    lines[-1] += comp + "."
    return "\n".join(lines)


def format_clause(c):
    terms = [c.head]
    for lit in c.body:
        terms.extend(lit.calls if isinstance(lit, Assertion) else [lit])
    names = _assign_names(terms)
    f = _Formatter(names)
    head = f.fmt(c.head, 1199)
    if not c.body:
        return head + "."
    lits = [format_point(l, names) if isinstance(l, Assertion) else f.fmt(l, 999)
            for l in c.body]
    return head + " :-\n" + ",\n".join("    " + l for l in lits) + "."


def format_modedef(m):
    args = [m.arg] + ([m.prop] if m.prop is not None else [])
    names = _assign_names(args + list(m.calls) + list(m.success))
    f = _Formatter(names)
    s = f":- modedef {atom_text(m.name)}(" + ",".join(f.fmt(a, 999) for a in args) + ")"
    if m.calls:
        s += f" : ({format_conj(m.calls, names)})"
    if m.success:
        s += f" => ({format_conj(m.success, names)})"
    return s + "."


def print_program(program):
    """Render a program in the layout used for annotated output.

    Entries come first, then per predicate its assertions and its clauses,
    blocks separated by a blank line.
    """
    blocks = []
    header = []
    if program.exports:
        specs = ",".join(f"{atom_text(n)}/{k}" for n, k in program.exports)
        header.append(f":- export([{specs}]).")
    header.extend(format_modedef(m) for m in program.modedefs)
    if header:
        blocks.append("\n".join(header))
    entries = [a for a in program.assertions if a.status == "entry"]
    if entries:
        blocks.append("\n".join(format_pred_assertion(a) for a in entries))
    others = [a for a in program.assertions if a.status != "entry"]
    order = []
    for c in program.clauses:
        if c.key not in order:
            order.append(c.key)
    for key in order:
        mine = [a for a in others if a.key == key]
        if mine:
            blocks.append("\n".join(format_pred_assertion(a) for a in mine))
        blocks.append("\n".join(format_clause(c) for c in program.clauses if c.key == key))
    orphans = [a for a in others if a.key not in order]
    if orphans:
        blocks.append("\n".join(format_pred_assertion(a) for a in orphans))
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"

