"""Program representation: clauses, assertions, mode definitions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .terms import Atom, Struct, Var, functor, is_variant, term_vars

STATUSES = ("true", "check", "trust", "entry")
COMP_PROPS = ("det", "semidet", "multi", "nondet", "fails", "not_fails", "is_det")


class ParseError(Exception):
    def __init__(self, message, line=0, col=0, expected=()):
        self.line, self.col, self.expected = line, col, tuple(expected)
        where = f"{line}:{col}: " if line else ""
        exp = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}{message}{exp}")


class UnknownStatus(ParseError):
    pass


class UnknownMode(Exception):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown mode {name!r}")


@dataclass(frozen=True)
class Location:
    line: int = 0
    col: int = 0
    offset: int = 0
    file: Optional[str] = None

    def __str__(self):
        return f"{self.file or '<source>'}:{self.line}:{self.col}"


NOWHERE = Location()


@dataclass(frozen=True)
class Assertion:
    """A predicate assertion or a program-point assertion.

    Program-point assertions keep their single conjunction in ``calls``.
    ``role`` distinguishes the checks an instrumented wrapper evaluates on
    entry (``"calls"``) and exit (``"success"``) from ordinary points.
    """

    status: str
    kind: str  # "pred" | "program_point"
    head: Optional[object] = None
    calls: tuple = ()
    success: tuple = ()
    comp: tuple = ()
    location: Location = field(default=NOWHERE, compare=False)
    role: str = field(default="point", compare=False)
    tag: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise UnknownStatus(f"unknown assertion status {self.status!r}")
        if self.status == "entry" and (self.kind != "pred" or self.success):
            raise ValueError("entry assertions are predicate assertions without success part")

    @property
    def key(self):
        return functor(self.head) if self.head is not None else None

    def with_status(self, status):
        return replace(self, status=status)


@dataclass(frozen=True)
class Clause:
    head: object
    body: tuple = ()
    location: Location = field(default=NOWHERE, compare=False)

    def __post_init__(self):
        if not isinstance(self.head, (Atom, Struct)):
            raise ValueError(f"clause head must be callable, got {self.head!r}")

    @property
    def key(self):
        return functor(self.head)

    def goals(self):
        """Body literals that are not program-point assertions."""
        return [lit for lit in self.body if not isinstance(lit, Assertion)]

    def variables(self):
        acc = {}
        term_vars(self.head, acc)
        for lit in self.body:
            if isinstance(lit, Assertion):
                for p in lit.calls:
                    term_vars(p, acc)
            else:
                term_vars(lit, acc)
        return list(acc)


@dataclass(frozen=True)
class ModeDef:
    """``:- modedef name(A[,P]) : Calls => Success.``"""

    name: str
    arg: Var
    prop: Optional[Var] = None
    calls: tuple = ()
    success: tuple = ()
    location: Location = field(default=NOWHERE, compare=False)

    @property
    def arity(self):
        return 1 if self.prop is None else 2


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    assertions: tuple = ()
    modedefs: tuple = ()
    exports: tuple = ()
    source_file: Optional[str] = field(default=None, compare=False)

    def predicates(self):
        """Clauses grouped by ``(name, arity)``, in order of first appearance."""
        groups = {}
        for c in self.clauses:
            groups.setdefault(c.key, []).append(c)
        return groups

    def clauses_of(self, key):
        return [c for c in self.clauses if c.key == key]

    def defined(self):
        return {c.key for c in self.clauses}

    def entries(self):
        return [a for a in self.assertions if a.status == "entry"]

    def pred_assertions(self, key=None, status=None):
        return [a for a in self.assertions if a.kind == "pred" and a.status != "entry"
                and (key is None or a.key == key) and (status is None or a.status == status)]

    def exported(self):
        """Exported predicates: declared exports, else entry predicates, else all."""
        if self.exports:
            return list(self.exports)
        seen = []
        for a in self.entries():
            if a.key not in seen:
                seen.append(a.key)
        if seen:
            return seen
        return list(self.predicates())


def clause_equivalent(c1, c2):
    return is_variant(_clause_term(c1), _clause_term(c2))


def _lit_term(lit):
    if isinstance(lit, Assertion):
        return Struct("$pp", (Atom(lit.status), Struct("$c", tuple(lit.calls) or (Atom("$"),))))
    return lit


def _clause_term(c):
    return Struct("$cl", (c.head,) + tuple(_lit_term(l) for l in c.body))


def _assertion_term(a):
    parts = [Atom(a.status), Atom(a.kind), a.head if a.head is not None else Atom("$none")]
    for group in (a.calls, a.success, a.comp):
        parts.append(Struct("$g", tuple(group)) if group else Atom("$empty"))
    return Struct("$as", tuple(parts))


def programs_equivalent(p, q):
    """Structural equality of programs modulo per-clause variable renaming."""
    if len(p.clauses) != len(q.clauses) or len(p.assertions) != len(q.assertions):
        return False
    if p.exports != q.exports or len(p.modedefs) != len(q.modedefs):
        return False
    if not all(clause_equivalent(a, b) for a, b in zip(p.clauses, q.clauses)):
        return False
    if not all(is_variant(_assertion_term(a), _assertion_term(b))
               for a, b in zip(p.assertions, q.assertions)):
        return False

    def as_term(m):
        calls = Struct("$g", m.calls or (Atom("$"),))
        success = Struct("$g", m.success or (Atom("$"),))
        return Struct("$m", (Atom(m.name), m.arg, m.prop or Atom("$"), calls, success))

    for m1, m2 in zip(p.modedefs, q.modedefs):
        if not is_variant(as_term(m1), as_term(m2)):
            return False
    return True


def canonical_order(assertions, clauses):
    """Order assertions the way the printer lays them out.

    Entry assertions first (source order), then predicate assertions grouped
    by predicate in order of first clause, then assertions for predicates
    without clauses.
    """
    entries = [a for a in assertions if a.kind == "pred" and a.status == "entry"]
    rest = [a for a in assertions if not (a.kind == "pred" and a.status == "entry")]
    order = []
    for c in clauses:
        if c.key not in order:
            order.append(c.key)
    grouped = []
    for key in order:
        grouped.extend(a for a in rest if a.key == key)
    grouped.extend(a for a in rest if a.key not in order)
    return tuple(entries + grouped)
