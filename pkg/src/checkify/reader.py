"""Tokenizer and operator-precedence parser for ``.mlp`` sources."""

from __future__ import annotations

import re

from .program import (COMP_PROPS, STATUSES, Assertion, Clause, Location, ModeDef,
                      ParseError, Program, UnknownStatus, canonical_order)
from .terms import NIL, Atom, Num, Struct, Var, fresh_var, list_items, mklist

SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
SOLO = set("!;")
PUNCT = set("()[]{},|")
_NUMBER = re.compile(r"\d+(\.\d+)?([eE][+-]?\d+)?")

INFIX = {
    ":-": (1200, "xfx"),
    "=>": (1100, "xfx"),
    ":": (1090, "xfx"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"), "\\=": (700, "xfx"), "==": (700, "xfx"), "\\==": (700, "xfx"),
    "is": (700, "xfx"), "<": (700, "xfx"), ">": (700, "xfx"), "=<": (700, "xfx"),
    ">=": (700, "xfx"), "=:=": (700, "xfx"), "=\\=": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "//": (400, "yfx"), "mod": (400, "yfx"),
    "**": (200, "xfx"), "^": (200, "xfy"),
}
PREFIX = {
    ":-": (1200, "fx"),
    "\\+": (900, "fy"),
    "-": (200, "fy"),
    "+": (200, "fy"),
}
DIRECTIVE_PREFIX = {
    "pred": (1150, "fx"),
    "modedef": (1150, "fx"),
    "export": (1150, "fx"),
    "true": (1150, "fy"),
    "check": (1150, "fy"),
    "trust": (1150, "fy"),
    "entry": (1150, "fy"),
}


class Token:
    __slots__ = ("kind", "value", "line", "col", "offset", "paren")

    def __init__(self, kind, value, line, col, offset, paren=False):
        self.kind, self.value = kind, value
        self.line, self.col, self.offset = line, col, offset
        self.paren = paren  # immediately followed by "("

    def __repr__(self):
        return f"{self.kind}:{self.value!r}@{self.line}:{self.col}"


def tokenize(src):
    toks = []
    i, n = 0, len(src)
    line, line_start = 1, 0

    def pos():
        return line, i - line_start + 1, i

    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if c.isspace():
            i += 1
            continue
        if c == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c == "/" and src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated block comment", *pos()[:2])
            for ch in src[i:j]:
                if ch == "\n":
                    line += 1
            i = j + 2
            line_start = src.rfind("\n", 0, i) + 1
            continue
        ln, col, off = pos()
        if c.isdigit():
            m = _NUMBER.match(src, i)
            text = m.group(0)
            value = float(text) if m.group(1) or m.group(2) else int(text)
            toks.append(Token("num", value, ln, col, off))
            i = m.end()
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            kind = "var" if (c.isupper() or c == "_") else "atom"
            toks.append(Token(kind, word, ln, col, off, paren=src.startswith("(", j)))
            i = j
        elif c == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ParseError("unterminated quoted atom", ln, col)
                if src[j] == "'":
                    if src.startswith("''", j):
                        buf.append("'")
                        j += 2
                        continue
                    break
                if src[j] == "\\" and j + 1 < n:
                    buf.append(src[j + 1])
                    j += 2
                    continue
                buf.append(src[j])
                j += 1
            toks.append(Token("atom", "".join(buf), ln, col, off, paren=src.startswith("(", j + 1)))
            i = j + 1
        elif c in PUNCT:
            toks.append(Token("punct", c, ln, col, off))
            i += 1
        elif c in SOLO:
            toks.append(Token("atom", c, ln, col, off, paren=src.startswith("(", i + 1)))
            i += 1
        elif c in SYMBOL_CHARS:
            j = i
            while j < n and src[j] in SYMBOL_CHARS:
                j += 1
            word = src[i:j]
            if word == "." and (j >= n or src[j].isspace() or src[j] == "%"):
                toks.append(Token("end", ".", ln, col, off))
            elif word.endswith(".") and len(word) > 1 and (j >= n or src[j].isspace()):
                toks.append(Token("atom", word[:-1], ln, col, off))
                toks.append(Token("end", ".", ln, col + len(word) - 1, off + len(word) - 1))
            else:
                toks.append(Token("atom", word, ln, col, off, paren=src.startswith("(", j)))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", ln, col)
    toks.append(Token("eof", None, line, i - line_start + 1, i))
    return toks




class Parser:
    def __init__(self, src, file=None):
        self.toks = tokenize(src)
        self.i = 0
        self.file = file
        self.directive = False
        self.varmap = {}

    # -- token helpers ---------------------------------------------------
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.next()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise ParseError(f"unexpected {t.value if t.value is not None else 'end of input'!r}",
                             t.line, t.col, expected=(want,))
        return t

    def loc(self, t):
        return Location(t.line, t.col, t.offset, self.file)

    # -- terms -------------------------------------------------------------
    def _prefix_table(self):
        if self.directive:
            return {**PREFIX, **DIRECTIVE_PREFIX}
        return PREFIX

    @staticmethod
    def _starts_term(t):
        if t.kind in ("num", "var"):
            return True
        if t.kind == "punct":
            return t.value in "([{"
        if t.kind == "atom":
            return t.value not in INFIX or t.value in PREFIX
        return False

    def parse(self, max_prec=1200):
        left, left_prec = self.parse_primary(max_prec)
        while True:
            t = self.peek()
            if t.kind == "punct" and t.value == ",":
                name = ","
            elif t.kind == "atom" and t.value in INFIX:
                name = t.value
            else:
                break
            prec, typ = INFIX[name]
            if prec > max_prec:
                break
            left_max = prec if typ == "yfx" else prec - 1
            right_max = prec if typ == "xfy" else prec - 1
            if left_prec > left_max:
                break
            self.next()
            right, _ = self.parse(right_max)
            left = Struct(name, (left, right))
            left_prec = prec
        return left, left_prec

    def parse_args(self):
        self.expect("punct", "(")
        args = [self.parse(999)[0]]
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.next()
            args.append(self.parse(999)[0])
        self.expect("punct", ")")
        return tuple(args)

    def parse_primary(self, max_prec):
        t = self.next()
        if t.kind == "num":
            return Num(t.value), 0
        if t.kind == "var":
            if t.value == "_":
                v = fresh_var("_")
            else:
                v = self.varmap.setdefault(t.value, Var(t.value))
            if t.paren:
                return Struct("$apply", (v,) + self.parse_args()), 0
            return v, 0
        if t.kind == "punct":
            if t.value == "(":
                inner, _ = self.parse(1200)
                self.expect("punct", ")")
                return inner, 0
            if t.value == "[":
                if self.peek().kind == "punct" and self.peek().value == "]":
                    self.next()
                    return NIL, 0
                items = [self.parse(999)[0]]
                tail = NIL
                while True:
                    p = self.next()
                    if p.kind == "punct" and p.value == ",":
                        items.append(self.parse(999)[0])
                    elif p.kind == "punct" and p.value == "|":
                        tail = self.parse(999)[0]
                        self.expect("punct", "]")
                        break
                    elif p.kind == "punct" and p.value == "]":
                        break
                    else:
                        raise ParseError(f"unexpected {p.value!r} in list", p.line, p.col,
                                         expected=(",", "|", "]"))
                return mklist(items, tail), 0
            raise ParseError(f"unexpected {t.value!r}", t.line, t.col,
                             expected=("term",))
        if t.kind == "atom":
            name = t.value
            if t.paren:
                return Struct(name, self.parse_args()), 0
            nxt = self.peek()
            if name == "-" and nxt.kind == "num":
                self.next()
                return Num(-nxt.value), 0
            table = self._prefix_table()
            if name in table and self._starts_term(nxt):
                prec, typ = table[name]
                if prec > max_prec:
                    prec, typ = 999, typ
                arg_max = prec if typ == "fy" else prec - 1
                arg, _ = self.parse(arg_max)
                return Struct(name, (arg,)), prec
            prec = max(INFIX.get(name, (0,))[0], table.get(name, (0,))[0])
            return Atom(name), (prec if prec <= max_prec else 0)
        if t.kind == "end":
            raise ParseError("unexpected end of clause", t.line, t.col, expected=("term",))
        raise ParseError("unexpected end of input", t.line, t.col, expected=("term",))

    # -- clauses -----------------------------------------------------------
    def read_clause(self):
        """Return the next clause term with its start token, or None at EOF."""
        start = self.peek()
        if start.kind == "eof":
            return None, start
        self.varmap = {}
        self.directive = start.kind == "atom" and start.value == ":-" and not start.paren
        if self.directive:
            word, nxt = self.peek(1), self.peek(2)
            if (word.kind == "atom" and not word.paren and word.value not in DIRECTIVE_PREFIX
                    and nxt.kind == "atom" and nxt.value == "pred"):
                raise UnknownStatus(f"unknown assertion status {word.value!r}", word.line,
                                    word.col, expected=STATUSES)
        term, _ = self.parse(1200)
        end = self.peek()
        if end.kind != "end":
            raise ParseError(f"unexpected {end.value if end.value is not None else 'end of input'!r}",
                             end.line, end.col, expected=("operator", "."))
        self.next()
        self.directive = False
        return term, start


def flatten_conj(t):
    out = []
    while isinstance(t, Struct) and t.name == "," and len(t.args) == 2:
        out.extend(flatten_conj(t.args[0]))
        t = t.args[1]
    out.append(t)
    return out


def _comp_split(t):
    """Split ``X + det`` into ``(X, (det,))`` when the right operand is a comp property."""
    comp = []
    while (isinstance(t, Struct) and t.name == "+" and len(t.args) == 2
           and _is_comp(t.args[1])):
        comp = flatten_conj(t.args[1]) + comp
        t = t.args[0]
    return t, tuple(comp)


def _is_comp(t):
    items = flatten_conj(t)
    return all(isinstance(x, (Atom, Struct)) and x.name in COMP_PROPS for x in items)


def _conj(t):
    if isinstance(t, Atom) and t.name == "true":
        return ()
    return tuple(flatten_conj(t))


def build_pred_assertion(status, payload, location):
    success = calls = ()
    comp = ()
    if isinstance(payload, Struct) and payload.name == "=>" and len(payload.args) == 2:
        payload, s = payload.args
        s, comp = _comp_split(s)
        success = _conj(s)
    if isinstance(payload, Struct) and payload.name == ":" and len(payload.args) == 2:
        payload, c = payload.args
        if not comp:
            c, comp = _comp_split(c)
        calls = _conj(c)
    if not comp:
        payload, comp = _comp_split(payload)
    head = payload
    if not isinstance(head, (Atom, Struct)):
        raise ParseError(f"assertion head must be callable, got {head!r}",
                         location.line, location.col)
    return Assertion(status=status, kind="pred", head=head, calls=calls, success=success,
                     comp=comp, location=location)


def _export_specs(t):
    out = []
    items, _ = list_items(t) if isinstance(t, Struct) and t.name == "." else ([t], None)
    for it in items:
        for spec in flatten_conj(it):
            if (isinstance(spec, Struct) and spec.name == "/" and isinstance(spec.args[0], Atom)
                    and isinstance(spec.args[1], Num)):
                out.append((spec.args[0].name, spec.args[1].value))
            else:
                raise ParseError(f"bad export spec {spec!r}")
    return out


def body_literal(t, location):
    if isinstance(t, Struct) and t.name in ("true", "check", "trust") and t.args:
        calls = () if t.args == (Atom("true"),) else tuple(t.args)
        return Assertion(status=t.name, kind="program_point", calls=calls,
                         location=location)
    if isinstance(t, (Var, Num)):
        raise ParseError(f"goal must be callable, got {t!r}", location.line, location.col)
    return t


def parse_program(source, file=None):
    """Parse ``.mlp`` source text into a :class:`Program`."""
    p = Parser(source, file)
    clauses, assertions, modedefs, exports = [], [], [], []
    while True:
        term, start = p.read_clause()
        if term is None:
            break
        loc = p.loc(start)
        if isinstance(term, Struct) and term.name == ":-" and len(term.args) == 1:
            _directive(term.args[0], loc, assertions, modedefs, exports)
            continue
        if isinstance(term, Struct) and term.name == ":-" and len(term.args) == 2:
            head, body = term.args
            lits = [body_literal(lit, loc) for lit in flatten_conj(body)]
        else:
            head, lits = term, []
        if not isinstance(head, (Atom, Struct)):
            raise ParseError(f"clause head must be callable, got {head!r}", loc.line, loc.col)
        clauses.append(Clause(head, tuple(lits), loc))
    _attach_body_locations(p, source, clauses)
    order = {}
    for c in clauses:
        order.setdefault(c.key, len(order))
    clauses.sort(key=lambda c: order[c.key])
    return Program(clauses=tuple(clauses),
                   assertions=canonical_order(assertions, clauses),
                   modedefs=tuple(modedefs), exports=tuple(exports), source_file=file)


def _attach_body_locations(p, source, clauses):
    """Give each program-point assertion the position of its own literal.

    Literal positions are recovered by scanning the token stream for
    ``true(``/``check(``/``trust(`` tokens in clause bodies, in order.
    """
    toks = [t for t in p.toks if t.kind == "atom" and t.paren
            and t.value in ("true", "check", "trust")]
    cursor = 0
    for ci, c in enumerate(clauses):
        new_body = []
        changed = False
        for lit in c.body:
            if isinstance(lit, Assertion):
                while cursor < len(toks) and toks[cursor].offset < c.location.offset:
                    cursor += 1
                if cursor < len(toks):
                    t = toks[cursor]
                    cursor += 1
                    lit = Assertion(lit.status, lit.kind, calls=lit.calls,
                                    location=Location(t.line, t.col, t.offset, p.file))
                    changed = True
            new_body.append(lit)
        if changed:
            object.__setattr__(c, "body", tuple(new_body))


def _directive(t, loc, assertions, modedefs, exports):
    if isinstance(t, Struct) and t.name == "modedef" and len(t.args) == 1:
        modedefs.append(_modedef(t.args[0], loc))
        return
    if isinstance(t, Struct) and t.name == "export" and len(t.args) == 1:
        exports.extend(_export_specs(t.args[0]))
        return
    if isinstance(t, Struct) and t.name == "pred" and len(t.args) == 1:
        assertions.append(build_pred_assertion("check", t.args[0], loc))
        return
    if isinstance(t, Struct) and t.name in STATUSES and len(t.args) == 1:
        inner = t.args[0]
        is_pred = isinstance(inner, Struct) and inner.name == "pred" and len(inner.args) == 1
        if t.name != "entry" and is_pred:
            assertions.append(build_pred_assertion(t.name, inner.args[0], loc))
            return
        if t.name == "entry":
            if isinstance(inner, Struct) and inner.name == "pred" and len(inner.args) == 1:
                inner = inner.args[0]
            a = build_pred_assertion("entry", inner, loc)
            if a.success:
                raise ParseError("entry assertions take no success part", loc.line, loc.col)
            assertions.append(a)
            return
    if (isinstance(t, Struct) and len(t.args) == 1 and isinstance(t.args[0], Struct)
            and t.args[0].name == "pred"):
        raise UnknownStatus(f"unknown assertion status {t.name!r}", loc.line, loc.col,
                            expected=STATUSES)
    raise ParseError(f"unsupported directive {t!r}", loc.line, loc.col)


def _modedef(t, loc):
    success = calls = ()
    if isinstance(t, Struct) and t.name == "=>" and len(t.args) == 2:
        t, s = t.args
        success = _conj(s)
    if isinstance(t, Struct) and t.name == ":" and len(t.args) == 2:
        t, c = t.args
        calls = _conj(c)
    if not isinstance(t, Struct) or not all(isinstance(a, Var) for a in t.args) or len(t.args) > 2:
        raise ParseError(f"bad modedef head {t!r}", loc.line, loc.col)
    return ModeDef(t.name, t.args[0], t.args[1] if len(t.args) == 2 else None,
                   calls, success, loc)


def parse_term(text):
    """Parse a single term (a trailing ``.`` is optional)."""
    text = text.strip()
    if not text.endswith("."):
        text += " ."
    p = Parser(text)
    term, _ = p.read_clause()
    if p.peek().kind != "eof":
        t = p.peek()
        raise ParseError("trailing input after term", t.line, t.col)
    return term
