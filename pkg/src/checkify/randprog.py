"""Random small programs for cross-validating the two checkers.

Programs are acyclic (predicate ``i`` only calls predicates with a larger
index), so every goal terminates, and they stay inside the fragment all
domains handle: unification, calls, and a few type tests.
"""

from __future__ import annotations

import random

from .reader import parse_program
from .terms import Atom, Struct, Var
from .writer import format_term

_VARS = ("X", "Y", "Z", "W")
_TESTS = ("atom", "var", "nonvar", "ground")
_MODES = ("?", "-", "+ground", "+atom")


def _term(rng, vars, depth):
    r = rng.random()
    if depth <= 0 or r < 0.45:
        return rng.choice(vars)
    if r < 0.65:
        return Atom(rng.choice(("a", "b", "[]")))
    if r < 0.85:
        return Struct("f", (_term(rng, vars, depth - 1),))
    return Struct("g", (_term(rng, vars, depth - 1), _term(rng, vars, depth - 1)))


def _head_arg(rng, vars):
    return rng.choice(vars) if rng.random() < 0.7 else _term(rng, vars, 1)


def _call(rng, vars, pred):
    name, n = pred
    return Struct(name, tuple(_term(rng, vars, 1) for _ in range(n))) if n else Atom(name)


def _literal(rng, vars, callees):
    r = rng.random()
    if callees and r < 0.35:
        return _call(rng, vars, rng.choice(callees))
    if r < 0.5:
        return Struct(rng.choice(_TESTS), (rng.choice(vars),))
    lhs = rng.choice(vars)
    others = [v for v in vars if v != lhs] or vars
    return Struct("=", (lhs, _term(rng, others, 2)))


def random_source(seed, max_preds=3, max_clauses=6, max_body=3):
    """Source text of a program with at most ``max_preds`` predicates and
    ``max_clauses`` clauses in all, with one entry on the first predicate."""
    rng = random.Random(seed)
    n_preds = rng.randint(1, max_preds)
    preds = [(f"p{i}", rng.randint(1, 3)) for i in range(n_preds)]
    counts = [1] * n_preds
    for _ in range(rng.randint(n_preds, max_clauses) - n_preds):
        counts[rng.randrange(n_preds)] += 1
    name, n = preds[0]
    lines = [f":- entry {name}({','.join(rng.choice(_MODES) for _ in range(n))}).", ""]
    for i, ((name, n), count) in enumerate(zip(preds, counts)):
        callees = preds[i + 1:]
        for j in range(count):
            vars = [Var(v) for v in _VARS[:rng.randint(n, len(_VARS))]]
            head = format_term(Struct(name, tuple(_head_arg(rng, vars) for _ in range(n))))
            lits = [_literal(rng, vars, callees) for _ in range(rng.randint(0, max_body))]
            if j == 0 and callees:
                # keep every predicate reachable from the entry
                lits.insert(rng.randint(0, len(lits)), _call(rng, vars, callees[0]))
            body = [format_term(lit, 999) for lit in lits]
            lines.append(f"{head} :-\n    " + ",\n    ".join(body) + "." if body else f"{head}.")
    return "\n".join(lines) + "\n"


def random_program(seed, **kw):
    return parse_program(random_source(seed, **kw), file=f"random{seed}.mlp")
