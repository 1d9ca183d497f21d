"""Goal-dependent fixpoint analysis over a pluggable domain, and program annotation.

The analysis graph has one node per (predicate, call pattern).  Call
patterns and successes are asubs over the formal arguments ``$A1..$An``;
program points hold asubs over the clause variables.  Iteration is a fixed
round-robin over the nodes in creation order, repeated until neither a
success nor the node set changes, so two runs give identical graphs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from itertools import count

from . import faults
from .domains import Domain, get_domain
from .modedefs import expand_modes
from .program import Assertion, Clause, Program, canonical_order
from .engine import is_builtin
from .terms import Atom, Struct, Var, functor, substitute, term_vars

log = logging.getLogger(__name__)


class IterationLimit(RuntimeError):
    pass


def formals(n):
    return tuple(Var(f"$A{i + 1}", -4) for i in range(n))


_TMP = count(1)


def _temps(prefix, n):
    k = next(_TMP)
    return tuple(Var(f"${prefix}{k}_{i + 1}", -5) for i in range(n))


def _args(t):
    return t.args if isinstance(t, Struct) else ()


@dataclass
class Node:
    id: int
    key: tuple
    call: object
    success: object
    index: int = 1  # version number within the predicate

    @property
    def label(self):
        return f"{self.key[0]}/{self.key[1]}#{self.index}"


@dataclass
class AnalysisGraph:
    program: Program  # mode-expanded program that was analyzed
    source: Program
    domain: Domain
    nodes: list = field(default_factory=list)
    points: dict = field(default_factory=dict)  # (node, clause, point) -> asub
    extras: dict = field(default_factory=dict)  # (node, clause, point) -> props
    edges: dict = field(default_factory=dict)  # (node, clause, goal) -> callee node id
    entry_nodes: list = field(default_factory=list)
    rounds: int = 0
    warnings: list = field(default_factory=list)

    def node(self, nid):
        return self._by_id[nid]

    def versions(self, key):
        return [n for n in self.nodes if n.key == key]

    def success_of(self, key):
        """Lub of the successes of every version of ``key`` (None when never called)."""
        vs = self.versions(key)
        if not vs:
            return None
        out = vs[0].success
        for n in vs[1:]:
            out = self.domain.lub(out, n.success)
        return out

    def call_of(self, key):
        vs = self.versions(key)
        if not vs:
            return None
        out = vs[0].call
        for n in vs[1:]:
            out = self.domain.lub(out, n.call)
        return out

    def describe(self, nid):
        n = self.node(nid)
        d = self.domain
        return f"{n.label} calls {d.to_properties(n.call)} success {d.to_properties(n.success)}"


# -- library transfer tables ----------------------------------------------------

def _p(name, *args):
    return Struct(name, args)


def _length_rows(L, N):
    rows = [
        ((_p("list", L), _p("var", N)), (_p("int", N),)),
        ((_p("var", L), _p("int", N)), (_p("list", L),)),
        ((_p("list", L), _p("int", N)), ()),
        ((), (_p("list", L), _p("int", N))),
    ]
    if faults.active("length_missing_nondet"):
        rows = rows[:3]
    return rows


_TYPE_TESTS = {
    ("var", 1): "var", ("nonvar", 1): "nonvar", ("atom", 1): "atom",
    ("number", 1): "num", ("integer", 1): "int", ("ground", 1): "ground",
}
_COMPARISONS = {("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2)}


class Analyzer:
    def __init__(self, program, domain="modes", *, k=2, cap=5000, max_rounds=200,
                 max_versions=None, entry_asubs=None, treat_user_checks="ignore"):
        self.source = program
        self.program = expand_modes(program)
        self.dom = get_domain(domain, k=k, cap=cap) if isinstance(domain, str) else domain
        self.max_rounds = max_rounds
        if max_versions is None:
            max_versions = 10 ** 6 if self.dom.name == "concrete" else 16
        self.max_versions = max_versions
        self.entry_asubs = entry_asubs
        self.preds = self.program.predicates()
        statuses = ("trust", "check") if treat_user_checks == "trust" else ("trust",)
        self.trusts = {}
        for a in self.program.pred_assertions():
            if a.status in statuses:
                self.trusts.setdefault(a.key, []).append(a)
        self.nodes = []
        self.index = {}
        self.created = False

    # -- nodes ------------------------------------------------------------------
    def node_for(self, key, call):
        d = self.dom
        nk = (key, d.key(call))
        nid = self.index.get(nk)
        if nid is not None:
            return self.nodes[nid]
        same = [n for n in self.nodes if n.key == key]
        if len(same) >= self.max_versions:
            # too many versions: generalize onto the lub of the known calls
            for n in same:
                call = d.lub(n.call, call)
            nk = (key, d.key(call))
            nid = self.index.get(nk)
            if nid is not None:
                return self.nodes[nid]
        node = Node(len(self.nodes), key, call, d.bottom(d.vars(call)), len(same) + 1)
        self.nodes.append(node)
        self.index[nk] = node.id
        self.created = True
        return node

    # -- patterns ---------------------------------------------------------------
    def call_pattern(self, a, args):
        d = self.dom
        bs = _temps("B", len(args))
        e = d.extend(a, bs)
        for b, t in zip(bs, args):
            e = d.unify(e, b, t)
        e = d.project(e, bs)
        return d.rename(e, dict(zip(bs, formals(len(args)))))

    def apply_success(self, a, args, succ):
        """Conjoin the success of a call (over formals) back into the caller's asub."""
        d = self.dom
        cs = _temps("C", len(args))
        r = d.combine(a, d.rename(succ, dict(zip(formals(len(args)), cs))))
        for c, t in zip(cs, args):
            r = d.unify(r, c, t)
        return d.project(r, d.vars(a))

    def _trusted(self, key, call, succ):
        extra = []
        for t in self.trusts.get(key, ()):
            hargs = _args(t.head)
            if not all(isinstance(x, Var) for x in hargs) or len(set(hargs)) != len(hargs):
                continue
            m = dict(zip(hargs, formals(len(hargs))))
            if self.dom.entails(call, [substitute(p, m) for p in t.calls]):
                success = [substitute(p, m) for p in t.success]
                succ = self.dom.restrict(succ, success)
                extra.extend(success)
        return succ, extra

    # -- fixpoint ---------------------------------------------------------------
    def entries(self):
        d = self.dom
        if self.entry_asubs is not None:
            return [(key, a) for key, a in self.entry_asubs]
        out = {}
        ents = self.program.entries()
        for e in ents:
            hargs = _args(e.head)
            vs = term_vars(Struct("$e", tuple(hargs) + tuple(e.calls)))
            a = d.restrict(d.top(vs), list(e.calls))
            cp = self.call_pattern(a, hargs)
            out[e.key] = d.lub(out[e.key], cp) if e.key in out else cp
        if not ents:
            for key in self.program.exported():
                out[key] = d.top(formals(key[1]))
        return list(out.items())

    def run(self):
        d = self.dom
        entry_nodes = [self.node_for(key, a).id for key, a in self.entries()]
        rounds = 0
        while True:
            rounds += 1
            if rounds > self.max_rounds:
                raise IterationLimit(f"no fixpoint after {self.max_rounds} rounds")
            self.created = False
            changed = False
            self.points, self.extras, self.edges = {}, {}, {}
            i = 0
            while i < len(self.nodes):
                node = self.nodes[i]
                new = self.solve_node(node)
                if not d.leq(new, node.success):
                    node.success = d.widen(node.success, new)
                    changed = True
                i += 1
            if not changed and not self.created:
                break
        graph = AnalysisGraph(self.program, self.source, d, rounds=rounds)
        graph.entry_nodes = entry_nodes
        live = self._reachable(entry_nodes)
        graph.nodes = [n for n in self.nodes if n.id in live]
        for n in graph.nodes:
            n.index = 1 + sum(1 for m in graph.nodes if m.key == n.key and m.id < n.id)
        graph._by_id = {n.id: n for n in self.nodes}
        graph.points = {k: v for k, v in self.points.items() if k[0] in live}
        graph.extras = {k: v for k, v in self.extras.items() if k[0] in live}
        graph.edges = {k: v for k, v in self.edges.items() if k[0] in live}
        return graph

    def _reachable(self, roots):
        seen, stack = set(), list(roots)
        callees = {}
        for (nid, _, _), c in self.edges.items():
            callees.setdefault(nid, set()).update(c)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(callees.get(n, ()))
        return seen

    def solve_node(self, node):
        d = self.dom
        out = d.bottom(d.vars(node.call))
        clauses = self.preds.get(node.key, [])
        for ci, clause in enumerate(clauses):
            out = d.lub(out, self.solve_clause(node, ci, clause))
            if faults.active("fixpoint_cut_deadcode") and any(
                    g == Atom("!") for g in clause.goals()):
                break
        return out

    def solve_clause(self, node, ci, clause):
        d = self.dom
        fs = formals(node.key[1])
        cvars = tuple(clause.variables())
        a = d.extend(node.call, cvars)
        for f, t in zip(fs, _args(clause.head)):
            a = d.unify(a, f, t)
        a = d.project(a, cvars)
        self.points[(node.id, ci, 0)] = a
        gi = 0
        for lit in clause.body:
            if isinstance(lit, Assertion):
                if lit.status == "trust" and not d.is_bottom(a):
                    a = d.restrict(a, list(lit.calls))
                    self.points[(node.id, ci, gi)] = a
                continue
            extra = ()
            if not d.is_bottom(a):
                a, extra = self.solve_goal(a, lit, (node.id, ci, gi))
            gi += 1
            self.points[(node.id, ci, gi)] = a
            if extra and not d.is_bottom(a):
                self.extras[(node.id, ci, gi)] = tuple(extra)
        if d.is_bottom(a):
            return d.bottom(fs)
        e = d.extend(a, fs)
        for f, t in zip(fs, _args(clause.head)):
            e = d.unify(e, f, t)
        return d.project(e, fs)

    def solve_goal(self, a, lit, site):
        d = self.dom
        if isinstance(lit, Var) or (isinstance(lit, Struct) and lit.name == "$apply"):
            self._warn(f"meta-call {lit!r} treated as unknown")
            return self.havoc(a, term_vars(lit)), ()
        key = functor(lit)
        args = _args(lit)
        if key in self.preds:
            return self.solve_call(a, key, args, site)
        return self.solve_builtin(a, key, args, lit)

    def solve_call(self, a, key, args, site):
        d = self.dom
        result = d.bottom(d.vars(a))
        extra = []
        for piece in d.split(a):
            cp = self.call_pattern(piece, args)
            node = self.node_for(key, cp)
            self.edges.setdefault(site, set()).add(node.id)
            succ, ex = self._trusted(key, cp, node.success)
            m = dict(zip(formals(len(args)), args))
            extra.extend(q for q in (substitute(p, m) for p in ex) if q not in extra)
            result = d.lub(result, self.apply_success(piece, args, succ))
        return result, extra

    # -- builtins -----------------------------------------------------------------
    def havoc(self, a, vs):
        """Let the variables ``vs`` be instantiated arbitrarily."""
        d = self.dom
        vs = [v for v in vs if v in d.vars(a)]
        if not vs:
            return a
        ts = _temps("H", len(vs))
        e = d.extend_unknown(a, ts)
        for v, t in zip(vs, ts):
            e = d.unify(e, v, t)
        return d.project(e, d.vars(a))

    def solve_builtin(self, a, key, args, lit):
        d = self.dom
        if key == ("!", 0):
            return a, ()
        r = d.builtin(a, key, args)
        if r is not NotImplemented:
            return r, ()
        if key == ("=", 2):
            return d.unify(a, args[0], args[1]), ()
        if key in (("\\=", 2), ("==", 2), ("\\==", 2), ("true", 0)):
            if key == ("\\=", 2) and faults.active("neq_builtin_wrong"):
                return d.restrict(a, [_p("ground", v) for v in term_vars(lit)]), ()
            return a, ()
        if key == ("fail", 0):
            return d.bottom(d.vars(a)), ()
        if key in _TYPE_TESTS:
            return d.restrict(a, [_p(_TYPE_TESTS[key], args[0])]), ()
        if key in _COMPARISONS:
            return d.restrict(a, [_p("ground", v) for v in term_vars(lit)]), ()
        if key == ("is", 2):
            return self._is(a, args)
        if key == ("length", 2):
            return self._length(a, args)
        if key == ("arg", 3):
            return self._arg(a, args)
        # unknown to the engine as well: the call raises, so nothing succeeds
        if not is_builtin(key):
            return d.bottom(d.vars(a)), ()
        self._warn(f"no transfer function for {key[0]}/{key[1]}; using top")
        return self.havoc(a, term_vars(lit)), ()

    def _warn(self, msg):
        log.warning(msg)

    def _is(self, a, args):
        d = self.dom
        z, e = args
        a = d.restrict(a, [_p("ground", v) for v in term_vars(e)])
        (t,) = _temps("T", 1)
        b = d.restrict(d.extend_unknown(a, (t,)), [_p("num", t)])
        b = d.project(d.unify(b, z, t), d.vars(a))
        integer = isinstance(e, Struct) and e.name == "**" and len(e.args) == 2 \
            and faults.active("trust_exp_int")
        extra = [_p("int" if integer else "num", z)] if isinstance(z, Var) else []
        return b, extra

    def _length(self, a, args):
        d = self.dom
        L, N = args
        out = None
        extra = []
        for calls, success in _length_rows(L, N):
            if not d.entails(a, list(calls)):
                continue
            r = d.restrict(self.havoc(a, term_vars(Struct("$", (L, N)))), list(success))
            out = r if out is None else d.glb(out, r)
            extra.extend(p for p in success if p not in extra)
        if out is None:
            return d.bottom(d.vars(a)), ()
        return out, [p for p in extra if isinstance(p.args[-1], Var)]

    def _arg(self, a, args):
        d = self.dom
        n, t, x = args
        a = d.restrict(a, [_p("nonvar", t)])
        a = d.restrict(self.havoc(a, term_vars(n)), [_p("int", n)] if isinstance(n, Var) else [])
        (s,) = _temps("S", 1)
        b = d.subterm(d.extend(a, (s,)), t, s)
        b = d.unify(b, x, s)
        return d.project(b, d.vars(a)), ()


def analyze(program, domain="modes", **opts):
    """Analyze ``program`` from its entry assertions and return the analysis graph."""
    return Analyzer(program, domain, **opts).run()


def swap_versions(graph, a, b):
    """Copy of ``graph`` where nodes ``a`` and ``b`` trade calls, successes and point states.

    Each version then describes the other's calling context, while their lub,
    and so any collapsed output, is unchanged.
    """
    na, nb = graph.node(a), graph.node(b)
    nodes = []
    for n in graph.nodes:
        if n.id == a:
            n = replace(n, call=nb.call, success=nb.success)
        elif n.id == b:
            n = replace(n, call=na.call, success=na.success)
        nodes.append(n)
    swap = {a: b, b: a}
    points = {k: graph.points.get((swap.get(k[0], k[0]),) + k[1:], v)
              for k, v in graph.points.items()}
    extras = {k: graph.extras.get((swap.get(k[0], k[0]),) + k[1:], ())
              for k in graph.extras}
    out = replace(graph, nodes=nodes, points=points, extras=extras)
    out._by_id = {n.id: n for n in nodes}
    return out


# -- annotation -------------------------------------------------------------------

def _head_vars(clauses, key):
    if clauses:
        args = _args(clauses[0].head)
        if all(isinstance(a, Var) for a in args) and len(set(args)) == len(args):
            return tuple(args)
    return tuple(Var(f"A{i + 1}") for i in range(key[1]))


def _rename_goal(goal, name):
    if isinstance(goal, Struct):
        return Struct(name, goal.args)
    return Atom(name)


def version_names(graph):
    """Printed predicate name of every node: the first version keeps the name.

    Nodes reached from one call site cannot be told apart by the printed call,
    so they are merged into one version and share a name.
    """
    root = {n.id: n.id for n in graph.nodes}

    def find(i):
        while root[i] != i:
            root[i] = root[root[i]]
            i = root[i]
        return i

    changed = True
    while changed:
        changed = False
        sites = {}
        for (nid, ci, gi), callees in graph.edges.items():
            sites.setdefault((find(nid), ci, gi), set()).update(callees)
        for callees in sites.values():
            ids = sorted(callees)
            for j in ids[1:]:
                a, b = find(ids[0]), find(j)
                if a != b:
                    root[max(a, b)] = min(a, b)
                    changed = True
    names = {}
    for key in graph.program.predicates():
        ordinal = {}
        for n in graph.versions(key):
            r = find(n.id)
            if r not in ordinal:
                ordinal[r] = len(ordinal)
            i = ordinal[r]
            names[n.id] = key[0] if i == 0 else f"{key[0]}_v{i + 1}"
    return names


def _join(d, asubs):
    out = asubs[0]
    for a in asubs[1:]:
        out = d.lub(out, a)
    return out


def annotate(graph, materialize_versions=True):
    """Program with ``true`` assertions for every version (or merged) and every point.

    Point assertions carry ``tag = (node ids, clause index, point index)``;
    predicate assertions carry ``tag = (node ids, "pred")``.
    """
    d = graph.domain
    names = version_names(graph)
    preds = graph.program.predicates()
    clauses, generated = [], []
    for key, cls in preds.items():
        versions = graph.versions(key)
        if not versions:
            clauses.extend(replace(c, body=tuple(_user_literals(c.body))) for c in cls)
            continue
        if materialize_versions:
            by_name = {}
            for n in versions:
                by_name.setdefault(names[n.id], []).append(n)
            groups = list(by_name.values())
        else:
            groups = [versions]
        hv = _head_vars(cls, key)
        fmap = dict(zip(formals(key[1]), hv))
        for grp in groups:
            ids = tuple(n.id for n in grp)
            name = names[grp[0].id] if materialize_versions else key[0]
            call = _join(d, [n.call for n in grp])
            succ = _join(d, [n.success for n in grp])
            generated.append(Assertion(
                "true", "pred", head=Struct(name, hv) if hv else Atom(name),
                calls=tuple(substitute(p, fmap) for p in d.to_properties(call)),
                success=tuple(substitute(p, fmap) for p in d.to_properties(succ)),
                tag=(ids, "pred")))
            for ci, c in enumerate(cls):
                clauses.append(_annotate_clause(graph, grp, ci, c, name, names,
                                                materialize_versions))
    source = graph.source
    kept = [a for a in source.assertions if a.kind == "pred" and a.status != "true"]
    assertions = canonical_order(kept + generated, clauses)
    return Program(tuple(clauses), assertions, source.modedefs, source.exports,
                   source.source_file)


def _user_literals(body):
    return [lit for lit in body if not (isinstance(lit, Assertion) and lit.status == "true")]


def _annotate_clause(graph, grp, ci, clause, name, names, materialize):
    d = graph.domain
    cvars = tuple(clause.variables())
    ids = tuple(n.id for n in grp)

    def point(idx):
        asubs = [graph.points.get((n.id, ci, idx)) for n in grp]
        asubs = [d.project(a, cvars) if a is not None else d.bottom(cvars) for a in asubs]
        a = _join(d, asubs)
        props = list(d.to_properties(a))
        if not d.is_bottom(a):
            live = [n.id for n, s in zip(grp, asubs) if not d.is_bottom(s)]
            extra = [graph.extras.get((nid, ci, idx), ()) for nid in live]
            for p in extra[0] if extra else ():
                if all(p in e for e in extra) and p not in props:
                    props.append(p)
        return Assertion("true", "program_point", calls=tuple(props), tag=(ids, ci, idx))

    body = [point(0)]
    gi = 0
    for lit in clause.body:
        if isinstance(lit, Assertion):
            if lit.status != "true":
                body.append(lit)
            continue
        goal = lit
        user_call = isinstance(lit, (Atom, Struct)) and functor(lit) in graph.program.predicates()
        if materialize and user_call:
            callees = set().union(*(graph.edges.get((n.id, ci, gi), ()) for n in grp))
            if callees:
                goal = _rename_goal(lit, names[min(callees)])
        body.append(goal)
        gi += 1
        body.append(point(gi))
    head = _rename_goal(clause.head, name)
    return Clause(head, tuple(body), clause.location)
