import random
from itertools import chain, combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from checkify import faults
from checkify.domains import get_domain
from checkify.domains.modes import NAMES as MODE_NAMES
from checkify.domains.sharing import powerset
from checkify.properties import eval_check
from checkify.reader import parse_term
from checkify.terms import TOP, Atom, Struct, Var
from checkify.writer import format_term

from . import oracles

X, Y, Z, W = (Var(n) for n in "XYZW")
P = parse_term


def check_lattice(d, carrier, same=None):
    """Lattice laws on every pair and triple of ``carrier``."""
    same = same or (lambda a, b: d.leq(a, b) and d.leq(b, a))
    for a in carrier:
        assert same(d.lub(a, a), a) and same(d.glb(a, a), a)
        assert d.leq(a, a)
    for a, b in product(carrier, repeat=2):
        assert same(d.lub(a, b), d.lub(b, a))
        assert same(d.glb(a, b), d.glb(b, a))
        assert same(d.lub(a, d.glb(a, b)), a)
        assert same(d.glb(a, d.lub(a, b)), a)
        assert d.leq(a, d.lub(a, b)) and d.leq(d.glb(a, b), a)
        if d.leq(a, b) and d.leq(b, a):
            assert a == b
    for a, b, c in product(carrier, repeat=3):
        assert same(d.lub(a, d.lub(b, c)), d.lub(d.lub(a, b), c))
        assert same(d.glb(a, d.glb(b, c)), d.glb(d.glb(a, b), c))
        if d.leq(a, b) and d.leq(b, c):
            assert d.leq(a, c)


# -- modes -------------------------------------------------------------------------------

MODES = get_domain("modes")


def mode(name, v=X):
    if name == "bottom":
        return MODES.bottom((v,))
    return MODES.from_properties((v,), [Struct(name, (v,))])


def mode_name(a, v=X):
    return "bottom" if a.bot else MODE_NAMES[a.value(v)]


def test_modes_carrier_has_seven_values():
    assert sorted(mode_name(mode(n)) for n in oracles.MODES) == sorted(oracles.MODES)


def test_modes_lattice_laws():
    check_lattice(MODES, [mode(n) for n in oracles.MODES])


@pytest.mark.parametrize("a,b", list(product(oracles.MODES, repeat=2)))
def test_modes_order_matches_brute_force(a, b):
    assert MODES.leq(mode(a), mode(b)) == oracles.modes_leq(a, b)
    assert mode_name(MODES.lub(mode(a), mode(b))) == oracles.modes_lub(a, b)
    assert mode_name(MODES.glb(mode(a), mode(b))) == oracles.modes_glb(a, b)


@pytest.mark.parametrize("a,b,want", [("ground", "var", "any"), ("ground", "ngv", "nonvar"),
                                      ("var", "ngv", "nonground")])
def test_modes_lub_examples(a, b, want):
    assert mode_name(MODES.lub(mode(a), mode(b))) == want
    assert oracles.modes_lub(a, b) == want


def test_modes_lattice_laws_two_variables():
    from checkify.domains.modes import VALUES, _make, _pair
    carrier = {MODES.bottom((X, Y))}
    for cx, cy, shared in product(VALUES[1:], VALUES[1:], (False, True)):
        pairs = {_pair(X, Y)} if shared else set()
        carrier.add(_make((X, Y), {X: cx, Y: cy}, pairs))
    check_lattice(MODES, sorted(carrier, key=repr))


def test_modes_unify_list_cell_is_nonvar():
    a = MODES.from_properties((X, Y, Z), [P("any(X)"), P("var(Y)"), P("var(Z)")])
    r = MODES.unify(a, Z, P("[X|Y]"))
    assert mode_name(r, Z) == "nonvar"


def test_modes_clash_is_bottom():
    assert MODES.unify(MODES.top((X,)), Atom("a"), Atom("b")).bot


def test_modes_ground_propagates():
    a = MODES.from_properties((X, Y), [P("ground(X)")])
    assert mode_name(MODES.unify(a, X, Y), Y) == "ground"


def test_modes_ground_propagation_by_enumeration():
    # every binding over a 3-term universe with X ground leaves Y ground after X = Y
    universe = [Atom("a"), P("f(A)"), Var("B")]
    for tx, ty in product(universe, repeat=2):
        theta = {X: tx, Y: ty}
        if oracles.term_class(tx) != "g":
            continue
        after = oracles.concrete_unify(theta, X, Y)
        if after is not None:
            assert oracles.term_class(after[Y]) == "g"


def test_modes_aliasing_demotes_transitively():
    # Y and Z share, so binding Y to a nonground term must not leave Z ground-only
    from checkify.domains.modes import _make, _pair, V
    a = _make((X, Y, Z), {X: V | 4, Y: V, Z: V}, {_pair(Y, Z)})
    r = MODES.unify(a, Y, P("f(X)"))
    assert mode_name(r, Z) != "ground"


def test_modes_to_properties_example():
    a = MODES.from_properties((X, Y, Z), [P("nonvar(Y)"), P("var(Z)")])
    assert [format_term(p) for p in MODES.to_properties(a)] == ["any(X)", "nonvar(Y)", "var(Z)"]
    assert MODES.to_properties(MODES.top(())) == []


def test_modes_gamma_examples():
    a = mode("nonground")
    assert MODES.gamma_member({X: P("f(A)")}, a)
    assert not MODES.gamma_member({X: Atom("a")}, a)


# -- sharing -----------------------------------------------------------------------------

def sharing_carrier(d, vs, extra=True):
    groups = sorted(powerset(vs), key=lambda g: (len(g), sorted(v.name for v in g)))
    out = {d.bottom(vs)}
    for sh in chain.from_iterable(combinations(groups, r) for r in range(len(groups) + 1)):
        out.add(d._make(vs, set(sh)))
        if extra and d.freeness:
            for free in chain.from_iterable(combinations(vs, r) for r in range(len(vs) + 1)):
                out.add(d._make(vs, set(sh), set(free), set()))
                out.add(d._make(vs, set(sh), set(free), set(vs)))
    return sorted(out, key=repr)


@pytest.mark.parametrize("flavour", ["sharing", "shfr", "share_clique"])
def test_sharing_lattice_laws_two_variables(flavour):
    d = get_domain(flavour)
    check_lattice(d, sharing_carrier(d, (X, Y)))


@pytest.mark.parametrize("flavour", ["sharing", "shfr"])
def test_sharing_lattice_laws_three_variables(flavour):
    d = get_domain(flavour)
    carrier = sharing_carrier(d, (X, Y, Z), extra=False)
    for a, b in product(carrier, repeat=2):
        assert d.lub(a, b) == d.lub(b, a) and d.glb(a, b) == d.glb(b, a)
        assert d.lub(a, d.glb(a, b)) == a and d.glb(a, d.lub(a, b)) == a
    rng = random.Random(7)
    for _ in range(3000):
        a, b, c = (rng.choice(carrier) for _ in range(3))
        assert d.lub(a, d.lub(b, c)) == d.lub(d.lub(a, b), c)
        assert d.glb(a, d.glb(b, c)) == d.glb(d.glb(a, b), c)


def test_clique_compaction_output():
    d = get_domain("share_clique")
    a = d._make((X, Y, Z, W), powerset((X, Y, Z)) | {frozenset({W})})
    props = sorted(format_term(p) for p in d.to_properties(a))
    assert props == ["clique([X,Y,Z])", "mshare([[W]])"]


@pytest.mark.parametrize("flavour", ["sharing", "shfr", "share_clique"])
def test_binding_to_atom_grounds(flavour):
    d = get_domain(flavour)
    r = d.unify(d.top((X, Y)), X, Atom("a"))
    assert all(X not in g for g in r.sh)
    assert r.sh == frozenset({frozenset({Y})})


def test_shfr_unify_with_structure():
    d = get_domain("shfr")
    a = d._make((X, Y), {frozenset({X}), frozenset({Y})}, {X, Y}, {X, Y})
    r = d.unify(a, X, P("f(Y)"))
    assert r.sh == frozenset({frozenset({X, Y})})
    assert X not in r.free and Y in r.free


def test_shfr_grounding_drops_freeness_of_aliases():
    d = get_domain("shfr")
    a = d._make((X, Z), {frozenset({X}), frozenset({X, Z})}, {X}, {X, Z})
    r = d.unify(a, Z, Atom("a"))
    assert r.sh == frozenset({frozenset({X})}) and X not in r.free
    # X = Z = A is in the input and leaves X ground
    assert d.gamma_member({X: Var("A"), Z: Var("A")}, a)
    assert d.gamma_member(oracles.concrete_unify({X: Var("A"), Z: Var("A")}, Z, Atom("a")), r)


def test_shfr_unify_with_structure_by_enumeration():
    # bindings with <= 2 run-time variables where X, Y are free and independent
    theta = {X: Var("A"), Y: Var("B")}
    after = oracles.concrete_unify(theta, X, P("f(Y)"))
    assert oracles.sharing_of(after, (X, Y)) == {frozenset({X, Y})}
    assert isinstance(after[Y], Var) and not isinstance(after[X], Var)


def test_linear_emitted_for_shared_linear_terms():
    d = get_domain("shfr")
    a = d.extend(d.top(()), (X, Y, Var("A")))
    a = d.unify(a, X, P("f(A)"))
    a = d.unify(a, Y, P("g(A)"))
    props = [format_term(p) for p in d.to_properties(d.project(a, (X, Y)))]
    assert "linear([X,Y])" in props


def test_sharing_gamma_example():
    d = get_domain("sharing")
    a = d._make((X, Y), {frozenset({X}), frozenset({Y})})
    theta = {X: P("f(U)"), Y: P("g(U)")}
    assert not d.gamma_member(theta, a)
    assert not oracles.sharing_member(theta, (X, Y), a.sh)


# -- depth-k -----------------------------------------------------------------------------

DK = get_domain("depthk", k=2)
SIG_ATOMS, SIG_FUNCTORS = ("a",), (("f", 2),)
PATTERNS = oracles.patterns(2, SIG_ATOMS, SIG_FUNCTORS)
GROUND = oracles.ground_terms(4, SIG_ATOMS, SIG_FUNCTORS)


def dk(p):
    return DK.bottom((X,)) if p is None else DK.from_properties((X,), [_instance(p)])


def _instance(p):
    return Struct("instance", (X, _unwild(p)))


def _unwild(p):
    if p == TOP:
        return Var("_")
    if isinstance(p, Struct):
        return Struct(p.name, tuple(_unwild(a) for a in p.args))
    return p


def gamma(p):
    if p is None:
        return frozenset()
    return frozenset(t for t in GROUND if oracles.matches(t, p))


def pattern_of(a):
    return None if a.bot else a.pats[0]


def test_depthk_carrier_size():
    assert len(PATTERNS) == 11
    assert len({gamma(p) for p in PATTERNS}) == 11


def test_depthk_lattice_laws():
    check_lattice(DK, [dk(None)] + [dk(p) for p in PATTERNS])


def brute_glb(p, q):
    meet = gamma(p) & gamma(q)
    below = [r for r in PATTERNS if gamma(r) <= meet]
    if not below:
        return None
    (best,) = [r for r in below if all(gamma(s) <= gamma(r) for s in below)]
    return best


def brute_lub(p, q):
    above = [r for r in PATTERNS if gamma(p) | gamma(q) <= gamma(r)]
    (best,) = [r for r in above if all(gamma(r) <= gamma(s) for s in above)]
    return best


@pytest.mark.parametrize("p,q", list(product(PATTERNS, repeat=2)), ids=lambda p: format_term(p))
def test_depthk_glb_and_lub_match_brute_force(p, q):
    assert DK.leq(dk(p), dk(q)) == (gamma(p) <= gamma(q))
    assert pattern_of(DK.glb(dk(p), dk(q))) == brute_glb(p, q)
    assert pattern_of(DK.lub(dk(p), dk(q))) == brute_lub(p, q)


def test_depthk_glb_examples():
    fa, ft = P("f(a)"), Struct("f", (TOP,))
    a = DK.from_properties((X,), [P("instance(X, f(_))")])
    b = DK.from_properties((X,), [P("instance(X, f(a))")])
    c = DK.from_properties((X,), [P("instance(X, g(_))")])
    assert a.pats == (ft,) and b.pats == (fa,)
    assert DK.glb(a, b).pats == (fa,)
    assert DK.glb(b, c).bot


def test_depthk_glb_fault_loses_greatest():
    wrong = 0
    with faults.injected("depthk_glb_not_greatest"):
        for p, q in product(PATTERNS, repeat=2):
            if pattern_of(DK.glb(dk(p), dk(q))) != brute_glb(p, q):
                wrong += 1
    assert wrong > 0


def test_depthk_patterns_are_bounded():
    a = DK.unify(DK.top((X,)), X, P("f(f(f(a,a),a),a)"))
    assert a.pats == (Struct("f", (Struct("f", (TOP, TOP)), Atom("a"))),)


# -- concrete ----------------------------------------------------------------------------

def test_concrete_singleton_prepend():
    from checkify.analyzer import analyze, formals
    from checkify.checkification import concrete_mismatches
    from checkify.domains.concrete import ConcreteDomain
    from checkify.scenarios import load
    prog, goal = load("prepend.mlp"), P("prepend(a,[b],Ys)")
    assert concrete_mismatches(prog, goal) == {}
    d = ConcreteDomain()
    graph = analyze(prog, d, entry_asubs=[(("prepend", 3), d.singleton(formals(3), goal.args))])
    (last,) = [a for (nid, ci, idx), a in graph.points.items() if idx == 2]
    (b,) = last.bindings()
    assert b[Var("Ys")] == P("[a,b]") and b[Var("Rest")] == P("[b]")


def test_concrete_empty_and_dead():
    d = get_domain("concrete")
    assert d.is_bottom(d.bottom((X,)))
    assert d.is_bottom(d.unify(d.singleton((X,), (Atom("a"),)), X, Atom("b")))


# -- soundness of abstract unification ---------------------------------------------------

CLAUSE_VARS = (X, Y, Z)
RUNTIME = (Var("A"), Var("B"))
CASES = 10_000


def random_term(rng, leaves, depth=2):
    if depth <= 0 or rng.random() < 0.45:
        return rng.choice(leaves)
    if rng.random() < 0.5:
        return Struct("f", (random_term(rng, leaves, depth - 1),))
    return Struct("g", (random_term(rng, leaves, depth - 1), random_term(rng, leaves, depth - 1)))


def random_binding(rng):
    leaves = [Atom("a"), Atom("b"), *RUNTIME, *RUNTIME]
    return {v: random_term(rng, leaves) for v in CLAUSE_VARS}


def oracle_member(d, theta, a):
    """Membership in the concretization, computed from the definitions in ``oracles``."""
    if d.is_bottom(a):
        return False
    if d.name == "modes":
        from checkify.domains.modes import _pair
        for v in a.vars:
            if oracles.term_class(theta[v]) not in oracles.MODES[MODE_NAMES[a.value(v)]]:
                return False
        shared = {_pair(x, y) for x, y in combinations(a.vars, 2)
                  if set(oracles.sharing_of({x: theta[x], y: theta[y]}, (x, y))) & {_pair(x, y)}}
        return shared <= a.pairs
    if d.name == "depthk":
        return all(oracles.matches(theta[v], p) for v, p in zip(a.vars, a.pats))
    return oracles.sharing_member(theta, a.vars, a.sh, a.free,
                                  a.lin if d.name == "shfr" else None)


@pytest.mark.parametrize("name", ["modes", "sharing", "shfr", "share_clique", "depthk"])
def test_unify_sound_monotone_and_translatable(name):
    d = get_domain(name)
    rng = random.Random(name)
    clause_leaves = [Atom("a"), Atom("b"), *CLAUSE_VARS, *CLAUSE_VARS]
    done = tries = 0
    while done < CASES:
        tries += 1
        assert tries < 20 * CASES
        theta = random_binding(rng)
        a = d.alpha(theta, CLAUSE_VARS)
        for _ in range(rng.randrange(3)):
            a = d.lub(a, d.alpha(random_binding(rng), CLAUSE_VARS))
        assert d.gamma_member(theta, a) and oracle_member(d, theta, a)
        t1 = rng.choice(CLAUSE_VARS) if rng.random() < 0.7 else random_term(rng, clause_leaves)
        t2 = random_term(rng, clause_leaves)
        after = oracles.concrete_unify(theta, t1, t2)
        r = d.unify(a, t1, t2)
        bigger = d.lub(a, d.alpha(random_binding(rng), CLAUSE_VARS))
        assert d.leq(r, d.unify(bigger, t1, t2))
        if after is None:
            continue
        done += 1
        assert oracle_member(d, after, r), (a, t1, t2, after, r)
        assert d.gamma_member(after, r)
        assert eval_check(d.to_properties(r), after) is None


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(["modes", "sharing", "shfr", "share_clique", "depthk"]), st.data())
def test_gamma_member_agrees_with_oracle(name, data):
    d = get_domain(name)
    rng = random.Random(data.draw(st.integers(0, 2 ** 32)))
    a = d.alpha(random_binding(rng), CLAUSE_VARS)
    if data.draw(st.booleans()):
        a = d.lub(a, d.alpha(random_binding(rng), CLAUSE_VARS))
    theta = random_binding(rng)
    assert d.gamma_member(theta, a) == oracle_member(d, theta, a)
