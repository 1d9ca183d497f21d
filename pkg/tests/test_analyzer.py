from itertools import islice
from pathlib import Path

import pytest

from checkify import faults
from checkify.analyzer import analyze, annotate, formals, version_names
from checkify.checkification import (CheckifyConfig, containment_check, flip_status, goal_specs,
                                     input_stream)
from checkify.domains import get_domain
from checkify.program import programs_equivalent
from checkify.reader import parse_program, parse_term
from checkify.scenarios import corpus_names, load
from checkify.terms import Struct, Var, is_variant, substitute
from checkify.writer import format_term, print_program

EXPECTED = Path(__file__).parent / "expected"
DOMAINS = ("modes", "sharing", "shfr", "share_clique", "depthk")
PREPEND = load("prepend.mlp")


def text(path):
    return (EXPECTED / path).read_text()


def test_faulty_modes_reproduce_expected_annotation():
    with faults.injected("modes_aliasing_blind"):
        out = print_program(annotate(analyze(PREPEND, "modes")))
    assert out == text("prepend_faulty_annotation.mlp")


def test_flipped_annotation_text():
    with faults.injected("modes_aliasing_blind"):
        out = print_program(flip_status(annotate(analyze(PREPEND, "modes"))))
    assert out == text("prepend_faulty_checks.mlp")


def test_correct_modes_only_know_ys_is_nonvar():
    g = analyze(PREPEND, "modes")
    (node,) = g.versions(("prepend", 3))
    props = [format_term(p) for p in g.domain.to_properties(node.success)]
    ys = props[2]
    assert ys.startswith("nonvar(")
    assert not any(p.startswith(("ground(", "nonground(")) and p.endswith(ys[6:]) for p in props)
    assert print_program(annotate(g)) != text("prepend_faulty_annotation.mlp")


def test_unreachable_predicate_is_absent():
    p = parse_program(":- entry main(+ground).\nmain(X) :- q(X).\nq(_).\ndead(X) :- q(X).")
    g = analyze(p, "modes")
    keys = {n.key for n in g.nodes}
    assert ("dead", 1) not in keys and ("q", 1) in keys


def test_no_entry_analyzes_exported_predicates_from_top():
    p = parse_program("p(X) :- q(X).\nq(a).")
    g = analyze(p, "modes")
    assert {n.key for n in g.nodes} == {("p", 1), ("q", 1)}


@pytest.mark.parametrize("domain", DOMAINS)
def test_single_version_same_in_both_modes(domain):
    g = analyze(PREPEND, domain)
    assert print_program(annotate(g, True)) == print_program(annotate(g, False))


def test_two_callers_materialized_versions():
    g = analyze(load("two_callers.mlp"), "modes")
    assert len(g.versions(("p", 1))) == 2
    names = version_names(g)
    assert sorted(names[n.id] for n in g.versions(("p", 1))) == ["p", "p_v2"]
    out = print_program(annotate(g, True))
    assert "p_v2(" in out
    reparsed = parse_program(out)
    heads = {a.head.name for a in reparsed.pred_assertions()}
    assert {"p", "p_v2"} <= heads


def test_two_callers_collapsed_is_lub():
    g = analyze(load("two_callers.mlp"), "modes")
    collapsed = annotate(g, False)
    (pa,) = [a for a in collapsed.pred_assertions() if a.head.name == "p"]
    assert [format_term(c) for c in pa.calls] == ["any(X)"]
    materialized = annotate(g, True)
    calls = sorted(format_term(a.calls[0]) for a in materialized.pred_assertions()
                   if a.head.name.startswith("p"))
    assert calls == ["ground(X)", "var(X)"]


@pytest.mark.parametrize("domain", DOMAINS)
@pytest.mark.parametrize("name", corpus_names())
def test_collapsed_equals_lub_of_versions(domain, name):
    g = analyze(load(name), domain)
    d = g.domain
    collapsed = annotate(g, False)
    for a in collapsed.pred_assertions():
        args = getattr(a.head, "args", ())
        key, fmap = (a.head.name, len(args)), dict(zip(formals(len(args)), args))

        def same(got, asub):
            want = [substitute(p, fmap) for p in d.to_properties(asub)]
            return is_variant(Struct("c", (*args, *got)), Struct("c", (*args, *want)))
        assert same(a.calls, g.call_of(key)) and same(a.success, g.success_of(key))


@pytest.mark.parametrize("domain", DOMAINS)
@pytest.mark.parametrize("name", corpus_names())
def test_annotated_output_reparses(domain, name):
    g = analyze(load(name), domain)
    for materialize in (True, False):
        out = annotate(g, materialize)
        assert programs_equivalent(parse_program(print_program(out)), out)


@pytest.mark.parametrize("domain", DOMAINS)
def test_graph_is_closed(domain):
    for name in corpus_names():
        g = analyze(load(name), domain)
        ids = {n.id for n in g.nodes}
        for callees in g.edges.values():
            assert set(callees) <= ids
        for (nid, _, _) in g.points:
            assert nid in ids


@pytest.mark.parametrize("domain", DOMAINS)
def test_analysis_is_deterministic(domain):
    for name in corpus_names():
        # separately parsed copies differ only in variable identity
        assert print_program(annotate(analyze(load(name), domain))) == \
            print_program(annotate(analyze(load(name), domain)))
        program = load(name)
        a, b = analyze(program, domain), analyze(program, domain)
        assert a.points == b.points


@pytest.mark.parametrize("domain", DOMAINS)
def test_larger_entry_gives_larger_results(domain):
    d = get_domain(domain)
    vs = formals(3)
    small = d.alpha(dict(zip(vs, (parse_term("a"), parse_term("[b]"), Var("Y")))), vs)
    mid = d.lub(small, d.alpha(dict(zip(vs, (Var("A"), parse_term("[c]"), Var("Y")))), vs))
    key = ("prepend", 3)
    runs = [analyze(PREPEND, d, entry_asubs=[(key, a)]) for a in (small, mid, d.top(vs))]
    for lo, hi in zip(runs, runs[1:]):
        for (_, ci, idx), a in lo.points.items():
            assert any(d.leq(a, b) for (_, cj, j), b in hi.points.items() if (cj, j) == (ci, idx))


@pytest.mark.parametrize("domain", DOMAINS)
@pytest.mark.parametrize("name", corpus_names() + ["prepend.mlp", "two_callers.mlp"])
def test_trace_states_are_covered(domain, name):
    """Every snapshot of a run from a generated input lies in the analysis state there."""
    program = load(name)
    cfg = CheckifyConfig(domain=domain, seed=3)
    g = analyze(program, domain)
    goals = [goal for _, goal in islice(input_stream(goal_specs(program, cfg.universe), cfg), 25)]
    assert containment_check(program, g, goals, cfg.budget) == []
