import pytest

from checkify import faults
from checkify.checkification import CheckifyConfig, prepare
from checkify.engine import (Budget, CheckError, EvaluationError, PointSnapshot, PredEvent,
                             ProgramError, ResourceLimit, Solutions, UndefinedPredicate,
                             run_instrumented, solve, trace)
from checkify.reader import parse_program, parse_term
from checkify.scenarios import load
from checkify.terms import Atom, Num, Struct, Var, is_variant, list_items

APPEND = parse_program("append([],L,L).\nappend([H|T],L,[H|R]) :- append(T,L,R).")
PREPEND = load("prepend.mlp")


def answers(outcome, var):
    assert isinstance(outcome, Solutions)
    return [b[Var(var)] for b in outcome.bindings]


def test_append_forward():
    assert answers(solve(APPEND, parse_term("append([1],[2],Z)")), "Z") == [parse_term("[1,2]")]


def test_append_enumerates_splits_in_clause_order():
    out = solve(APPEND, parse_term("append(X,Y,[1,2])"))
    assert [b[Var("X")] for b in out.bindings] == [parse_term(s) for s in ("[]", "[1]", "[1,2]")]


def test_prepend_runs():
    assert answers(solve(PREPEND, parse_term("prepend(a,[b],Y)")), "Y") == [parse_term("[a,b]")]


def test_zero_budget():
    assert isinstance(solve(APPEND, parse_term("append(X,Y,Z)"), Budget(0, 0)), ResourceLimit)


def test_infinite_goal_hits_budget():
    out = solve(APPEND, parse_term("append(X,[],Z)"), Budget(5000, 1000))
    assert isinstance(out, ResourceLimit)


def test_undefined_predicate():
    with pytest.raises(UndefinedPredicate):
        solve(APPEND, parse_term("nope(1)"))


def test_is_with_non_numeric_operand():
    with pytest.raises(EvaluationError):
        solve(parse_program("p(X) :- Y is X + 1."), parse_term("p(a)"))


def test_is_with_unbound_operand():
    with pytest.raises(ProgramError):
        solve(parse_program("p(X) :- Y is X + 1."), parse_term("p(_)"))


def test_arithmetic_and_comparison():
    p = parse_program("p(X,Y) :- Y is X*X - 1, Y > 2.")
    assert answers(solve(p, parse_term("p(3,Y)")), "Y") == [parse_term("8")]
    assert solve(p, parse_term("p(1,Y)")).bindings == []


def test_cut_prunes_later_clauses():
    p = parse_program("m(X,Y,X) :- X >= Y, !.\nm(_,Y,Y).")
    assert answers(solve(p, parse_term("m(3,1,Z)")), "Z") == [parse_term("3")]
    assert answers(solve(p, parse_term("m(1,3,Z)")), "Z") == [parse_term("3")]


def test_cut_is_local_to_clause():
    p = parse_program("t(X) :- c(X).\nt(z).\nc(X) :- member(X,[a,b]), !.\n"
                      "member(X,[X|_]).\nmember(X,[_|T]) :- member(X,T).")
    assert answers(solve(p, parse_term("t(X)")), "X") == [Atom("a"), Atom("z")]


def test_occurs_check():
    assert solve(parse_program("p(X) :- X = f(X)."), parse_term("p(_)")).bindings == []


def test_length_builtin():
    p = parse_program("n(L,N) :- length(L,N).")
    assert answers(solve(p, parse_term("n([a,b],N)")), "N") == [parse_term("2")]
    out = solve(p, parse_term("n(L,2)"))
    (lst,) = answers(out, "L")
    items, tail = list_items(lst)
    assert len(items) == 2 and tail == Atom("[]")


# -- instrumented runs -----------------------------------------------------------------

@pytest.fixture(scope="module")
def faulty_checks():
    with faults.injected("modes_aliasing_blind"):
        return prepare(PREPEND, CheckifyConfig()).instrumented.program


def test_faulty_checks_ground_input_fails_third_point(faulty_checks):
    out = run_instrumented(faulty_checks, parse_term("prepend(g,[g1,g2],Y)"))
    assert isinstance(out, CheckError)
    assert out.failing == parse_term("nonground(Ys)")
    assert out.location.line == 12
    assert out.assertion.tag[1:] == (0, 2)


def test_faulty_checks_free_elements_pass(faulty_checks):
    out = run_instrumented(faulty_checks, parse_term("prepend(A,[B],Y)"))
    assert isinstance(out, Solutions)
    assert is_variant(out.bindings[0][Var("Y")], parse_term("[A,B]"))


def test_check_free_program_matches_solve():
    for goal in ("append(X,Y,[1,2,3])", "append([a],[b],Z)", "append(X,[c],[a])"):
        g = parse_term(goal)
        a, b = solve(APPEND, g), run_instrumented(APPEND, g)
        assert len(a.bindings) == len(b.bindings)
        assert all(is_variant(Struct("s", tuple(x.values())), Struct("s", tuple(y.values())))
                   for x, y in zip(a.bindings, b.bindings))


def test_user_check_literal_reports_witness():
    p = parse_program("p(X) :- X = f(A), check(ground(X)).")
    out = run_instrumented(p, parse_term("p(Y)"))
    assert isinstance(out, CheckError)
    assert out.failing == parse_term("ground(X)")
    assert "X" in out.witness


# -- tracing ---------------------------------------------------------------------------

def snapshots(tr):
    return [e for e in tr.events if isinstance(e, PointSnapshot)]


def test_prepend_trace_has_three_points():
    tr = trace(PREPEND, parse_term("prepend(a,[b],Y)"))
    snaps = snapshots(tr)
    assert [s.point for s in snaps] == [0, 1, 2]
    ys = snaps[1].binding[Var("Ys")]
    rest = snaps[1].binding[Var("Rest")]
    assert isinstance(rest, Var)
    assert ys == Struct(".", (Atom("a"), rest))


def test_failing_goal_traces_only_entry():
    tr = trace(parse_program("p(X) :- X = a, q.\nq."), parse_term("p(b)"))
    assert [s.point for s in snapshots(tr)] == [0]


def test_trace_records_pred_events():
    tr = trace(PREPEND, parse_term("prepend(a,[b],Y)"))
    kinds = [e.kind for e in tr.events if isinstance(e, PredEvent)]
    assert kinds == ["calls", "success"]


def test_budget_limited_trace_is_prefix():
    p = load("bench/nreverse.mlp")
    g = parse_term("nrev([1,2,3,4,5],R)")
    full = trace(p, g).events
    for steps in (3, 10, 25):
        part = trace(p, g, Budget(steps, 1000)).events
        assert len(part) < len(full)
        assert is_variant(_as_term(part), _as_term(full[:len(part)]))


def _as_term(events):
    out = []
    for e in events:
        if isinstance(e, PointSnapshot):
            out.append(Struct("pt", (Atom(e.clause_id[0][0]), Num(e.clause_id[1]), Num(e.point))
                              + tuple(e.binding.values())))
        else:
            out.append(Struct(e.kind, e.args))
    return Struct("events", tuple(out))
