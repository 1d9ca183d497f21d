import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from checkify.modedefs import expand_modes
from checkify.program import ParseError, UnknownMode, UnknownStatus, programs_equivalent
from checkify.randprog import random_program
from checkify.reader import parse_program, parse_term
from checkify.scenarios import corpus_names, corpus_text, load
from checkify.terms import Atom, Num, Struct, Var, is_variant
from checkify.writer import format_term, print_program

from .strategies import terms

PREPEND = corpus_text("prepend.mlp")


def test_prepend_parses_to_one_entry_one_clause():
    p = parse_program(PREPEND)
    assert len(p.entries()) == 1
    assert list(p.predicates()) == [("prepend", 3)]
    assert len(p.clauses) == 1


def test_empty_source():
    p = parse_program("")
    assert p.clauses == () and p.assertions == ()
    assert print_program(p) == ""


def test_mismatched_bracket_is_located():
    with pytest.raises(ParseError) as e:
        parse_program("p(X) :- q(X]. ")
    assert (e.value.line, e.value.col) == (1, 12)
    assert ")" in e.value.expected


def test_unknown_status():
    with pytest.raises(UnknownStatus):
        parse_program(":- bogus pred p(X).")


def test_fact_prints_alone():
    assert print_program(parse_program("a.")) == "a.\n"


def test_expand_append_modes():
    got = expand_modes(parse_program(":- pred append(+list,+list,-list)."))
    want = parse_program(":- pred append(X,Y,Z) : (list(X),list(Y),var(Z)) => list(Z).")
    assert programs_equivalent(got, want)


def test_expand_prepend_entry():
    (e,) = expand_modes(parse_program(PREPEND)).entries()
    a1, a2, a3 = e.head.args
    assert e.calls == (Struct("list", (a2,)), Struct("var", (a3,)))
    assert e.success == ()
    assert isinstance(a1, Var)


def test_no_modes_is_identity():
    p = parse_program(":- pred app(X,Y,Z) : list(X) => list(Z).\napp([],L,L).")
    assert programs_equivalent(expand_modes(p), p)


def test_unknown_mode():
    with pytest.raises(UnknownMode):
        expand_modes(parse_program(":- pred p(weird).\np(_)."))


def test_user_modedef():
    src = ":- modedef out(A) : var(A) => nonvar(A).\n:- pred p(out).\np(a)."
    (a,) = expand_modes(parse_program(src)).pred_assertions()
    x = a.head.args[0]
    assert a.calls == (Struct("var", (x,)),) and a.success == (Struct("nonvar", (x,)),)


def test_mode_expansion_idempotent():
    for name in corpus_names():
        p = expand_modes(load(name))
        assert programs_equivalent(expand_modes(p), p), name


def test_check_point_syntax_is_flat():
    text = print_program(parse_program("p(X,Xs,Ys) :- check(any(X), nonvar(Xs), var(Ys)), q."))
    assert "check(any(X), nonvar(Xs), var(Ys))" in text


def test_numbers_and_operators():
    t = parse_term("X is -3 + 2 * (Y - 1)")
    assert t.name == "is" and format_term(t) == "X is -3+2*(Y-1)"
    assert parse_term("-(1)") == Struct("-", (Num(1),))
    assert parse_term("-1") == Num(-1)
    assert parse_term("a - -1") == Struct("-", (Atom("a"), Num(-1)))
    assert parse_term("[a|T]") == Struct(".", (Atom("a"), Var("T")))


@settings(max_examples=300, deadline=None)
@given(terms())
def test_term_roundtrip(t):
    assert is_variant(parse_term(format_term(t)), t)


@pytest.mark.parametrize("seed", range(60))
def test_program_roundtrip_random(seed):
    p = random_program(seed)
    assert programs_equivalent(parse_program(print_program(p)), p)


@pytest.mark.parametrize("name", corpus_names() + corpus_names("faults"))
def test_program_roundtrip_corpus(name):
    p = load(name)
    assert programs_equivalent(parse_program(print_program(p)), p)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_roundtrip_is_stable(seed):
    p = random_program(seed)
    once = print_program(p)
    assert print_program(parse_program(once)) == once
