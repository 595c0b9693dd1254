"""Program classification, Horn grounding, and complexity reports."""

import random

import pytest

from dlbound import (
    ADORNMENT_GROUNDABLE, GOut, LINEAR, MembershipFn, SIMPLE_CHAIN,
    ValidationError, adorn_program, classify_program, complexity_report,
    evaluate, horn_ground_evaluate, integral_fchw, parse_edb, parse_program,
    union_adorned,
)
from dlbound.width import Hypergraph

from conftest import TC_SRC, random_edb, random_programs


def test_tc_all_three_classes():
    p = parse_program(TC_SRC)
    assert classify_program(p) == {LINEAR, SIMPLE_CHAIN, ADORNMENT_GROUNDABLE}


def test_not_linear():
    p = parse_program("q(X) :- e(X,Y).\nr(X) :- q(X), q(X), e(X,X).")
    assert LINEAR not in classify_program(p)


def test_not_simple_chain():
    p = parse_program("q(X) :- e(X,A), e(A,B), e(B,X).")
    assert SIMPLE_CHAIN not in classify_program(p)


def test_not_groundable():
    # Y is shared between the two body atoms and is no head variable, so
    # neither EDB atom owns a private head variable
    p = parse_program("q(X) :- e(X,Y), f(Y,X).")
    assert ADORNMENT_GROUNDABLE not in classify_program(p)


def test_groundable_private_head_var():
    # Z is shared but X and Y are each private to one EDB atom
    p = parse_program("q(X,Y) :- e(X,Z), f(Y,Z).")
    assert ADORNMENT_GROUNDABLE in classify_program(p)


def test_horn_equals_seminaive_tc():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    d = parse_edb("e(1,2). e(2,3). e(3,1). e(2,4).")
    got = horn_ground_evaluate(p, pi, d)
    assert union_adorned(got, "tc") == evaluate(p, d).get("tc")


def test_horn_rejects_non_groundable():
    p = parse_program("q(X) :- e(X,Y), f(Y,X).")
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    with pytest.raises(ValidationError):
        horn_ground_evaluate(p, pi, parse_edb("e(1,2). f(2,1)."))


def test_horn_equals_seminaive_corpus():
    rng = random.Random(83)
    checked = 0
    for p in random_programs(89, 120):
        if ADORNMENT_GROUNDABLE not in classify_program(p):
            continue
        try:
            pi = adorn_program(p, GOut(), MembershipFn("heq"))
        except Exception:
            continue
        d = random_edb(p, rng)
        got = horn_ground_evaluate(p, pi, d)
        want = evaluate(pi, d)
        for q in sorted(p.idb):
            if pi.adornment_map().get(q):
                assert union_adorned(got, q) == union_adorned(want, q)
        checked += 1
    assert checked >= 10


def test_complexity_report_tc():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    rep = complexity_report(p, pi)
    assert rep.f == 2
    assert rep.ew == 2
    assert rep.fchw == 2
    by_class = {b.applies_to: b for b in rep.bounds}
    assert by_class[ADORNMENT_GROUNDABLE].exponent == 2
    assert "N^2" in by_class[ADORNMENT_GROUNDABLE].formula
    assert by_class[SIMPLE_CHAIN].exponent == 2 * rep.ew
    d = rep.to_json_dict()
    assert d["f"] == 2 and d["fchw"] == 2


def test_complexity_report_simple_chain_not_groundable():
    p = parse_program("q(X) :- e(X,Y), f(Y,X).")
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    rep = complexity_report(p, pi)
    assert SIMPLE_CHAIN in rep.classes
    assert ADORNMENT_GROUNDABLE not in rep.classes
    by_class = {b.applies_to: b for b in rep.bounds}
    assert by_class[SIMPLE_CHAIN].exponent == 2 * rep.ew


def test_integral_fchw_path():
    h = Hypergraph(vertices=("x", "y", "z"),
                   edges=(("a", frozenset({"x", "z"})),
                          ("b", frozenset({"z", "y"}))),
                   v_out=("x", "y"))
    assert integral_fchw(h) == 2


def test_integral_fchw_single_edge():
    h = Hypergraph(vertices=("x", "y"),
                   edges=(("a", frozenset({"x", "y"})),),
                   v_out=("x", "y"))
    assert integral_fchw(h) == 1
