"""Evaluation: semi-naive/naive fixpoints, adorned-union semantics,
rule boundedness, value covers, and the tightness-instance generator."""

import random

import pytest

from dlbound import (
    Adornment, AdornedProgram, EDBInstance, GOut, MembershipFn, ValidationError,
    adorn_program, check_rule_bounded, eval_cq, evaluate,
    generate_tightness_instance, parse_edb, parse_program, tightness_bound,
    union_adorned, value_cover_ok,
)
from dlbound.adorn import AdornedAtom, AdornedPredicate, AdornedRule

from conftest import TC_SRC, naive_oracle, random_edb, random_programs


def test_parse_edb():
    d = parse_edb("e(1,2). e(2,3).  % facts\nf(7).")
    assert d.get("e") == frozenset({(1, 2), (2, 3)})
    assert d.get("f") == frozenset({(7,)})
    assert d.n == 2


def test_parse_edb_rejects_rules():
    with pytest.raises(Exception):
        parse_edb("e(X,Y) :- f(X,Y).")


def test_edb_mixed_arity_rejected():
    with pytest.raises(ValidationError):
        EDBInstance.of([("e", frozenset({(1,), (1, 2)}))])


def test_tc_closure():
    p = parse_program(TC_SRC)
    d = parse_edb("e(1,2). e(2,3).")
    assert evaluate(p, d).get("tc") == {(1, 2), (2, 3), (1, 3)}


def test_empty_edb_gives_empty_idb():
    p = parse_program(TC_SRC)
    d = EDBInstance.of([("e", frozenset())])
    assert evaluate(p, d).get("tc") == frozenset()


def test_naive_equals_seminaive():
    rng = random.Random(5)
    for p in random_programs(61, 25):
        d = random_edb(p, rng)
        a = evaluate(p, d, method="seminaive")
        b = evaluate(p, d, method="naive")
        for q in p.idb:
            assert a.get(q) == b.get(q)


def test_matches_independent_oracle():
    rng = random.Random(17)
    for p in random_programs(67, 30):
        d = random_edb(p, rng)
        got = evaluate(p, d)
        want = naive_oracle(p, d)
        for q in p.idb:
            assert got.get(q) == want[q], (p, q)


def test_adorned_union_equals_plain():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    d = parse_edb("e(1,2). e(2,3). e(3,4). e(4,1).")
    assert union_adorned(evaluate(pi, d), "tc") == evaluate(p, d).get("tc")


def test_union_adorned_unknown_predicate():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    with pytest.raises(Exception):
        union_adorned(evaluate(pi, parse_edb("e(1,2).")), "nope")


def test_eval_cq():
    r = parse_program("q(X,Y) :- e(X,Z), e(Z,Y).").rules[0]
    d = parse_edb("e(1,2). e(2,3).")
    assert eval_cq(r, d) == {(1, 3)}


def test_check_rule_bounded_clean():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    d = parse_edb("e(1,2). e(2,3). e(3,1).")
    assert check_rule_bounded(pi, d).ok


def test_check_rule_bounded_detects_corruption():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    # replace the recursive rule's head adornment by the single-edge one,
    # which cannot account for length-2 paths
    bad = Adornment.of(parse_program("tc(X,Y) :- e(X,Y).").rules[0])
    rules = []
    for r in pi.rules:
        if any(isinstance(a, AdornedAtom) for a in r.body):
            head = AdornedAtom(AdornedPredicate("tc", bad), r.head.terms)
            rules.append(AdornedRule(head, r.body))
        else:
            rules.append(r)
    pi_bad = AdornedProgram(rules=tuple(rules), source=pi.source)
    report = check_rule_bounded(pi_bad, parse_edb("e(1,2). e(2,3)."))
    assert not report.ok
    assert any(v.tuple_value == (1, 3) for v in report.violations)


def test_value_cover():
    d = parse_edb("e(1,2). e(2,3).")
    assert value_cover_ok((1, 2), d, 1)
    assert value_cover_ok((1, 3), d, 2)
    assert not value_cover_ok((1, 3), d, 1)
    assert not value_cover_ok((9, 9), d, 2)


def test_tightness_generator_goldens():
    for n, want in ((2, 64), (3, 168)):
        prog, d = generate_tightness_instance(2, 3, 2, 1, n)
        assert len(evaluate(prog, d).get("q")) == want
        assert tightness_bound(2, 3, 2, 1, n) == want


def test_tightness_generator_rule_cap():
    with pytest.raises(ValueError):
        generate_tightness_instance(3, 3, 3, 2, 3, rule_cap=10)


def test_tightness_instance_values_disjoint():
    _, d = generate_tightness_instance(1, 1, 2, 2, 2)
    seen = set()
    for name in ("e1", "e2"):
        for t in d.get(name):
            for v in t:
                assert v not in seen
                seen.add(v)
