"""Combinatorics helpers and output-size bound formulas."""

import random
from fractions import Fraction

import pytest

from dlbound import (
    GOut, MembershipFn, SchemaStats, adorn_program, bound1, bound2,
    coeff_minimal, coeff_naive, parse_program, permutations, pow_ceil,
    size_report, stirling2,
)
from dlbound.sizebound import iroot

from conftest import TC_SRC, brute_permutations, brute_stirling


def test_stirling_goldens():
    assert stirling2(3, 1) == 1
    assert stirling2(3, 2) == 3
    assert stirling2(5, 3) == 25


def test_stirling_brute_force():
    for n in range(0, 9):
        for k in range(0, n + 2):
            assert stirling2(n, k) == brute_stirling(n, k), (n, k)


def test_stirling_negative_raises():
    with pytest.raises(ValueError):
        stirling2(-1, 0)
    with pytest.raises(ValueError):
        stirling2(2, -1)


def test_permutations_goldens():
    assert permutations(3, 2) == 6
    assert permutations(2, 1) == 2
    assert permutations(4, 5) == 0


def test_permutations_brute_force():
    for n in range(0, 9):
        for k in range(0, n + 1):
            assert permutations(n, k) == brute_permutations(n, k)


def test_pow_ceil_exact_and_fractional():
    assert pow_ceil(4, Fraction(3, 2)) == 8
    assert pow_ceil(2, Fraction(3, 2)) == 3  # ceil(2.828...)
    assert pow_ceil(9, Fraction(1, 2)) == 3
    assert pow_ceil(5, Fraction(2)) == 25


def test_iroot():
    assert iroot(27, 3) == 3
    assert iroot(26, 3) == 2
    assert iroot(1, 5) == 1


CHAIN_STATS = SchemaStats(num_edbs=1, ear=2, arq=3, rule_count=1, term_count=1)


def test_bound1_goldens():
    assert bound1(CHAIN_STATS, 2, 2) == 64
    assert bound1(CHAIN_STATS, 2, 3) == 168


def test_bound2_goldens():
    assert bound2(CHAIN_STATS, 2, 2) == 864
    assert bound2(CHAIN_STATS, 2, 3) == 1944


def test_bound1_requires_integral_width():
    with pytest.raises((TypeError, ValueError)):
        bound1(CHAIN_STATS, Fraction(3, 2), 2)


def test_bound1_le_bound2_random_grid():
    rng = random.Random(99)
    for _ in range(1000):
        st = SchemaStats(num_edbs=rng.randint(1, 3), ear=rng.randint(1, 3),
                         arq=rng.randint(1, 4), rule_count=rng.randint(1, 4),
                         term_count=rng.randint(1, 12))
        ew = rng.randint(1, st.arq)
        n = rng.randint(1, 5)
        assert bound1(st, ew, n) <= bound2(st, ew, n), (st, ew, n)


def test_coeff_goldens():
    # one binary EDB, one rule with two terms, binary IDB
    st = SchemaStats(num_edbs=1, ear=2, arq=2, rule_count=1, term_count=2)
    assert coeff_minimal(st, 2) == stirling2(2, 1) * 1 * 4 + \
        stirling2(2, 2) * 1 * 4
    # triangle schema: arq=3, ear=3, one EDB
    st2 = SchemaStats(num_edbs=1, ear=3, arq=3, rule_count=1, term_count=1)
    assert coeff_minimal(st2, 2) == 108


def test_coeff_minimal_le_naive_cap():
    st = SchemaStats(num_edbs=2, ear=3, arq=3, rule_count=2, term_count=5)
    assert coeff_minimal(st, 3) <= (st.num_edbs * st.ear * st.arq) ** st.arq


def test_size_report_tc():
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    rep = size_report(p, pi, 2)
    pb = rep.for_predicate("tc")
    assert pb.f_exact == 2
    assert pb.ew_integral == 2
    assert pb.ew_fractional == 2
    assert pb.bound1 == bound1(SchemaStats.of(p, "tc"), 2, 2)
    assert pb.fpt_bound == pb.f_exact * 2 ** 2
    d = rep.to_json_dict()
    assert d["n"] == 2
    assert d["predicates"][0]["predicate"] == "tc"


def test_size_report_respects_actual_counts():
    # evaluator result can never exceed bound1 or bound2
    from dlbound import evaluate, parse_edb, union_adorned
    p = parse_program(TC_SRC)
    pi = adorn_program(p, GOut(), MembershipFn("heq"))
    d = parse_edb("e(1,2). e(2,3).")
    rep = size_report(p, pi, 2)
    pb = rep.for_predicate("tc")
    got = len(union_adorned(evaluate(pi, d), "tc"))
    assert got <= pb.bound1 <= pb.bound2
