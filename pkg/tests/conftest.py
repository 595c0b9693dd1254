"""Shared fixtures: random program/EDB generators and independent
brute-force oracles used to cross-check the library."""

from __future__ import annotations

import itertools
import random

import pytest

from dlbound import Const, EDBInstance, Program, Rule, Var, parse_program


TC_SRC = "tc(X,Y) :- e(X,Y).\ntc(X,Y) :- tc(X,Z), e(Z,Y).\n"
TRIANGLE_SRC = (
    "q(X,Y) :- e(X,Y,Z).\n"
    "p(X,Y,Z) :- q(X,Y), q(X,Z), q(Y,Z).\n"
)
REACH_SRC = "r(Y) :- e(X,Y).\nr(Y) :- r(X), e(X,Y).\n"
BUYS_SRC = (
    "buys(X,Y) :- likes(X,Y).\n"
    "buys(X,Y) :- trendy(X), buys(Z,Y).\n"
)
UNBOUNDED_SRC = "r(X) :- b(X).\nr(Y) :- r(X), e(X,Y).\n"


@pytest.fixture
def tc_program() -> Program:
    return parse_program(TC_SRC)


@pytest.fixture
def triangle_program() -> Program:
    return parse_program(TRIANGLE_SRC)


# ---------------------------------------------------------------------------
# Random generators


def random_program(rng: random.Random) -> Program:
    """A small random safe program: <= 3 IDBs, arity <= 3, <= 4 rules,
    <= 3 body atoms per rule."""
    n_idb = rng.randint(1, 3)
    idb = [f"p{i}" for i in range(n_idb)]
    edb = [f"e{i}" for i in range(rng.randint(1, 2))]
    arity = {s: rng.randint(1, 3) for s in idb + edb}

    rules = []
    n_rules = rng.randint(1, 4)
    heads = set()
    for _ in range(n_rules):
        head_pred = rng.choice(idb)
        heads.add(head_pred)
        n_body = rng.randint(1, 3)
        body_preds = [rng.choice(idb + edb) for _ in range(n_body)]
        # at least one EDB atom keeps most programs productive
        if all(b in idb for b in body_preds):
            body_preds[rng.randrange(n_body)] = rng.choice(edb)
        var_pool = [f"V{i}" for i in range(4)]
        body = []
        body_vars = []
        for pred in body_preds:
            terms = []
            for _ in range(arity[pred]):
                if rng.random() < 0.15:
                    terms.append(Const(rng.randint(0, 2)))
                else:
                    v = rng.choice(var_pool)
                    terms.append(Var(v))
                    body_vars.append(v)
            body.append((pred, tuple(terms)))
        if not body_vars:
            continue
        head_terms = tuple(
            Var(rng.choice(body_vars)) if rng.random() < 0.9
            else Const(rng.randint(0, 2))
            for _ in range(arity[head_pred]))
        rules.append((head_pred, head_terms, body))

    # intended IDBs that never head a rule are simply EDB relations
    lines = []
    for head_pred, head_terms, body in rules:
        def fmt(terms):
            return ",".join(
                t.name if isinstance(t, Var) else str(t.value) for t in terms)
        body_s = ", ".join(f"{pred}({fmt(terms)})" for pred, terms in body)
        lines.append(f"{head_pred}({fmt(head_terms)}) :- {body_s}.")
    text = "\n".join(lines)
    try:
        return parse_program(text)
    except Exception:
        return None


def random_programs(seed: int, count: int):
    """Yield `count` valid random programs."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        p = random_program(rng)
        if p is None:
            continue
        made += 1
        yield p


def random_edb(p: Program, rng: random.Random) -> EDBInstance:
    """A random instance over domain <= 4 with <= 6 facts per relation."""
    arities = p.arities()
    rels = []
    for name in sorted(p.edb):
        k = arities[name]
        n_facts = rng.randint(0, 6)
        facts = {tuple(rng.randint(0, 3) for _ in range(k))
                 for _ in range(n_facts)}
        rels.append((name, frozenset(facts)))
    return EDBInstance.of(rels)


# ---------------------------------------------------------------------------
# Oracles


def naive_oracle(p: Program, d: EDBInstance) -> dict:
    """Ground-and-saturate datalog evaluation, written independently of
    the library's evaluator."""
    rels = {name: set(d.get(name)) for name in sorted(p.edb)}
    for name in p.idb:
        rels.setdefault(name, set())
    domain = {v for rel in rels.values() for t in rel for v in t}
    for r in p.rules:
        for a in (r.head, *r.body):
            for t in a.terms:
                if isinstance(t, Const):
                    domain.add(t.value)
    domain = sorted(domain, key=repr)
    if not domain:
        return {name: frozenset(rels[name]) for name in p.idb}

    groundings = []
    for r in p.rules:
        rule_vars = sorted(r.all_vars())
        for combo in itertools.product(domain, repeat=len(rule_vars)):
            env = dict(zip(rule_vars, combo))

            def ground(a):
                return a.pred, tuple(
                    env[t.name] if isinstance(t, Var) else t.value
                    for t in a.terms)
            groundings.append((ground(r.head),
                               [ground(a) for a in r.body]))

    changed = True
    while changed:
        changed = False
        for (hp, ht), body in groundings:
            if ht in rels[hp]:
                continue
            if all(bt in rels.get(bp, set()) for bp, bt in body):
                rels[hp].add(ht)
                changed = True
    return {name: frozenset(rels[name]) for name in p.idb}


def brute_homomorphism(r1: Rule, r2: Rule) -> bool:
    """Exhaustive homomorphism search r1 -> r2 with positional heads."""
    targets = [t for a in r2.body for t in a.terms] + list(r2.head.terms)
    vars1 = sorted(r1.all_vars())
    for combo in itertools.product(targets, repeat=len(vars1)):
        env = dict(zip(vars1, combo))

        def image(a):
            return a.pred, tuple(
                env[t.name] if isinstance(t, Var) else t for t in a.terms)
        if image(r1.head) != (r2.head.pred, r2.head.terms):
            continue
        atoms2 = {(a.pred, a.terms) for a in r2.body}
        if all(image(a) in atoms2 for a in r1.body):
            return True
    return False


def brute_stirling(n: int, k: int) -> int:
    """Count partitions of {0..n-1} into k nonempty blocks by building
    every partition: each element joins an existing block or opens one."""
    def count(i: int, blocks: int) -> int:
        if i == n:
            return 1 if blocks == k else 0
        return blocks * count(i + 1, blocks) + count(i + 1, blocks + 1)
    return count(0, 0)


def brute_permutations(n: int, k: int) -> int:
    return sum(1 for _ in itertools.permutations(range(n), k))


def brute_min_cover(vertices, edges) -> int | None:
    """Smallest number of edges covering all vertices, or None."""
    need = set(vertices)
    for k in range(0, len(edges) + 1):
        for combo in itertools.combinations(edges, k):
            if need <= set().union(*combo) if combo else not need:
                return k
    return None
