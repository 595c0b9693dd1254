"""Boundedness semi-decision: inlining with subsumption pruning, budgeted
fallback, non-recursive (UCQ) extraction, and CQ containment."""

from __future__ import annotations

from dataclasses import dataclass

from .core import Program, Rule, ValidationError
from .unify import subsumes
from .adorn import (
    AdornedAtom, AdornedProgram, BudgetExceeded, GK, Id, MembershipFn,
    adorn_program,
)


@dataclass(frozen=True)
class NonRecursive:
    """The rewriting reached a fixpoint with no recursive adorned
    predicate: the program is bounded and each IDB collapses to a UCQ."""
    program: AdornedProgram

    @property
    def kind(self) -> str:
        return "non-recursive"


@dataclass(frozen=True)
class Degraded:
    """A budgeted rewriting terminated, but some adorned predicate is
    recursive; the output is EDB-bounded yet not a UCQ."""
    program: AdornedProgram
    budget: int | None

    @property
    def kind(self) -> str:
        return "degraded"


@dataclass(frozen=True)
class Inconclusive:
    """A rule or sweep limit was hit before reaching a fixpoint."""
    partial: AdornedProgram
    limit: str

    @property
    def kind(self) -> str:
        return "inconclusive"


def cq_contained(c1: Rule, c2: Rule) -> bool:
    """Is the conjunctive query c1 contained in c2?

    Wildcards are already fresh variables internally, so containment is
    exactly subsumption of c1 by c2.
    """
    return subsumes(c2, c1)


def _has_recursion(pi: AdornedProgram) -> bool:
    edges: dict = {}
    for r in pi.rules:
        src = r.head.apred.key
        for a in r.body:
            if isinstance(a, AdornedAtom):
                edges.setdefault(src, set()).add(a.apred.key)
    # cycle detection over the adorned dependency graph
    seen: set = set()
    onpath: set = set()

    def dfs(node) -> bool:
        if node in onpath:
            return True
        if node in seen:
            return False
        seen.add(node)
        onpath.add(node)
        for nxt in edges.get(node, ()):
            if dfs(nxt):
                return True
        onpath.discard(node)
        return False

    return any(dfs(n) for n in list(edges))


def check_boundedness(p: Program, budget: int | None = None,
                      max_rules: int = 500, max_sweeps: int = 200):
    """Semi-decide boundedness of p.

    Without a budget the full-body (identity) relaxation is used and the
    search may hit its limits; with budget k the width-k relaxation
    guarantees termination.
    """
    g = Id() if budget is None else GK(budget)
    try:
        pi = adorn_program(p, g, MembershipFn("hcont"),
                           max_iterations=max_sweeps, max_rules=max_rules)
    except BudgetExceeded as exc:
        return Inconclusive(partial=exc.partial, limit=exc.limit)
    if _has_recursion(pi):
        return Degraded(program=pi, budget=budget)
    return NonRecursive(program=pi)


def extract_ucq(outcome, q: str) -> list:
    """The UCQ (list of EDB-only rules) equivalent to q, for NonRecursive
    outcomes."""
    if not isinstance(outcome, NonRecursive):
        raise ValidationError(
            "UCQ extraction requires a non-recursive outcome")
    if q not in outcome.program.source.idb:
        raise ValidationError(f"unknown IDB predicate {q}")
    seen = []
    for r in outcome.program.rules:
        if r.head.pred != q:
            continue
        adn = r.head.apred.adornment
        if adn not in seen:
            seen.append(adn)
    return [a.rule for a in sorted(seen, key=lambda a: a.key)]
