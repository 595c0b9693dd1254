"""Program classification (linear, simple chain, adornment groundable),
Horn-clause grounding evaluation, and evaluation-complexity reports."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations as iter_permutations

from .core import Const, Program, Rule, ValidationError, Var, classify_rule_atoms
from .adorn import AdornedAtom, AdornedProgram
from .evaluate import EDBInstance, IDBResult, _ground_head, _match
from .width import hypergraph_of, width_of_program


LINEAR = "Linear"
SIMPLE_CHAIN = "SimpleChain"
ADORNMENT_GROUNDABLE = "AdornmentGroundable"


def classify_program(p: Program) -> set:
    """Syntactic classes the program falls into."""
    classes = set()
    if all(len(r.body) <= 2 for r in p.rules):
        classes.add(SIMPLE_CHAIN)
    if all(sum(1 for a in r.body if a.pred in p.idb) <= 1 for r in p.rules):
        classes.add(LINEAR)
    if all(_rule_groundable(r, p) for r in p.rules):
        classes.add(ADORNMENT_GROUNDABLE)
    return classes


def _rule_groundable(r: Rule, p: Program) -> bool:
    idb_atoms, edb_atoms = classify_rule_atoms(r, p)
    head_vars = set(r.head_vars())
    for a in edb_atoms:
        others = [b for b in r.body if b is not a]
        other_vars = {v for b in others for v in b.vars()}
        has_private_head_var = any(
            v in head_vars and v not in other_vars for v in a.vars())
        all_in_head = set(a.vars()) <= head_vars
        if not (has_private_head_var or all_in_head):
            return False
    edb_vars = {v for a in edb_atoms for v in a.vars()}
    for a in idb_atoms:
        if not set(a.vars()) <= head_vars | edb_vars:
            return False
    return True


# ---------------------------------------------------------------------------
# Horn grounding


def horn_ground_evaluate(p: Program, pi: AdornedProgram,
                         d: EDBInstance) -> IDBResult:
    """Evaluate pi by grounding every rule into propositional Horn clauses
    and running linear-time unit propagation.

    Groundings of a rule come from matching its EDB body atoms against d;
    head variables the EDB atoms leave open are enumerated from the
    columns their head-adornment atoms range over.
    """
    if ADORNMENT_GROUNDABLE not in classify_program(p):
        raise ValidationError("program is not adornment groundable")
    d.check_schema(p)

    clauses = set()  # (head fact, frozenset of idb body facts)
    for rule in pi.rules:
        adn = rule.head.apred.adornment
        idb_atoms = [a for a in rule.body if isinstance(a, AdornedAtom)]
        edb_atoms = [a for a in rule.body if not isinstance(a, AdornedAtom)]
        body = [(a.terms, sorted(d.get(a.pred), key=repr))
                for a in edb_atoms]
        head_var_names = [t.name for t in rule.head.terms
                          if isinstance(t, Var)]
        idb_var_names = {v for a in idb_atoms for v in a.vars()}
        for beta in _match(body):
            open_vars = [v for v in dict.fromkeys(
                (*head_var_names, *sorted(idb_var_names)))
                if v not in beta]
            assert set(open_vars) <= set(head_var_names)
            choices = [_column_values(v, rule, adn, d) for v in open_vars]
            for pick in _product(choices):
                gamma = dict(beta)
                gamma.update(zip(open_vars, pick))
                head_fact = (rule.head.apred,
                             _ground_head(rule.head.terms, gamma))
                body_facts = frozenset(
                    (a.apred, _ground_head(a.terms, gamma))
                    for a in idb_atoms)
                clauses.add((head_fact, body_facts))

    facts = _unit_propagate(clauses)
    rels: dict = {}
    for rule in pi.rules:
        rels.setdefault(rule.head.apred, set())
        for a in rule.body:
            if isinstance(a, AdornedAtom):
                rels.setdefault(a.apred, set())
    for apred, tup in facts:
        rels[apred].add(tup)
    return IDBResult(tuple(sorted(
        ((k, frozenset(v)) for k, v in rels.items()),
        key=lambda item: item[0].key)))


def _product(choices):
    from itertools import product
    return product(*choices)


def _column_values(var_name: str, rule, adn, d: EDBInstance):
    """Candidate values for a head variable not fixed by the rule's EDB
    atoms: the matching columns of the first adornment atom holding it."""
    canon_name = None
    for canon_t, rule_t in zip(adn.rule.head.terms, rule.head.terms):
        if isinstance(rule_t, Var) and rule_t.name == var_name:
            canon_name = canon_t.name
            break
    assert canon_name is not None, "head variable missing from adornment"
    for atom in adn.rule.body:
        positions = [i for i, t in enumerate(atom.terms)
                     if isinstance(t, Var) and t.name == canon_name]
        if not positions:
            continue
        values = set()
        for row in d.get(atom.pred):
            vals = {row[i] for i in positions}
            if len(vals) == 1:
                values.add(vals.pop())
        return sorted(values, key=repr)
    raise AssertionError(f"variable {var_name} not in adornment body")


def _unit_propagate(clauses) -> set:
    """Forward chaining over definite Horn clauses, linear in total size."""
    clause_list = sorted(clauses, key=repr)
    waiting: dict = {}
    counts = []
    facts: set = set()
    queue = []
    for i, (head, body) in enumerate(clause_list):
        counts.append(len(body))
        if not body:
            queue.append(head)
        for b in body:
            waiting.setdefault(b, []).append(i)
    while queue:
        fact = queue.pop()
        if fact in facts:
            continue
        facts.add(fact)
        for i in waiting.get(fact, ()):
            counts[i] -= 1
            if counts[i] == 0:
                head = clause_list[i][0]
                if head not in facts:
                    queue.append(head)
    return facts


# ---------------------------------------------------------------------------
# Complexity reports


@dataclass(frozen=True)
class ComplexityBound:
    applies_to: str
    formula: str
    exponent: Fraction | None

    def to_json_dict(self) -> dict:
        return {
            "class": self.applies_to,
            "formula": self.formula,
            "exponent": None if self.exponent is None else str(self.exponent),
        }


@dataclass(frozen=True)
class ComplexityReport:
    classes: tuple
    f: int
    rule_count: int
    ew: Fraction
    fchw: int | None
    fchw_mode: str
    bounds: tuple

    def to_json_dict(self) -> dict:
        return {
            "classes": sorted(self.classes),
            "f": self.f,
            "rule_count": self.rule_count,
            "ew": str(self.ew),
            "fchw": self.fchw,
            "fchw_mode": self.fchw_mode,
            "bounds": [b.to_json_dict() for b in self.bounds],
        }


def complexity_report(p: Program, pi: AdornedProgram) -> ComplexityReport:
    """Applicable evaluation-time bounds with the numbers filled in.

    fchw is brute-forced (integral variant, an upper bound on the
    fractional one) only on small rules; otherwise the simple-chain bound
    of 2 or a symbolic placeholder is reported.
    """
    classes = classify_program(p)
    f = len({r.head.apred.key for r in pi.rules})
    ew = Fraction(width_of_program(pi, "fractional"))
    small = all(len(r.body) <= 5 and len(r.all_vars()) <= 8
                for r in p.rules)
    if small:
        fchw = max(integral_fchw(hypergraph_of(_full_hypergraph_rule(r)))
                   for r in p.rules)
        fchw_mode = "integral-bruteforce"
    elif SIMPLE_CHAIN in classes:
        fchw = 2
        fchw_mode = "classification-upper-bound"
    else:
        fchw = None
        fchw_mode = "symbolic"

    bounds = []
    if fchw is None:
        bounds.append(ComplexityBound(
            "general", "O(f^fchw * |P| * N^(ew*fchw))", None))
    else:
        bounds.append(ComplexityBound(
            "general",
            f"O({f}^{fchw} * {p.rule_count} * N^{ew * fchw})",
            ew * fchw))
    if SIMPLE_CHAIN in classes:
        bounds.append(ComplexityBound(
            SIMPLE_CHAIN,
            f"O({f}^2 * {p.rule_count} * N^{2 * ew})",
            2 * ew))
    if LINEAR in classes and fchw is not None:
        bounds.append(ComplexityBound(
            LINEAR,
            f"O({f} * {p.rule_count} * N^{ew + fchw - 1})",
            ew + fchw - 1))
    if ADORNMENT_GROUNDABLE in classes:
        bounds.append(ComplexityBound(
            ADORNMENT_GROUNDABLE,
            f"O({f} * {p.rule_count} * N^{ew})",
            ew))
    return ComplexityReport(
        classes=tuple(sorted(classes)), f=f, rule_count=p.rule_count,
        ew=ew, fchw=fchw, fchw_mode=fchw_mode, bounds=tuple(bounds))


def _full_hypergraph_rule(r: Rule) -> Rule:
    """The rule itself; kept for symmetry with hypergraph_of, which
    already drops only single-occurrence existential variables."""
    return r


def integral_fchw(h) -> int:
    """Brute-force integral free-connex width of a small hypergraph.

    Searches tree decompositions through vertex elimination orderings of
    the graph augmented with an output-variable clique (forcing the
    output variables to share a bag, the connex condition), and requires
    every bag to be coverable by few real edges.
    """
    vertices = sorted(h.vertices)
    if not vertices:
        return 1
    edge_sets = [set(e) for _, e in h.edges if e]
    if not edge_sets:
        return 1

    def min_cover(bag: frozenset) -> int:
        if not bag:
            return 0
        for k in range(1, len(edge_sets) + 1):
            for combo in combinations(edge_sets, k):
                if bag <= set().union(*combo):
                    return k
        return len(edge_sets) + 1  # uncoverable; forces a larger width

    cover_memo: dict = {}

    def cover(bag: frozenset) -> int:
        if bag not in cover_memo:
            cover_memo[bag] = min_cover(bag)
        return cover_memo[bag]

    # adjacency of the primal graph of H plus the v_out clique
    adj = {v: set() for v in vertices}
    for e in (*edge_sets, set(h.v_out)):
        for a in e:
            for b in e:
                if a != b:
                    adj[a].add(b)

    best = len(edge_sets) + 1
    for order in iter_permutations(vertices):
        g = {v: set(adj[v]) for v in vertices}
        width = 0
        for v in order:
            bag = frozenset({v} | g[v])
            width = max(width, cover(bag))
            if width >= best:
                break
            neigh = g[v]
            for a in neigh:
                g[a] |= neigh - {a}
                g[a].discard(v)
            for a in g:
                g[a].discard(v)
        else:
            best = min(best, width)
    return best
