"""Ground oracle: naive/semi-naive evaluation of plain and adorned
programs, per-rule boundedness and value-cover checks, and the generator
of instances on which the combinatorial size bound is exactly tight."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .core import (
    Atom, Const, ParseError, Program, Rule, ValidationError, Var,
)
from .adorn import AdornedAtom, AdornedProgram
from .sizebound import SchemaStats, bound1


@dataclass(frozen=True)
class EDBInstance:
    """Ground facts: relation name -> set of constant tuples."""
    relations: tuple  # of (name, frozenset of tuples)

    @classmethod
    def of(cls, mapping) -> "EDBInstance":
        pairs = mapping.items() if isinstance(mapping, dict) else mapping
        items = tuple(sorted(
            (name, frozenset(tuple(t) for t in tuples))
            for name, tuples in pairs))
        for name, tuples in items:
            arities = {len(t) for t in tuples}
            if len(arities) > 1:
                raise ValidationError(
                    f"relation {name} holds tuples of mixed arity")
        return cls(items)

    def as_dict(self) -> dict:
        return dict(self.relations)

    def get(self, name: str) -> frozenset:
        for n, tuples in self.relations:
            if n == name:
                return tuples
        return frozenset()

    @property
    def n(self) -> int:
        """Max relation size."""
        return max((len(t) for _, t in self.relations), default=0)

    def check_schema(self, p: Program) -> None:
        arities = p.arities()
        for name, tuples in self.relations:
            if name in p.idb:
                raise ValidationError(
                    f"EDB file defines derived predicate {name}")
            if name in arities and tuples:
                ar = len(next(iter(tuples)))
                if ar != arities[name]:
                    raise ValidationError(
                        f"relation {name} has arity {ar}, "
                        f"program expects {arities[name]}")


def parse_edb(text: str) -> EDBInstance:
    """Parse an EDB file: one ground fact per line, `%` comments."""
    from .core import _tokenize

    tokens = _tokenize(text)
    rels: dict = {}
    i = 0
    while tokens[i].kind != "EOF":
        tok = tokens[i]
        if tok.kind != "IDENT":
            raise ParseError("expected a fact", tok.line, tok.col)
        name = tok.text
        i += 1
        if tokens[i].kind != "LPAR":
            raise ParseError("expected '('", tokens[i].line, tokens[i].col)
        i += 1
        vals = []
        while True:
            t = tokens[i]
            if t.kind == "INT":
                vals.append(int(t.text))
            elif t.kind == "IDENT":
                vals.append(t.text)
            else:
                raise ParseError("facts may contain only constants",
                                 t.line, t.col)
            i += 1
            if tokens[i].kind == "COMMA":
                i += 1
                continue
            break
        if tokens[i].kind != "RPAR":
            raise ParseError("expected ')'", tokens[i].line, tokens[i].col)
        i += 1
        if tokens[i].kind != "DOT":
            raise ParseError("expected '.'", tokens[i].line, tokens[i].col)
        i += 1
        rels.setdefault(name, set()).add(tuple(vals))
    return EDBInstance.of(rels)


@dataclass(frozen=True)
class IDBResult:
    """Least-fixpoint contents of every derived relation.

    Keys are predicate names for plain programs and AdornedPredicate
    values for adorned ones.
    """
    relations: tuple  # of (key, frozenset)

    def as_dict(self) -> dict:
        return dict(self.relations)

    def get(self, key) -> frozenset:
        for k, tuples in self.relations:
            if k == key:
                return tuples
        return frozenset()


def union_adorned(result: IDBResult, q: str) -> frozenset:
    """Union of all adorned relations over the base predicate q."""
    out: set = set()
    found = False
    for key, tuples in result.relations:
        base = getattr(key, "base", key)
        if base == q:
            found = True
            out |= tuples
    if not found:
        raise ValidationError(f"no relation with base predicate {q}")
    return frozenset(out)


# ---------------------------------------------------------------------------
# Evaluation core


@dataclass(frozen=True)
class _ERule:
    head_key: object
    head_terms: tuple
    body: tuple  # of (key, terms, is_idb)


def _normalize(prog):
    """Turn a Program or AdornedProgram into _ERules plus the IDB key set."""
    if isinstance(prog, Program):
        rules = []
        for r in prog.rules:
            body = tuple(
                (a.pred, a.terms, a.pred in prog.idb) for a in r.body)
            rules.append(_ERule(r.head.pred, r.head.terms, body))
        idb_keys = set(prog.idb)
        return rules, idb_keys, prog.source if hasattr(prog, "source") else prog
    if isinstance(prog, AdornedProgram):
        rules = []
        idb_keys = set()
        for r in prog.rules:
            idb_keys.add(r.head.apred)
            body = []
            for a in r.body:
                if isinstance(a, AdornedAtom):
                    body.append((a.apred, a.terms, True))
                    idb_keys.add(a.apred)
                else:
                    body.append((a.pred, a.terms, False))
            rules.append(_ERule(r.head.apred, r.head.terms, tuple(body)))
        return rules, idb_keys, prog.source
    raise TypeError(f"cannot evaluate {type(prog).__name__}")


def _match(body, binding=None):
    """All bindings extending `binding` that ground every body atom in its
    relation.  body: list of (terms, tuple-collection)."""
    def rec(i, bnd):
        if i == len(body):
            yield bnd
            return
        terms, rel = body[i]
        for row in rel:
            if len(row) != len(terms):
                continue
            b2 = bnd
            ok = True
            for t, v in zip(terms, row):
                if isinstance(t, Const):
                    if t.value != v:
                        ok = False
                        break
                elif t.name in b2:
                    if b2[t.name] != v:
                        ok = False
                        break
                else:
                    if b2 is bnd:
                        b2 = dict(bnd)
                    b2[t.name] = v
            if ok:
                yield from rec(i + 1, b2)
    yield from rec(0, dict(binding or {}))


def _ground_head(terms, binding):
    out = []
    for t in terms:
        if isinstance(t, Const):
            out.append(t.value)
        else:
            out.append(binding[t.name])
    return tuple(out)


def evaluate(prog, d: EDBInstance, method: str = "seminaive") -> IDBResult:
    """Least fixpoint of prog over d (exact, deterministic)."""
    rules, idb_keys, source = _normalize(prog)
    d.check_schema(source)
    if method == "naive":
        rels = _naive(rules, idb_keys, d)
    elif method == "seminaive":
        rels = _seminaive(rules, idb_keys, d)
    else:
        raise ValueError(f"unknown method {method!r}")

    def sort_key(item):
        key = item[0]
        return (getattr(key, "key", (key,)),)
    return IDBResult(tuple(sorted(
        ((k, frozenset(v)) for k, v in rels.items()), key=sort_key)))


def _resolve_rels(atom_key, is_idb, idb_rels, d):
    if is_idb:
        return idb_rels[atom_key]
    return d.get(atom_key)


def _apply_rule(rule: _ERule, get_rel) -> set:
    body = [(terms, sorted(get_rel(key, is_idb, j), key=repr))
            for j, (key, terms, is_idb) in enumerate(rule.body)]
    out = set()
    for bnd in _match(body):
        out.add(_ground_head(rule.head_terms, bnd))
    return out


def _naive(rules, idb_keys, d):
    rels = {k: set() for k in idb_keys}
    changed = True
    while changed:
        changed = False
        for rule in rules:
            derived = _apply_rule(
                rule,
                lambda key, is_idb, j: rels[key] if is_idb else d.get(key))
            new = derived - rels[rule.head_key]
            if new:
                rels[rule.head_key] |= new
                changed = True
    return rels


def _seminaive(rules, idb_keys, d):
    full = {k: set() for k in idb_keys}
    delta = {k: set() for k in idb_keys}

    # first round: rules without IDB body atoms
    for rule in rules:
        if any(is_idb for _, _, is_idb in rule.body):
            continue
        for t in _apply_rule(
                rule, lambda key, is_idb, j: d.get(key)):
            delta[rule.head_key].add(t)

    while any(delta.values()):
        new_full = {k: full[k] | delta[k] for k in full}
        candidates: dict = {k: set() for k in full}
        for rule in rules:
            idb_positions = [j for j, (_, _, is_idb) in enumerate(rule.body)
                             if is_idb]
            for pivot in idb_positions:
                def get_rel(key, is_idb, j, pivot=pivot):
                    if not is_idb:
                        return d.get(key)
                    if j < pivot:
                        return full[key]
                    if j == pivot:
                        return delta[key]
                    return new_full[key]
                for t in _apply_rule(rule, get_rel):
                    if t not in new_full[rule.head_key]:
                        candidates[rule.head_key].add(t)
        full = new_full
        delta = candidates
    return full


def eval_cq(rule: Rule, d: EDBInstance) -> frozenset:
    """Evaluate a single EDB-only rule as a conjunctive query over d."""
    if not rule.body:
        for t in rule.head.terms:
            if isinstance(t, Var):
                raise ValidationError(
                    "empty-body query with head variables")
        return frozenset({_ground_head(rule.head.terms, {})})
    body = [(a.terms, sorted(d.get(a.pred), key=repr)) for a in rule.body]
    out = set()
    for bnd in _match(body):
        out.add(_ground_head(rule.head.terms, bnd))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Boundedness / cover checks


@dataclass(frozen=True)
class BoundednessViolation:
    rule_index: int
    tuple_value: tuple


@dataclass(frozen=True)
class RuleBoundedReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def check_rule_bounded(pi: AdornedProgram, d: EDBInstance) -> RuleBoundedReport:
    """Every tuple a rule derives must also be derived by the rule's head
    adornment evaluated as a standalone query over d."""
    result = evaluate(pi, d)
    rels = result.as_dict()
    violations = []
    for idx, rule in enumerate(pi.rules):
        body = []
        for a in rule.body:
            if isinstance(a, AdornedAtom):
                body.append((a.terms, sorted(rels.get(a.apred, frozenset()), key=repr)))
            else:
                body.append((a.terms, sorted(d.get(a.pred), key=repr)))
        derived = set()
        for bnd in _match(body):
            derived.add(_ground_head(rule.head.terms, bnd))
        allowed = eval_cq(rule.head.apred.adornment.rule, d)
        for t in sorted(derived - allowed):
            violations.append(BoundednessViolation(idx, t))
    return RuleBoundedReport(tuple(violations))


def value_cover_ok(values, d: EDBInstance, k: int) -> bool:
    """Can every value be found within at most k EDB tuples (brute force)?"""
    needed = set(values)
    pool = [set(row) for _, tuples in d.relations for row in tuples]

    def rec(remaining, depth):
        if not remaining:
            return True
        if depth == 0:
            return False
        v = next(iter(remaining))
        for tup in pool:
            if v in tup:
                if rec(remaining - tup, depth - 1):
                    return True
        return False

    return rec(needed, k)


# ---------------------------------------------------------------------------
# Tightness generator


def generate_tightness_instance(omega: int, mu: int, nu: int, m: int,
                                n: int, rule_cap: int = 50000):
    """A program and instance on which |q| equals bound1 exactly.

    The instance holds m relations of n pairwise-value-disjoint nu-tuples;
    the rules enumerate, for every k <= omega, every k-tuple of relation
    symbols and every mu-tuple of variable picks.
    """
    if min(omega, mu, nu, m, n) < 1:
        raise ValueError("all parameters must be >= 1")
    expected = sum(m ** k * (k * nu) ** mu for k in range(1, omega + 1))
    if expected > rule_cap:
        raise ValueError(
            f"parameter combination yields {expected} rules "
            f"(cap {rule_cap})")

    rels: dict = {}
    for i in range(1, m + 1):
        tuples = set()
        for r in range(1, n + 1):
            tuples.add(tuple(
                n * nu * (i - 1) + (r - 1) * nu + c
                for c in range(1, nu + 1)))
        rels[f"e{i}"] = tuples
    instance = EDBInstance.of(rels)

    rules = []
    for k in range(1, omega + 1):
        all_vars = [Var(f"X{j}") for j in range(1, k * nu + 1)]
        for rel_choice in product(range(1, m + 1), repeat=k):
            body = tuple(
                Atom(f"e{rel_choice[a]}",
                     tuple(all_vars[a * nu + c] for c in range(nu)))
                for a in range(k))
            for var_choice in product(range(k * nu), repeat=mu):
                head = Atom("q", tuple(all_vars[j] for j in var_choice))
                rules.append(Rule(head, body))
    program = Program.from_rules(rules)
    return program, instance


def tightness_bound(omega: int, mu: int, nu: int, m: int, n: int) -> int:
    """bound1 for a generated tightness instance's parameters."""
    stats = SchemaStats(num_edbs=m, ear=nu, arq=mu,
                        rule_count=0, term_count=0)
    return bound1(stats, omega, n)
