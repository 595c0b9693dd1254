"""Adornments, relaxation and membership functions, and the fixpoint
engine that rewrites a program into an equivalent EDB-bounded one."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .core import (
    Atom, Const, INTERNAL_PREFIX, Program, Rule, Term, ValidationError, Var,
    classify_rule_atoms, format_term,
)
from .unify import (
    Substitution, canonical_form, canonical_key, canonical_rule, fresh_name,
    mgu, subsumes,
)


class BudgetExceeded(Exception):
    """The fixpoint engine hit a rule or iteration limit."""

    def __init__(self, limit: str, partial):
        super().__init__(f"adornment budget exceeded: {limit}")
        self.limit = limit
        self.partial = partial


@dataclass(frozen=True)
class Adornment:
    """A safe rule with EDB-only body, bounding an IDB predicate.

    Stored canonically: identity and hashing go through the canonical key,
    so adornments equal up to renaming compare equal.
    """
    rule: Rule
    key: tuple = field(compare=False, default=None)

    @classmethod
    def of(cls, rule: Rule) -> "Adornment":
        rep = canonical_rule(rule)
        return cls(rule=rep, key=canonical_form(rep))

    def __eq__(self, other):
        return isinstance(other, Adornment) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def base(self) -> str:
        return self.rule.head.pred

    def __str__(self) -> str:
        from .core import format_rule
        return format_rule(self.rule, terminator="")


@dataclass(frozen=True)
class AdornedPredicate:
    """An IDB predicate together with one of its adornments."""
    base: str
    adornment: Adornment

    @property
    def key(self) -> tuple:
        return (self.base, self.adornment.key)

    def __str__(self) -> str:
        return f"{self.base}[{self.adornment}]"


@dataclass(frozen=True)
class AdornedAtom:
    """An adorned predicate applied to terms."""
    apred: AdornedPredicate
    terms: tuple

    @property
    def pred(self) -> str:
        return self.apred.base

    @property
    def arity(self) -> int:
        return len(self.terms)

    def vars(self) -> list:
        seen = []
        for t in self.terms:
            if isinstance(t, Var) and t.name not in seen:
                seen.append(t.name)
        return seen


@dataclass(frozen=True)
class AdornedRule:
    """A rule whose head (and IDB body atoms) carry adornments."""
    head: AdornedAtom
    body: tuple  # mix of AdornedAtom and plain Atom

    def canonical(self) -> tuple:
        return canonical_key(
            ("q", self.head.pred, self.head.apred.adornment.key),
            self.head.terms,
            [(("q", a.pred, a.apred.adornment.key), a.terms)
             if isinstance(a, AdornedAtom) else (("p", a.pred), a.terms)
             for a in self.body],
        )


@dataclass(frozen=True)
class AdornedProgram:
    """Output of the fixpoint engine: rules sorted by canonical form."""
    rules: tuple
    source: Program

    def adorned_predicates(self) -> list:
        seen = {}
        for r in self.rules:
            seen.setdefault(r.head.apred.key, r.head.apred)
        return [seen[k] for k in sorted(seen)]

    def adornment_map(self) -> dict:
        """Base predicate -> sorted list of its adornments."""
        out: dict = {}
        for ap in self.adorned_predicates():
            out.setdefault(ap.base, []).append(ap.adornment)
        return out

    def pretty(self) -> str:
        return "\n".join(format_adorned_rule(r) for r in self.rules) + "\n"

    def __str__(self) -> str:
        return self.pretty()


def adornments_of(pi: AdornedProgram, q: str) -> set:
    """Distinct adornments the predicate q carries in pi."""
    if q not in pi.source.idb:
        raise ValidationError(f"unknown IDB predicate {q}")
    return {r.head.apred.adornment for r in pi.rules if r.head.pred == q}


# ---------------------------------------------------------------------------
# Printing


def _adornment_display(adn: Adornment, args: tuple) -> str:
    """Render an adornment, preferring the adorned atom's variable names."""
    rep = adn.rule
    rename: dict = {}
    taken = set()
    for pos, t in enumerate(rep.head.terms):
        if isinstance(t, Var) and isinstance(args[pos], Var):
            name = args[pos].name
            if not name.startswith(INTERNAL_PREFIX) and name not in taken:
                rename.setdefault(t.name, name)
                taken.add(name)
    counts = rep.var_occurrences()
    gen = 0
    for v in rep.all_vars():
        if v in rename:
            continue
        if counts.get(v, 0) == 1 and v not in {x.name for x in rep.head.terms
                                               if isinstance(x, Var)}:
            rename[v] = "_"
        else:
            while f"V{gen}" in taken:
                gen += 1
            rename[v] = f"V{gen}"
            taken.add(f"V{gen}")
    def fmt_atom(a):
        inner = ",".join(
            rename.get(t.name, t.name) if isinstance(t, Var) else str(t.value)
            for t in a.terms)
        return f"{a.pred}({inner})"
    body = ", ".join(fmt_atom(a) for a in rep.body)
    return f"{fmt_atom(rep.head)} :- {body}" if rep.body else fmt_atom(rep.head)


def format_adorned_rule(r: AdornedRule) -> str:
    plain = Rule(Atom(r.head.pred, r.head.terms),
                 tuple(Atom(a.pred, a.terms) for a in r.body))
    names = _display_names_of(plain)

    def fmt_term(t):
        return names.get(t.name, t.name) if isinstance(t, Var) else str(t.value)

    def fmt(a) -> str:
        args = ",".join(fmt_term(t) for t in a.terms)
        if isinstance(a, AdornedAtom):
            disp_args = tuple(
                Var(names[t.name]) if isinstance(t, Var) else t
                for t in a.terms)
            adn = _adornment_display(a.apred.adornment, disp_args)
            return f"{a.pred}[{adn}]({args})"
        return f"{a.pred}({args})"

    body = ", ".join(fmt(a) for a in r.body)
    return f"{fmt(r.head)} :- {body}."


def _display_names_of(rule: Rule) -> dict:
    from .core import _display_names
    return _display_names(rule)


# ---------------------------------------------------------------------------
# Relaxation functions


class RelaxationFn:
    """Base class; subclasses turn a candidate bounding rule into an
    adornment, never making it more restrictive."""

    name = "id"

    def apply(self, rule: Rule) -> Rule:
        return rule


class Id(RelaxationFn):
    name = "id"


class GOut(RelaxationFn):
    """Wildcard every non-head body argument, then drop body atoms that
    impose no restriction beyond another atom of the same predicate."""

    name = "gout"

    def apply(self, rule: Rule) -> Rule:
        return _gout(rule)


class GK(RelaxationFn):
    """Identity until some candidate body exceeds k atoms, then GOut.

    The switch is sticky: once triggered, every later candidate in the
    same engine run is relaxed with GOut as well.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self.triggered = False

    @property
    def name(self) -> str:
        return f"gk={self.k}"

    def apply(self, rule: Rule) -> Rule:
        if len(rule.body) > self.k:
            self.triggered = True
        if self.triggered:
            return _gout(rule)
        return rule


class GMin(RelaxationFn):
    """Greedy minimal covering subset of the body; each head variable
    survives in exactly one position."""

    name = "gmin"

    def apply(self, rule: Rule) -> Rule:
        return _gmin(rule)


def _patterns(rule: Rule):
    """Body atoms as (pred, pattern) with non-head arguments (and
    constants) turned into None placeholders."""
    hv = set(rule.head_vars())
    pats = []
    for a in rule.body:
        pat = tuple(
            t.name if isinstance(t, Var) and t.name in hv else None
            for t in a.terms)
        pats.append((a.pred, pat))
    return pats


def _rebuild(head: Atom, pats) -> Rule:
    counter = [0]

    def wild() -> Var:
        counter[0] += 1
        return Var(f"{INTERNAL_PREFIX}g{counter[0]}")

    atoms = tuple(
        Atom(pred, tuple(Var(x) if x is not None else wild() for x in pat))
        for pred, pat in pats)
    return Rule(head, atoms)


def _gout(rule: Rule) -> Rule:
    pats = _patterns(rule)
    seen = set()
    deduped = []
    for p in pats:
        if p in seen:
            continue
        seen.add(p)
        deduped.append(p)

    def redundant(p) -> bool:
        pred, pat = p
        if all(x is None for x in pat):
            return True
        for pred2, pat2 in deduped:
            if pred2 != pred or pat2 == pat:
                continue
            if all(a is None or a == b for a, b in zip(pat, pat2)):
                return True
        return False

    kept = [p for p in deduped if not redundant(p)]
    return _rebuild(rule.head, kept)


def _gmin(rule: Rule) -> Rule:
    canon = canonical_rule(rule)
    pats = _patterns(canon)
    pats.sort(key=lambda p: (p[0], tuple((1,) if x is None else (0, x)
                                         for x in p[1])))
    need = set(canon.head_vars())
    # smallest covering subset of atoms, so the minimal adornment keeps
    # exactly as many atoms as the integral edge-cover width; ties go to
    # the lexicographically first index tuple for determinism
    cover: tuple = ()
    if need:
        sets = [frozenset(x for x in pat if x is not None)
                for _, pat in pats]
        for k in range(1, len(pats) + 1):
            found = None
            for combo in combinations(range(len(pats)), k):
                if need <= frozenset().union(*(sets[i] for i in combo)):
                    found = combo
                    break
            if found is not None:
                cover = found
                break
    covered: set = set()
    kept = []
    for i in cover:
        pred, pat = pats[i]
        new_pat = []
        for x in pat:
            if x is not None and x not in covered:
                covered.add(x)
                new_pat.append(x)
            else:
                new_pat.append(None)
        kept.append((pred, tuple(new_pat)))
    return _rebuild(canon.head, kept)


def relax(f: RelaxationFn, rule: Rule) -> Adornment:
    """Apply a relaxation function and canonicalize the result."""
    relaxed = f.apply(rule)
    hv = set(relaxed.head_vars())
    bv = set(relaxed.body_vars())
    if not hv <= bv:
        raise AssertionError(f"relaxation produced an unsafe rule: {relaxed}")
    return Adornment.of(relaxed)


def make_relaxation(name: str) -> RelaxationFn:
    if name == "id":
        return Id()
    if name == "gout":
        return GOut()
    if name == "gmin":
        return GMin()
    if name.startswith("gk="):
        return GK(int(name[3:]))
    raise ValueError(f"unknown relaxation function {name!r}")


# ---------------------------------------------------------------------------
# Membership functions


def _dependency_recursive(pred_key, rules) -> bool:
    """True iff pred_key can reach itself in the adorned dependency graph."""
    edges: dict = {}
    for r in rules:
        src = r.head.apred.key
        for a in r.body:
            if isinstance(a, AdornedAtom):
                edges.setdefault(src, set()).add(a.apred.key)
    stack = list(edges.get(pred_key, ()))
    seen = set()
    while stack:
        cur = stack.pop()
        if cur == pred_key:
            return True
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(edges.get(cur, ()))
    return False


def h_eq(r: AdornedRule, rules, keys=None) -> bool:
    if keys is None:
        keys = {x.canonical() for x in rules}
    return r.canonical() in keys


def h_cont(r: AdornedRule, rules, keys=None) -> bool:
    if h_eq(r, rules, keys):
        return True
    rho = r.head.apred.adornment
    if _dependency_recursive(r.head.apred.key, (*rules, r)):
        return False
    for other in rules:
        ap = other.head.apred
        if ap.base != r.head.pred:
            continue
        if subsumes(ap.adornment.rule, rho.rule):
            return True
    return False


class MembershipFn:
    """Thin dispatch wrapper so the engine takes membership as a value."""

    def __init__(self, name: str):
        if name not in ("heq", "hcont"):
            raise ValueError(f"unknown membership function {name!r}")
        self.name = name

    def check(self, r: AdornedRule, rules, keys=None) -> bool:
        if self.name == "heq":
            return h_eq(r, rules, keys)
        return h_cont(r, rules, keys)


def membership(f: MembershipFn | str, r: AdornedRule, pi) -> bool:
    if isinstance(f, str):
        f = MembershipFn(f)
    rules = pi.rules if isinstance(pi, AdornedProgram) else tuple(pi)
    return f.check(r, rules)


# ---------------------------------------------------------------------------
# The fixpoint engine


@dataclass(frozen=True)
class _Candidate:
    """A distinct adorned head available for resolving an IDB body atom."""
    pred: str
    adornment: Adornment
    head_terms: tuple

    @property
    def key(self) -> tuple:
        labels: dict = {}
        sig = []
        for t in self.head_terms:
            if isinstance(t, Var):
                lab = labels.setdefault(t.name, len(labels))
                sig.append(("v", lab))
            else:
                sig.append(("c", str(t.value)))
        return (self.pred, self.adornment.key, tuple(sig))


def _instantiate_candidate(cand: _Candidate, used: set):
    """Rename the candidate's head apart and instantiate its adornment
    body in terms of the renamed head variables."""
    renaming: dict = {}
    for t in cand.head_terms:
        if isinstance(t, Var) and t.name not in renaming:
            renaming[t.name] = Var(fresh_name(t.name, used))
    head_terms = tuple(
        renaming[t.name] if isinstance(t, Var) else t
        for t in cand.head_terms)

    # map the canonical adornment onto the renamed head terms
    rep = cand.adornment.rule
    mapping: dict = {}
    for canon_t, inst_t in zip(rep.head.terms, head_terms):
        if isinstance(canon_t, Var):
            mapping.setdefault(canon_t.name, inst_t)
    body = []
    for a in rep.body:
        terms = []
        for t in a.terms:
            if isinstance(t, Const):
                terms.append(t)
            elif t.name in mapping:
                terms.append(mapping[t.name])
            else:
                v = Var(fresh_name(f"{INTERNAL_PREFIX}b{t.name.lstrip('_')}",
                                   used))
                mapping[t.name] = v
                terms.append(v)
        body.append(Atom(a.pred, tuple(terms)))
    return head_terms, tuple(body)


def _dedup_body(head: AdornedAtom, body) -> tuple:
    """Drop body atoms duplicated up to renaming of rule-singleton vars."""
    counts: dict = {}
    for a in (head, *body):
        for t in a.terms:
            if isinstance(t, Var):
                counts[t.name] = counts.get(t.name, 0) + 1

    def pat(a):
        kind = (("q", a.pred, a.apred.adornment.key)
                if isinstance(a, AdornedAtom) else ("p", a.pred))
        sig = tuple(
            ("_",) if isinstance(t, Var) and counts[t.name] == 1
            else (("v", t.name) if isinstance(t, Var) else ("c", str(t.value)))
            for t in a.terms)
        return (kind, sig)

    seen = set()
    out = []
    for a in body:
        p = pat(a)
        if p in seen:
            continue
        seen.add(p)
        out.append(a)
    return tuple(out)


class _Engine:
    def __init__(self, p: Program, g: RelaxationFn, h: MembershipFn,
                 max_iterations: int, max_rules: int):
        self.p = p
        self.g = g
        self.h = h
        self.max_iterations = max_iterations
        self.max_rules = max_rules
        self.rules: list = []
        self.keys: set = set()
        self.tried: set = set()

    def partial(self) -> AdornedProgram:
        ordered = sorted(self.rules, key=lambda r: r.canonical())
        return AdornedProgram(rules=tuple(ordered), source=self.p)

    def candidates_for(self, pred: str) -> list:
        seen: dict = {}
        for r in self.rules:
            if r.head.pred == pred:
                c = _Candidate(pred, r.head.apred.adornment, r.head.terms)
                seen.setdefault(c.key, c)
        return [seen[k] for k in sorted(seen)]

    def build(self, rule: Rule, combo) -> AdornedRule | None:
        idb_atoms, edb_atoms = classify_rule_atoms(rule, self.p)
        used = set(rule.all_vars())
        pairs = []
        inst_bodies = []
        for atom, cand in zip(idb_atoms, combo):
            head_terms, body = _instantiate_candidate(cand, used)
            pairs.append((atom.terms, head_terms))
            inst_bodies.append(body)
        sigma = mgu(pairs) if pairs else Substitution()
        if sigma is None:
            return None
        head_terms = sigma.apply_terms(rule.head.terms)
        rho0_body = [sigma.apply_atom(a)
                     for body in inst_bodies for a in body]
        rho0_body += [sigma.apply_atom(a) for a in edb_atoms]
        rho0 = Rule(Atom(rule.head.pred, head_terms), tuple(rho0_body))
        rho = relax(self.g, rho0)
        head = AdornedAtom(AdornedPredicate(rule.head.pred, rho), head_terms)
        body = tuple(
            AdornedAtom(AdornedPredicate(atom.pred, cand.adornment),
                        sigma.apply_terms(atom.terms))
            for atom, cand in zip(idb_atoms, combo)
        ) + tuple(sigma.apply_atom(a) for a in edb_atoms)
        return AdornedRule(head, _dedup_body(head, body))

    def run(self) -> AdornedProgram:
        from itertools import product

        sweeps = 0
        while True:
            sweeps += 1
            if sweeps > self.max_iterations:
                raise BudgetExceeded("max-iterations", self.partial())
            added = False
            per_pred = {q: self.candidates_for(q) for q in self.p.idb}
            for idx, rule in enumerate(self.p.rules):
                idb_atoms, _ = classify_rule_atoms(rule, self.p)
                pools = [per_pred[a.pred] for a in idb_atoms]
                if any(not pool for pool in pools):
                    continue
                for combo in product(*pools):
                    key = (idx, tuple(c.key for c in combo))
                    if key in self.tried:
                        continue
                    self.tried.add(key)
                    new_rule = self.build(rule, combo)
                    if new_rule is None:
                        continue
                    if self.h.check(new_rule, tuple(self.rules), self.keys):
                        continue
                    self.rules.append(new_rule)
                    self.keys.add(new_rule.canonical())
                    added = True
                    if len(self.rules) > self.max_rules:
                        raise BudgetExceeded("max-rules", self.partial())
            if not added:
                return self.partial()


def adorn_program(p: Program, g: RelaxationFn | str,
                  h: MembershipFn | str = "heq",
                  max_iterations: int = 1000,
                  max_rules: int = 10000) -> AdornedProgram:
    """Rewrite p into an equivalent EDB-bounded program (fixpoint search).

    Raises BudgetExceeded (carrying the partial program) when a limit is
    hit, which can happen with the Id relaxation on unbounded programs.
    """
    if isinstance(g, str):
        g = make_relaxation(g)
    if isinstance(h, str):
        h = MembershipFn(h)
    return _Engine(p, g, h, max_iterations, max_rules).run()


def fixpoint_stable(p: Program, pi: AdornedProgram, g: RelaxationFn,
                    h: MembershipFn) -> bool:
    """Re-run one sweep over pi's rules; true iff nothing new is admitted."""
    engine = _Engine(p, g, h, max_iterations=1, max_rules=10 ** 9)
    engine.rules = list(pi.rules)
    engine.keys = {r.canonical() for r in pi.rules}
    try:
        engine.run()
    except BudgetExceeded:
        return False
    return len(engine.rules) == len(pi.rules)
