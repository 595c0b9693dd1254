"""Substitutions, simultaneous most general unifiers, renaming-apart,
canonical forms for rules, and rule subsumption."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Atom, Const, INTERNAL_PREFIX, Rule, Term, Var


@dataclass(frozen=True)
class Substitution:
    """An idempotent map from variable names to terms."""
    bindings: tuple = ()

    def __post_init__(self):
        if isinstance(self.bindings, dict):
            object.__setattr__(self, "bindings",
                               tuple(sorted(self.bindings.items())))

    def as_dict(self) -> dict:
        return dict(self.bindings)

    @property
    def is_identity(self) -> bool:
        return not self.bindings

    def apply_term(self, t: Term) -> Term:
        if isinstance(t, Var):
            for k, v in self.bindings:
                if k == t.name:
                    return v
        return t

    def apply_terms(self, terms) -> tuple:
        return tuple(self.apply_term(t) for t in terms)

    def apply_atom(self, a: Atom) -> Atom:
        return Atom(a.pred, self.apply_terms(a.terms))

    def apply_rule(self, r: Rule) -> Rule:
        return Rule(self.apply_atom(r.head),
                    tuple(self.apply_atom(a) for a in r.body))


def _resolve(t: Term, bindings: dict) -> Term:
    if isinstance(t, Var) and t.name in bindings:
        return bindings[t.name]
    return t


def mgu(pairs) -> Substitution | None:
    """Simultaneous most general unifier of a list of term-tuple pairs.

    Returns None on failure.  When two variables unify, the one whose
    first occurrence in the flattened pair list is later maps to the
    earlier one, making the result deterministic.
    """
    order: dict = {}
    idx = 0
    equations = []
    for s_tuple, t_tuple in pairs:
        if len(s_tuple) != len(t_tuple):
            raise ValueError("tuples in a unification pair differ in length")
        for t in (*s_tuple, *t_tuple):
            if isinstance(t, Var) and t.name not in order:
                order[t.name] = idx
                idx += 1
        equations.extend(zip(s_tuple, t_tuple))

    bindings: dict = {}

    def bind(v: Var, t: Term) -> None:
        for k in list(bindings):
            u = bindings[k]
            if isinstance(u, Var) and u.name == v.name:
                bindings[k] = t
        bindings[v.name] = t

    for s, t in equations:
        s = _resolve(s, bindings)
        t = _resolve(t, bindings)
        if s == t:
            continue
        if isinstance(s, Const) and isinstance(t, Const):
            return None
        if isinstance(s, Var) and isinstance(t, Var):
            if order[s.name] <= order[t.name]:
                bind(t, s)
            else:
                bind(s, t)
        elif isinstance(s, Var):
            bind(s, t)
        else:
            bind(t, s)
    sub = Substitution(bindings)
    # idempotence and soundness are cheap to assert here
    for s_tuple, t_tuple in pairs:
        assert sub.apply_terms(s_tuple) == sub.apply_terms(t_tuple)
    return sub


# ---------------------------------------------------------------------------
# Renaming apart


def fresh_name(base: str, used: set) -> str:
    """A variant of base not in used; records it as used."""
    if base not in used:
        used.add(base)
        return base
    k = 2
    while f"{base}_{k}" in used:
        k += 1
    used.add(f"{base}_{k}")
    return f"{base}_{k}"


def rename_rule(r: Rule, used: set) -> Rule:
    """Rename r's variables away from `used`, updating `used` in place."""
    mapping = {}
    for v in r.all_vars():
        mapping[v] = Var(fresh_name(v, used))
    sub = Substitution({k: v for k, v in mapping.items()})
    return sub.apply_rule(r)


def rename_apart(rules) -> list:
    """Pairwise variable-disjoint copies of the given rules."""
    used: set = set()
    return [rename_rule(r, used) for r in rules]


# ---------------------------------------------------------------------------
# Canonical forms


def _term_sig(t: Term, labels: dict):
    if isinstance(t, Var):
        if t.name in labels:
            return ("v", labels[t.name])
        return ("v?",)
    if isinstance(t.value, int):
        return ("ci", t.value)
    return ("cs", str(t.value))


def _dedup_items(head_terms, items):
    """Drop body atoms identical to an earlier one up to renaming of
    variables that occur only once in the whole rule."""
    counts: dict = {}
    for terms in (head_terms, *[ts for _, ts in items]):
        for t in terms:
            if isinstance(t, Var):
                counts[t.name] = counts.get(t.name, 0) + 1

    def pattern(pred_key, terms):
        sig = []
        for t in terms:
            if isinstance(t, Var) and counts.get(t.name, 0) == 1:
                sig.append(("_",))
            else:
                sig.append(_term_sig(t, {}) if isinstance(t, Const)
                           else ("v", t.name))
        return (pred_key, tuple(sig))

    seen = set()
    out = []
    for pred_key, terms in items:
        p = pattern(pred_key, terms)
        if p in seen:
            continue
        seen.add(p)
        out.append((pred_key, terms))
    return out


def canonical_key(head_key, head_terms, body_items) -> tuple:
    """Canonical key for a rule given as (head pred key, head terms,
    [(body pred key, body terms)]).

    Two rules get equal keys iff they are identical up to variable renaming
    and body reordering/duplication.  Head variables are labeled by first
    occurrence in the head; remaining variables by backtracking search for
    the lexicographically least rendering.
    """
    body_items = _dedup_items(head_terms, list(body_items))

    labels: dict = {}
    for t in head_terms:
        if isinstance(t, Var) and t.name not in labels:
            labels[t.name] = len(labels)

    free = []
    for _, terms in body_items:
        for t in terms:
            if isinstance(t, Var) and t.name not in labels and t.name not in free:
                free.append(t.name)

    def render(lab):
        head_sig = (head_key, tuple(_term_sig(t, lab) for t in head_terms))
        body_sig = tuple(sorted(
            (pk, tuple(_term_sig(t, lab) for t in terms))
            for pk, terms in body_items
        ))
        return (head_sig, body_sig)

    if not free:
        return render(labels)

    occurrences: dict = {}
    for pk, terms in body_items:
        for pos, t in enumerate(terms):
            if isinstance(t, Var) and t.name in free:
                occurrences.setdefault(t.name, []).append((pk, pos, terms))

    best = [None]

    def invariant(v, lab):
        sig = []
        for pk, pos, terms in occurrences[v]:
            sig.append((pk, pos, tuple(_term_sig(t, lab) for t in terms)))
        return tuple(sorted(sig))

    def search(lab, remaining):
        if not remaining:
            cand = render(lab)
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        sigs = {v: invariant(v, lab) for v in remaining}
        least = min(sigs.values())
        for v in remaining:
            if sigs[v] != least:
                continue
            lab2 = dict(lab)
            lab2[v] = len(lab2)
            search(lab2, [w for w in remaining if w != v])

    search(labels, free)
    return best[0]


def canonical_form(r: Rule) -> tuple:
    """Canonical key of a plain rule."""
    return canonical_key(("p", r.head.pred),
                         r.head.terms,
                         [(("p", a.pred), a.terms) for a in r.body])


def _sig_to_term(sig, singleton_labels) -> Term:
    if sig[0] == "v":
        label = sig[1]
        if label in singleton_labels:
            return Var(f"{INTERNAL_PREFIX}c{label}")
        return Var(f"V{label}")
    if sig[0] == "ci":
        return Const(sig[1])
    return Const(sig[1])


def canonical_rule(r: Rule) -> Rule:
    """A standard representative of r's renaming class.

    Head variables are named V0, V1, ... by head position; body-only
    variables occurring exactly once get internal (wildcard) names.
    """
    key = canonical_form(r)
    (head_key, head_sigs), body = key
    counts: dict = {}
    head_labels = set()
    for sig in head_sigs:
        if sig[0] == "v":
            counts[sig[1]] = counts.get(sig[1], 0) + 1
            head_labels.add(sig[1])
    for _, sigs in body:
        for sig in sigs:
            if sig[0] == "v":
                counts[sig[1]] = counts.get(sig[1], 0) + 1
    singles = {lab for lab, c in counts.items()
               if c == 1 and lab not in head_labels}
    head = Atom(head_key[1],
                tuple(_sig_to_term(s, singles) for s in head_sigs))
    atoms = tuple(
        Atom(pk[1], tuple(_sig_to_term(s, singles) for s in sigs))
        for pk, sigs in body
    )
    return Rule(head, atoms)


# ---------------------------------------------------------------------------
# Subsumption


def subsumes(r1: Rule, r2: Rule) -> bool:
    """True iff a homomorphism maps r1 into r2, matching heads positionally.

    The subsumer r1 derives a superset of r2's tuples.  Exact backtracking
    search; exponential worst case, fine at the scale adornments reach.
    """
    if r1.head.pred != r2.head.pred or r1.head.arity != r2.head.arity:
        raise ValueError(
            f"subsumption needs matching heads: "
            f"{r1.head.pred}/{r1.head.arity} vs {r2.head.pred}/{r2.head.arity}"
        )

    mapping: dict = {}

    def extend(t1: Term, t2: Term, m: dict) -> dict | None:
        if isinstance(t1, Const):
            return m if t1 == t2 else None
        if t1.name in m:
            return m if m[t1.name] == t2 else None
        m = dict(m)
        m[t1.name] = t2
        return m

    for t1, t2 in zip(r1.head.terms, r2.head.terms):
        nxt = extend(t1, t2, mapping)
        if nxt is None:
            return False
        mapping = nxt

    atoms = list(r1.body)
    by_pred: dict = {}
    by_pos: dict = {}
    for b in r2.body:
        by_pred.setdefault((b.pred, b.arity), []).append(b)
        for i, t in enumerate(b.terms):
            by_pos.setdefault((b.pred, b.arity, i, t), []).append(b)

    def candidates(a: Atom, m: dict) -> list:
        # a bound position narrows the scan to an index bucket
        pool = None
        for i, t in enumerate(a.terms):
            tgt = None
            if isinstance(t, Const):
                tgt = t
            elif t.name in m:
                tgt = m[t.name]
            if tgt is not None:
                bucket = by_pos.get((a.pred, a.arity, i, tgt), [])
                if pool is None or len(bucket) < len(pool):
                    pool = bucket
        if pool is None:
            pool = by_pred.get((a.pred, a.arity), [])
        out = []
        for b in pool:
            m2 = m
            for t1, t2 in zip(a.terms, b.terms):
                m2 = extend(t1, t2, m2)
                if m2 is None:
                    break
            else:
                out.append(m2)
        return out

    var_atoms: dict = {}
    for i, a in enumerate(atoms):
        for t in a.terms:
            if isinstance(t, Var):
                var_atoms.setdefault(t.name, set()).add(i)

    failed: set = set()

    def state_key(remaining: frozenset, m: dict):
        seen = {t.name for i in remaining for t in atoms[i].terms
                if isinstance(t, Var)}
        return (remaining,
                tuple(sorted((v, m[v]) for v in seen if v in m)))

    def search(remaining: frozenset, frontier: frozenset, m: dict) -> bool:
        if not remaining:
            return True
        # pick the most constrained atom among those touching bound
        # variables; this keeps chain-shaped bodies tractable
        pick_from = frontier or (next(iter(remaining)),)
        best_i, best_cands = None, None
        for i in pick_from:
            cands = candidates(atoms[i], m)
            if not cands:
                return False
            if best_cands is None or len(cands) < len(best_cands):
                best_i, best_cands = i, cands
                if len(cands) == 1:
                    break
        branching = len(best_cands) > 1
        if branching:
            # memoize failed states only where the search actually forks
            key = state_key(remaining, m)
            if key in failed:
                return False
        rest = remaining - {best_i}
        for m2 in best_cands:
            grown = frozenset(
                j for v in m2.keys() - m.keys()
                for j in var_atoms.get(v, ()) if j in rest)
            if search(rest, (frontier | grown) - {best_i}, m2):
                return True
        if branching:
            failed.add(key)
        return False

    start = frozenset(range(len(atoms)))
    init_frontier = frozenset(
        i for v in mapping for i in var_atoms.get(v, ()))
    return search(start, init_frontier, mapping)
