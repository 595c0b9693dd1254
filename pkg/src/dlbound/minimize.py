"""Adornment minimization: apply the greedy minimal relaxation to every
stored adornment and merge predicates whose adornments collapse."""

from __future__ import annotations

from .adorn import (
    Adornment, AdornedAtom, AdornedPredicate, AdornedProgram, AdornedRule,
    GMin, relax,
)


def minimize_program(pi: AdornedProgram) -> AdornedProgram:
    """Minimal equivalent of pi: every adornment replaced by its greedy
    minimal cover, colliding adorned predicates merged, duplicate rules
    dropped.  Preserves the integral edge-cover width."""
    gmin = GMin()
    mapping: dict = {}
    for r in pi.rules:
        for atom in (r.head, *r.body):
            if isinstance(atom, AdornedAtom):
                adn = atom.apred.adornment
                if adn.key not in mapping:
                    mapping[adn.key] = relax(gmin, adn.rule)

    def rewrite(atom):
        if isinstance(atom, AdornedAtom):
            apred = AdornedPredicate(atom.pred,
                                     mapping[atom.apred.adornment.key])
            return AdornedAtom(apred, atom.terms)
        return atom

    new_rules = []
    keys = set()
    for r in pi.rules:
        nr = AdornedRule(rewrite(r.head), tuple(rewrite(a) for a in r.body))
        key = nr.canonical()
        if key in keys:
            continue
        keys.add(key)
        new_rules.append(nr)
    new_rules.sort(key=lambda r: r.canonical())
    return AdornedProgram(rules=tuple(new_rules), source=pi.source)


def _adornment_minimal(adn: Adornment) -> bool:
    rule = adn.rule
    head_vars = set(rule.head_vars())
    counts: dict = {}
    for a in rule.body:
        atom_vars = set()
        for t in a.terms:
            name = getattr(t, "name", None)
            if name in head_vars:
                counts[name] = counts.get(name, 0) + 1
                atom_vars.add(name)
        if not atom_vars:
            return False  # an all-wildcard atom restricts nothing
    return all(c == 1 for c in counts.values()) and \
        set(counts) == head_vars if head_vars else True


def is_minimal(pi: AdornedProgram) -> bool:
    """True iff every head variable of every adornment occurs in exactly
    one body position and no body atom is all wildcards."""
    adns = {r.head.apred.adornment.key: r.head.apred.adornment
            for r in pi.rules}
    for r in pi.rules:
        for a in r.body:
            if isinstance(a, AdornedAtom):
                adns.setdefault(a.apred.adornment.key, a.apred.adornment)
    return all(_adornment_minimal(a) for a in adns.values())
