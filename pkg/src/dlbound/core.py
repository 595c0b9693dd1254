"""Datalog AST, textual dialect parser, pretty-printer, and program validation.

Dialect: identifiers starting with an uppercase letter are variables,
lowercase identifiers are predicate symbols or symbol constants, integers
are constants, `_` is a wildcard (only in rule bodies), rules end with `.`,
`:-` separates head and body, `%` begins a line comment.
"""

from __future__ import annotations

from dataclasses import dataclass


class DatalogError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DatalogError):
    """Syntax error with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ValidationError(DatalogError):
    """Semantic error: unsafe rule, arity clash, bad schema."""


# Variables created internally (desugared wildcards, canonical existentials)
# carry this prefix; the surface syntax cannot produce such names.
INTERNAL_PREFIX = "_"


@dataclass(frozen=True)
class Var:
    """A variable term."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """A constant term: lowercase symbol or integer."""
    value: object

    def __str__(self) -> str:
        return str(self.value)


Term = Var | Const


def is_internal_var(t: Term) -> bool:
    """True for variables introduced internally (wildcard desugaring etc.)."""
    return isinstance(t, Var) and t.name.startswith(INTERNAL_PREFIX)


@dataclass(frozen=True)
class Atom:
    """A predicate applied to a tuple of terms."""
    pred: str
    terms: tuple

    @property
    def arity(self) -> int:
        return len(self.terms)

    def vars(self) -> list:
        """Variable names in order of first occurrence."""
        seen = []
        for t in self.terms:
            if isinstance(t, Var) and t.name not in seen:
                seen.append(t.name)
        return seen

    def __str__(self) -> str:
        return format_atom(self)


@dataclass(frozen=True)
class Rule:
    """A safe rule: head atom and a non-empty body."""
    head: Atom
    body: tuple

    def head_vars(self) -> list:
        return self.head.vars()

    def body_vars(self) -> list:
        seen = []
        for a in self.body:
            for v in a.vars():
                if v not in seen:
                    seen.append(v)
        return seen

    def all_vars(self) -> list:
        seen = self.head.vars()
        for v in self.body_vars():
            if v not in seen:
                seen.append(v)
        return seen

    def var_occurrences(self) -> dict:
        """Total occurrence count per variable name across head and body."""
        counts: dict = {}
        for atom in (self.head, *self.body):
            for t in atom.terms:
                if isinstance(t, Var):
                    counts[t.name] = counts.get(t.name, 0) + 1
        return counts

    def __str__(self) -> str:
        return format_rule(self)


@dataclass(frozen=True)
class Program:
    """A validated datalog program with its IDB/EDB partition."""
    rules: tuple
    idb: frozenset
    edb: frozenset

    @classmethod
    def from_rules(cls, rules) -> "Program":
        rules = tuple(rules)
        if not rules:
            raise ValidationError("a program must contain at least one rule")
        idb = frozenset(r.head.pred for r in rules)
        preds: set = set()
        for r in rules:
            for a in (r.head, *r.body):
                preds.add(a.pred)
        edb = frozenset(preds - idb)
        prog = cls(rules=rules, idb=idb, edb=edb)
        prog.validate()
        return prog

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    @property
    def term_count(self) -> int:
        """Total number of term occurrences across all atoms of all rules."""
        return sum(
            len(a.terms) for r in self.rules for a in (r.head, *r.body)
        )

    def arities(self) -> dict:
        out: dict = {}
        for r in self.rules:
            for a in (r.head, *r.body):
                out.setdefault(a.pred, a.arity)
        return out

    def validate(self) -> None:
        if self.idb & self.edb:
            raise ValidationError(
                f"predicates both derived and extensional: {sorted(self.idb & self.edb)}"
            )
        arities: dict = {}
        for r in self.rules:
            if not r.body:
                raise ValidationError(
                    f"rule for {r.head.pred} has an empty body; "
                    "ground facts belong in EDB files"
                )
            for a in (r.head, *r.body):
                known = arities.setdefault(a.pred, a.arity)
                if known != a.arity:
                    raise ValidationError(
                        f"predicate {a.pred} used with arities {known} and {a.arity}"
                    )
            for t in r.head.terms:
                if is_internal_var(t):
                    raise ValidationError(
                        f"wildcard in head of rule for {r.head.pred}"
                    )
            bv = set(r.body_vars())
            for v in r.head_vars():
                if v not in bv:
                    raise ValidationError(
                        f"unsafe rule for {r.head.pred}: head variable {v} "
                        "does not appear in the body"
                    )

    def __str__(self) -> str:
        return print_program(self)


def classify_rule_atoms(r: Rule, p: Program):
    """Partition r's body into (idb atoms, edb atoms), preserving order."""
    known = p.idb | p.edb
    for a in (r.head, *r.body):
        if a.pred not in known:
            raise ValidationError(f"unknown predicate {a.pred}")
    idb_atoms = [a for a in r.body if a.pred in p.idb]
    edb_atoms = [a for a in r.body if a.pred in p.edb]
    return idb_atoms, edb_atoms


# ---------------------------------------------------------------------------
# Parsing


_PUNCT = {":-": "ARROW", "(": "LPAR", ")": "RPAR", ",": "COMMA", ".": "DOT",
          "_": "WILD"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith(":-", i):
            tokens.append(_Token("ARROW", ":-", line, col))
            i += 2
            col += 2
            continue
        if c in "(),.":
            tokens.append(_Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if c == "_" and (i + 1 >= n or not (text[i + 1].isalnum() or text[i + 1] == "_")):
            tokens.append(_Token("WILD", "_", line, col))
            i += 1
            col += 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            kind = "VAR" if c.isupper() else "IDENT"
            tokens.append(_Token(kind, text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.fresh = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def expect(self, kind: str) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind}, found {tok.text or 'end of input'!r}",
                tok.line, tok.col,
            )
        self.pos += 1
        return tok

    def fresh_wildcard(self) -> Var:
        self.fresh += 1
        return Var(f"{INTERNAL_PREFIX}w{self.fresh}")

    def term(self, allow_wildcard: bool) -> Term:
        tok = self.peek()
        if tok.kind == "VAR":
            self.pos += 1
            return Var(tok.text)
        if tok.kind == "IDENT":
            self.pos += 1
            return Const(tok.text)
        if tok.kind == "INT":
            self.pos += 1
            return Const(int(tok.text))
        if tok.kind == "WILD":
            if not allow_wildcard:
                raise ParseError("wildcard not allowed in rule head",
                                 tok.line, tok.col)
            self.pos += 1
            return self.fresh_wildcard()
        raise ParseError(f"expected a term, found {tok.text!r}",
                         tok.line, tok.col)

    def atom(self, allow_wildcard: bool) -> Atom:
        name = self.expect("IDENT")
        self.expect("LPAR")
        terms = [self.term(allow_wildcard)]
        while self.peek().kind == "COMMA":
            self.pos += 1
            terms.append(self.term(allow_wildcard))
        self.expect("RPAR")
        return Atom(name.text, tuple(terms))

    def rule(self) -> Rule:
        head = self.atom(allow_wildcard=False)
        tok = self.peek()
        if tok.kind == "DOT":
            raise ParseError(
                "facts are not allowed in program text; use an EDB file",
                tok.line, tok.col,
            )
        self.expect("ARROW")
        body = [self.atom(allow_wildcard=True)]
        while self.peek().kind == "COMMA":
            self.pos += 1
            body.append(self.atom(allow_wildcard=True))
        self.expect("DOT")
        return Rule(head, tuple(body))

    def program(self) -> Program:
        rules = []
        while self.peek().kind != "EOF":
            rules.append(self.rule())
        if not rules:
            tok = self.peek()
            raise ParseError("empty program", tok.line, tok.col)
        return Program.from_rules(rules)


def parse_program(text: str) -> Program:
    """Parse and validate a program in the textual dialect."""
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# Printing


def _display_names(rule: Rule) -> dict:
    """Map variable names to display strings, sugaring singletons to `_`.

    Internal variables that occur exactly once print as `_`; internal
    variables with several occurrences get a fresh uppercase name.
    """
    counts = rule.var_occurrences()
    used = {v for v in counts if not v.startswith(INTERNAL_PREFIX)}
    names: dict = {}
    gen = 0
    for v in rule.all_vars():
        if not v.startswith(INTERNAL_PREFIX):
            names[v] = v
        elif counts.get(v, 0) <= 1:
            names[v] = "_"
        else:
            while f"U{gen}" in used:
                gen += 1
            names[v] = f"U{gen}"
            used.add(f"U{gen}")
            gen += 1
    return names


def format_term(t: Term, names: dict | None = None) -> str:
    if isinstance(t, Var):
        if names is not None:
            return names.get(t.name, t.name)
        return t.name
    return str(t.value)


def format_atom(a: Atom, names: dict | None = None) -> str:
    args = ",".join(format_term(t, names) for t in a.terms)
    return f"{a.pred}({args})"


def format_rule(r: Rule, terminator: str = ".") -> str:
    names = _display_names(r)
    head = format_atom(r.head, names)
    body = ", ".join(format_atom(a, names) for a in r.body)
    return f"{head} :- {body}{terminator}"


def print_program(p) -> str:
    """Render a Program (or anything exposing .pretty()) deterministically."""
    if isinstance(p, Program):
        if not p.rules:
            raise ValidationError("cannot print an empty program")
        return "\n".join(format_rule(r) for r in p.rules) + "\n"
    pretty = getattr(p, "pretty", None)
    if pretty is None:
        raise TypeError(f"cannot print object of type {type(p).__name__}")
    return pretty()
