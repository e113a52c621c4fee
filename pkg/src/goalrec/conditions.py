"""Propositional satisfaction-condition algebra and the background knowledge base.

Conditions are conjunctive sets of literals; a disjunction of such sets
(AltConditions) represents the alternative ways an artefact can be satisfied.
Everything here is pure and immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "Literal",
    "ConditionSet",
    "AltConditions",
    "KnowledgeBase",
    "Rule",
    "EMPTY_KB",
    "lit",
    "negate",
    "negate_set",
    "rec",
    "entails",
    "conflict_set",
    "state_update",
    "is_consistent_set",
    "kb_consistent",
    "kb_reduce",
    "parse_kb",
    "literal_text",
    "condition_set_text",
    "alt_conditions_text",
    "literal_options",
    "covers",
    "missing_for",
    "KbParseError",
]

_ATOM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")

# Expansion option lists are truncated at this size; background KBs are tiny
# in practice and the cut is deterministic.
_MAX_OPTIONS = 256


@dataclass(frozen=True, slots=True)
class Literal:
    """An atom with a polarity."""

    atom: str
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)


ConditionSet = frozenset  # frozenset[Literal]


def lit(text: str) -> Literal:
    """Build a literal from `atom` / `!atom` notation."""
    positive = not text.startswith("!")
    atom = text[1:] if not positive else text
    if not _ATOM_RE.match(atom):
        raise ValueError(f"bad atom: {text!r}")
    return Literal(atom, positive)


def negate(l: Literal) -> Literal:
    return l.negated()


def negate_set(s: ConditionSet) -> ConditionSet:
    """Element-wise polarity flip; an involution."""
    return frozenset(l.negated() for l in s)


def rec(ie_parent: ConditionSet, ce_child: ConditionSet) -> ConditionSet:
    """Reconcile a child's cumulative conditions against a parent's immediate ones.

    Keeps every child condition whose negation the parent does not demand:
    the result is ce_child minus the negations of ie_parent.
    """
    return frozenset(l for l in ce_child if l.negated() not in ie_parent)


def entails(superset_candidate: ConditionSet, required: ConditionSet) -> bool:
    return required <= superset_candidate


def conflict_set(ie_parent: ConditionSet, ce_child: ConditionSet) -> ConditionSet:
    """Child conditions whose negation the parent demands; empty iff mutually consistent."""
    return frozenset(l for l in ce_child if l.negated() in ie_parent)


def state_update(s: ConditionSet, event_ce: ConditionSet) -> ConditionSet:
    """Overwrite conflicting literals with the event's, keep the rest."""
    return frozenset(l for l in s if l.negated() not in event_ce) | event_ce


def is_consistent_set(s: ConditionSet) -> bool:
    """No atom appears with both polarities."""
    return all(l.negated() not in s for l in s)


def _literal_key(l: Literal) -> tuple[str, int]:
    return (l.atom, 0 if l.positive else 1)


def literal_text(l: Literal) -> str:
    return l.atom if l.positive else "!" + l.atom


def condition_set_text(s: ConditionSet) -> str:
    return "{" + ", ".join(literal_text(l) for l in sorted(s, key=_literal_key)) + "}"


@dataclass(frozen=True, slots=True)
class AltConditions:
    """A non-empty disjunction of conjunctive literal sets, order preserving."""

    alternatives: tuple[ConditionSet, ...]

    def __post_init__(self) -> None:
        if not self.alternatives:
            raise ValueError("AltConditions needs at least one alternative")

    @staticmethod
    def of(alts: Iterable[ConditionSet]) -> "AltConditions":
        seen: list[ConditionSet] = []
        for a in alts:
            a = frozenset(a)
            if a not in seen:
                seen.append(a)
        return AltConditions(tuple(seen))

    @staticmethod
    def single(s: Iterable[Literal]) -> "AltConditions":
        return AltConditions((frozenset(s),))

    def __iter__(self) -> Iterator[ConditionSet]:
        return iter(self.alternatives)

    def __len__(self) -> int:
        return len(self.alternatives)

    def is_singleton(self) -> bool:
        return len(self.alternatives) == 1


def alt_conditions_text(alts: AltConditions) -> str:
    return " | ".join(condition_set_text(a) for a in alts)


@dataclass(frozen=True, slots=True)
class Rule:
    """head -> body, body held as DNF: a tuple of atom conjunctions."""

    head: str
    disjuncts: tuple[frozenset, ...]  # frozenset[str] each
    source: str = ""


@dataclass(frozen=True, slots=True)
class KnowledgeBase:
    rules: tuple[Rule, ...] = ()
    mutexes: frozenset = frozenset()  # frozenset[frozenset[str]] of size-2 pairs

    def rules_for(self, atom: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.head == atom)

    def atoms(self) -> frozenset:
        out: set[str] = set()
        for r in self.rules:
            out.add(r.head)
            for d in r.disjuncts:
                out |= d
        for pair in self.mutexes:
            out |= pair
        return frozenset(out)


EMPTY_KB = KnowledgeBase()


def kb_consistent(s: ConditionSet, kb: KnowledgeBase = EMPTY_KB) -> bool:
    """False iff s carries both polarities of an atom or both atoms of a mutex pair."""
    if not is_consistent_set(s):
        return False
    atoms = {l.atom for l in s if l.positive}
    return not any(pair <= atoms for pair in kb.mutexes)


def kb_reduce(alts: AltConditions, kb: KnowledgeBase) -> AltConditions:
    """Drop redundant rule heads from each alternative, to fixpoint.

    A head is redundant when some disjunct of its body is satisfied by the
    alternative's remaining positive atoms. Rules apply in file order, cycling
    until nothing changes, so the fixpoint is deterministic.
    """
    if not kb.rules:
        return alts

    def reduce_one(s: ConditionSet) -> ConditionSet:
        lits = set(s)
        changed = True
        while changed:
            changed = False
            for rule in kb.rules:
                head = Literal(rule.head, True)
                if head not in lits:
                    continue
                rest = {l.atom for l in lits if l.positive and l != head}
                if any(d <= rest for d in rule.disjuncts):
                    lits.discard(head)
                    changed = True
        return frozenset(lits)

    return AltConditions.of(reduce_one(a) for a in alts)


def literal_options(l: Literal, kb: KnowledgeBase) -> tuple[ConditionSet, ...]:
    """Ways a single required literal can be supplied.

    The literal itself always counts; a positive literal that heads a rule may
    instead be supplied by any DNF disjunct of the body, expanded recursively.
    This is the coverage-side dual of kb_reduce's head dropping.
    """
    return _options(l, kb, frozenset())


def _options(l: Literal, kb: KnowledgeBase, busy: frozenset) -> tuple[ConditionSet, ...]:
    out: list[ConditionSet] = [frozenset({l})]
    if l.positive and l.atom not in busy:
        inner = busy | {l.atom}
        for rule in kb.rules_for(l.atom):
            for disjunct in rule.disjuncts:
                for combo in _conj_options(sorted(disjunct), kb, inner):
                    if combo not in out:
                        out.append(combo)
                    if len(out) >= _MAX_OPTIONS:
                        return tuple(out)
    return tuple(out)


def _conj_options(atoms: list, kb: KnowledgeBase, busy: frozenset) -> list[ConditionSet]:
    combos: list[ConditionSet] = [frozenset()]
    for atom in atoms:
        opts = _options(Literal(atom, True), kb, busy)
        nxt: list[ConditionSet] = []
        for base in combos:
            for o in opts:
                merged = base | o
                if merged not in nxt:
                    nxt.append(merged)
                if len(nxt) >= _MAX_OPTIONS:
                    break
            if len(nxt) >= _MAX_OPTIONS:
                break
        combos = nxt
    return combos


def covers(ie_alt: ConditionSet, ce_alt: ConditionSet, kb: KnowledgeBase = EMPTY_KB) -> bool:
    """True when every required literal is supplied by ce_alt, KB-aware."""
    return all(
        any(o <= ce_alt for o in literal_options(l, kb)) for l in ie_alt
    )


def missing_for(ie_alt: ConditionSet, ce_alt: ConditionSet, kb: KnowledgeBase = EMPTY_KB) -> ConditionSet:
    """Literals still missing from ce_alt after the best KB expansion of each requirement.

    For an uncovered requirement the option with the largest overlap with
    ce_alt wins (then the smallest remainder, then declaration order), so a
    rule head whose body is nearly satisfied reports the body's gap rather
    than the head itself.
    """
    gap: set[Literal] = set()
    for l in sorted(ie_alt, key=_literal_key):
        options = literal_options(l, kb)
        if any(o <= ce_alt for o in options):
            continue
        best = min(
            range(len(options)),
            key=lambda i: (-len(options[i] & ce_alt), len(options[i] - ce_alt), i),
        )
        gap |= options[best] - ce_alt
    return frozenset(gap)


class KbParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class _ExprParser:
    """Recursive-descent parser for rule bodies: atoms, &, |, parentheses."""

    def __init__(self, tokens: list[str], line: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise KbParseError("unexpected end of rule body", self.line)
        self.pos += 1
        return tok

    def parse(self) -> tuple[frozenset, ...]:
        dnf = self.or_expr()
        if self.peek() is not None:
            raise KbParseError(f"unexpected token {self.peek()!r}", self.line)
        return dnf

    def or_expr(self) -> tuple[frozenset, ...]:
        out = list(self.and_expr())
        while self.peek() == "|":
            self.take()
            for d in self.and_expr():
                if d not in out:
                    out.append(d)
        return tuple(out)

    def and_expr(self) -> tuple[frozenset, ...]:
        out = self.atom_expr()
        while self.peek() == "&":
            self.take()
            rhs = self.atom_expr()
            out = tuple(a | b for a in out for b in rhs)
        return out

    def atom_expr(self) -> tuple[frozenset, ...]:
        tok = self.take()
        if tok == "(":
            inner = self.or_expr()
            if self.take() != ")":
                raise KbParseError("missing ')'", self.line)
            return inner
        if not _ATOM_RE.match(tok):
            raise KbParseError(f"expected atom, got {tok!r}", self.line)
        return (frozenset({tok}),)


_KB_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|->|[()&|;]|\S")


def parse_kb(text: str) -> KnowledgeBase:
    """Load a knowledge base: `rule <atom> -> <expr>;` and `mutex <a> <b>;` lines."""
    rules: list[Rule] = []
    mutexes: set[frozenset] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for stmt in filter(None, (p.strip() for p in line.split(";"))):
            words = stmt.split(None, 1)
            if words[0] == "rule":
                if len(words) < 2 or "->" not in words[1]:
                    raise KbParseError("rule needs `<atom> -> <expr>`", lineno)
                head_txt, body_txt = words[1].split("->", 1)
                head = head_txt.strip()
                if not _ATOM_RE.match(head):
                    raise KbParseError(f"bad rule head {head!r}", lineno)
                tokens = _KB_TOKEN.findall(body_txt)
                disjuncts = _ExprParser(tokens, lineno).parse()
                rules.append(Rule(head, disjuncts, stmt))
            elif words[0] == "mutex":
                parts = words[1].split() if len(words) > 1 else []
                if len(parts) != 2 or not all(_ATOM_RE.match(p) for p in parts):
                    raise KbParseError("mutex needs exactly two atoms", lineno)
                if parts[0] == parts[1]:
                    raise KbParseError("mutex atoms must differ", lineno)
                mutexes.add(frozenset(parts))
            else:
                raise KbParseError(f"unknown statement {words[0]!r}", lineno)
    return KnowledgeBase(tuple(rules), frozenset(mutexes))
