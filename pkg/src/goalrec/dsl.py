"""Textual DSL for goal models: parser with line/column errors and a canonical serializer.

Grammar sketch:

    actor <id> "<name>" {
      (goal|task|resource) <id> "<name>" [temp] ie { <alt-conditions> };
      (and|or) <parent> -> <child>(, <child>)*;
    }
    depends <actor>.<id> -> <actor>.<id>;

Negation is `!atom`. An `ie` block whose members are all brace groups is a
disjunction of conjunctive sets; a flat literal list is a single set; a brace
group inside a flat list is an embedded disjunction and distributes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .conditions import AltConditions, Literal, condition_set_text, literal_text
from .model import (
    Actor,
    Artefact,
    DecompositionLink,
    DependencyLink,
    GoalModel,
    build_model,
)

__all__ = ["parse_model", "serialize_model", "model_revision", "ParseError"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_KEYWORDS = {"actor", "goal", "task", "resource", "and", "or", "depends", "ie", "temp"}
_PUNCT = ("->", "{", "}", ",", ";", ".", "!")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "ident" | "string" | punctuation literal | "eof"
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            out = []
            while i < n and text[i] != '"':
                if text[i] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                if text[i] == "\\" and i + 1 < n:
                    i += 1
                    col += 1
                out.append(text[i])
                i += 1
                col += 1
            if i >= n:
                raise ParseError("unterminated string", start_line, start_col)
            i += 1
            col += 1
            tokens.append(_Token("string", "".join(out), start_line, start_col))
            continue
        two = text[i : i + 2]
        if two == "->":
            tokens.append(_Token("->", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "{},;.!":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.actors: list[Actor] = []
        self.artefacts: list[Artefact] = []
        self.links: list[DecompositionLink] = []
        self.deps: list[DependencyLink] = []
        self.seen_ids: dict[str, str] = {}  # artefact id -> actor id
        self.link_parents: dict[str, str] = {}  # parent id -> link kind
        self.link_pos: list[tuple[int, int]] = []
        self.dep_pos: list[tuple[int, int]] = []

    # -- token helpers

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> "ParseError":
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.fail(f"expected {kind!r}, got {tok.value or tok.kind!r}", tok)
        return tok

    def expect_ident(self, what: str = "identifier") -> _Token:
        tok = self.next()
        if tok.kind != "ident":
            raise self.fail(f"expected {what}, got {tok.value or tok.kind!r}", tok)
        return tok

    # -- grammar

    def parse(self) -> GoalModel:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "ident" and tok.value == "actor":
                self.actor_block()
            elif tok.kind == "ident" and tok.value == "depends":
                self.depends_stmt()
            else:
                raise self.fail("expected 'actor' or 'depends'")
        model = build_model(self.actors, self.artefacts, self.links, self.deps)
        self.check_references(model)
        return model

    def actor_block(self) -> None:
        self.next()  # actor
        ident = self.expect_ident("actor id")
        if any(a.id == ident.value for a in self.actors):
            raise self.fail(f"duplicate actor id {ident.value!r}", ident)
        name = self.expect("string")
        self.expect("{")
        members: list[str] = []
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.next()
                break
            if tok.kind != "ident":
                raise self.fail("expected artefact or link declaration", tok)
            if tok.value in ("goal", "task", "resource"):
                members.append(self.artefact_stmt(ident.value))
            elif tok.value in ("and", "or"):
                self.link_stmt()
            else:
                raise self.fail(f"unexpected {tok.value!r} in actor block", tok)
        self.actors.append(Actor(ident.value, name.value, tuple(members)))

    def artefact_stmt(self, actor_id: str) -> str:
        kind = self.next().value
        ident = self.expect_ident("artefact id")
        if ident.value in self.seen_ids:
            raise self.fail(f"duplicate id {ident.value!r}", ident)
        name = self.expect("string")
        temp = False
        if self.peek().kind == "ident" and self.peek().value == "temp":
            self.next()
            temp = True
        ie_kw = self.expect_ident("'ie'")
        if ie_kw.value != "ie":
            raise self.fail("expected 'ie'", ie_kw)
        self.expect("{")
        ie = self.alt_conditions()
        self.expect(";")
        self.seen_ids[ident.value] = actor_id
        self.artefacts.append(Artefact(ident.value, kind, name.value, actor_id, ie, temp))
        return ident.value

    def alt_conditions(self) -> AltConditions:
        """Parse the items of a (already opened) brace block up to its '}'."""
        items: list[Literal | list] = []
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.next()
                break
            items.append(self.condition_item())
            if self.peek().kind == ",":
                self.next()
            elif self.peek().kind != "}":
                raise self.fail("expected ',' or '}' in conditions")
        return AltConditions.of(_evaluate_items(items))

    def condition_item(self) -> "Literal | list":
        tok = self.peek()
        if tok.kind == "{":
            self.next()
            inner: list = []
            while True:
                if self.peek().kind == "}":
                    self.next()
                    break
                inner.append(self.condition_item())
                if self.peek().kind == ",":
                    self.next()
                elif self.peek().kind != "}":
                    raise self.fail("expected ',' or '}' in conditions")
            return inner
        return self.literal()

    def literal(self) -> Literal:
        positive = True
        if self.peek().kind == "!":
            self.next()
            positive = False
        tok = self.expect_ident("atom")
        if tok.value in _KEYWORDS:
            raise self.fail(f"keyword {tok.value!r} cannot be an atom", tok)
        return Literal(tok.value, positive)

    def link_stmt(self) -> None:
        kind_tok = self.next()
        parent = self.expect_ident("parent id")
        if parent.value in self.link_parents:
            prior = self.link_parents[parent.value]
            if prior != kind_tok.value:
                raise self.fail(f"mixed decomposition kinds under {parent.value}", kind_tok)
            raise self.fail(f"duplicate decomposition link under {parent.value}", kind_tok)
        self.expect("->")
        children = [self.expect_ident("child id").value]
        while self.peek().kind == ",":
            self.next()
            children.append(self.expect_ident("child id").value)
        self.expect(";")
        if len(set(children)) != len(children):
            raise self.fail(f"duplicate child under {parent.value}", kind_tok)
        self.link_parents[parent.value] = kind_tok.value
        self.links.append(DecompositionLink(parent.value, kind_tok.value, tuple(children)))
        self.link_pos.append((kind_tok.line, kind_tok.column))

    def depends_stmt(self) -> None:
        kw = self.next()  # depends
        depender = self.endpoint()
        self.expect("->")
        dependee = self.endpoint()
        self.expect(";")
        self.deps.append(DependencyLink(depender, dependee))
        self.dep_pos.append((kw.line, kw.column))

    def endpoint(self) -> tuple[str, str]:
        actor = self.expect_ident("actor id")
        self.expect(".")
        artefact = self.expect_ident("artefact id")
        return (actor.value, artefact.value)

    def check_references(self, model: GoalModel) -> None:
        known = set(model.artefacts)
        for link, (line, col) in zip(model.decompositions, self.link_pos):
            for ref in (link.parent, *link.children):
                if ref not in known:
                    raise ParseError(f"unknown id {ref!r} in link", line, col)
        for dep, (line, col) in zip(model.dependencies, self.dep_pos):
            for actor_id, artefact_id in (dep.depender, dep.dependee):
                if artefact_id not in known:
                    raise ParseError(f"unknown id {artefact_id!r} in dependency", line, col)
                if model.artefacts[artefact_id].actor != actor_id:
                    raise ParseError(
                        f"artefact {artefact_id!r} is not in actor {actor_id!r}", line, col
                    )


def _evaluate_items(items: list) -> list[frozenset]:
    """Evaluate parsed ie items into a disjunction of conjunctive literal sets.

    All-literal lists are one conjunctive set; all-group lists are a
    disjunction of their groups; mixed lists are conjunctions whose group
    members distribute as embedded disjunctions.
    """
    if not items:
        return [frozenset()]
    if all(isinstance(i, Literal) for i in items):
        return [frozenset(items)]
    if all(isinstance(i, list) for i in items):
        out: list[frozenset] = []
        for group in items:
            for alt in _evaluate_items(group):
                if alt not in out:
                    out.append(alt)
        return out
    # mixed: conjunction with embedded disjunctions
    combos: list[frozenset] = [frozenset()]
    for item in items:
        options = [frozenset({item})] if isinstance(item, Literal) else _evaluate_items(item)
        combos = [base | opt for base in combos for opt in options]
    deduped: list[frozenset] = []
    for c in combos:
        if c not in deduped:
            deduped.append(c)
    return deduped


def parse_model(text: str) -> GoalModel:
    """Parse DSL source into a GoalModel. Deterministic; raises ParseError."""
    return _Parser(text).parse()


def _ie_text(ie: AltConditions) -> str:
    def set_body(s: frozenset) -> str:
        return ", ".join(
            literal_text(l) for l in sorted(s, key=lambda x: (x.atom, not x.positive))
        )

    if ie.is_singleton():
        return "{ " + set_body(ie.alternatives[0]) + " }" if ie.alternatives[0] else "{ }"
    return "{ " + ", ".join("{" + set_body(a) + "}" for a in ie.alternatives) + " }"


def serialize_model(model: GoalModel) -> str:
    """Canonical DSL text: actors and artefacts sorted by id, byte-stable."""
    lines: list[str] = []
    for actor in sorted(model.actors, key=lambda a: a.id):
        lines.append(f'actor {actor.id} "{_escape(actor.name)}" {{')
        member_ids = sorted(actor.artefacts)
        for aid in member_ids:
            art = model.artefacts[aid]
            tempmark = " temp" if art.temp else ""
            lines.append(
                f'  {art.kind} {art.id} "{_escape(art.name)}"{tempmark} ie {_ie_text(art.ie)};'
            )
        member_set = set(member_ids)
        for link in sorted(model.decompositions, key=lambda l: l.parent):
            if link.parent in member_set:
                lines.append(f"  {link.kind} {link.parent} -> {', '.join(link.children)};")
        lines.append("}")
    for dep in sorted(model.dependencies, key=lambda d: (d.depender[0], d.depender[1])):
        lines.append(
            f"depends {dep.depender[0]}.{dep.depender[1]} -> {dep.dependee[0]}.{dep.dependee[1]};"
        )
    return "\n".join(lines) + "\n"


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def model_revision(model: GoalModel) -> str:
    """Content hash of the canonical serialization; the revision token."""
    return hashlib.sha256(serialize_model(model).encode("utf-8")).hexdigest()
