"""Bottom-up satisfaction reconciliation with conflict detection.

Cumulative conditions are recomputed from immediate annotations on every run:
leaves resolve dependency chains, interior nodes merge children through the
AND/OR reconciliation operators, and the knowledge base reduces each node's
result. Entailment and consistency are checked at every node.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import reduce
from typing import Mapping

from .conditions import (
    EMPTY_KB,
    AltConditions,
    ConditionSet,
    KnowledgeBase,
    conflict_set,
    covers,
    is_consistent_set,
    kb_reduce,
    missing_for,
    rec,
    state_update,
)
from .model import GoalModel, ModelError, validate_model
from .orgmod import DEFAULT_CAP, CapExceeded, AndNode, ChoiceNode, LabelNode, SeqNode

__all__ = [
    "AnnotatedModel",
    "ConflictReport",
    "Finding",
    "and_rec",
    "or_rec",
    "dep_rec",
    "check_commutativity",
    "detect_entailment",
    "detect_consistency",
    "minimality_rank",
    "run_sra",
    "KIND_ENTAILMENT",
    "KIND_HIERARCHIC",
    "KIND_SIBLING",
]

KIND_ENTAILMENT = "entailment"
KIND_HIERARCHIC = "hierarchic"
KIND_SIBLING = "sibling"


@dataclass(frozen=True, slots=True)
class Finding:
    id: str
    kind: str
    at: str
    alt_indices: tuple[int, ...] = ()
    children: tuple[str, ...] = ()
    conflicting: ConditionSet = frozenset()
    missing: tuple[tuple[int, ConditionSet], ...] = ()
    availability: tuple[tuple[int, ...], ...] = ()
    pairs: tuple[tuple[str, str], ...] = ()  # (child id, literal text) for siblings
    note: str = ""


@dataclass(frozen=True, slots=True)
class ConflictReport:
    findings: tuple[Finding, ...] = ()
    warnings: tuple[str, ...] = ()

    def is_clean(self) -> bool:
        return not self.findings

    def of_kind(self, kind: str) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.kind == kind)

    def find(self, finding_id: str) -> Finding | None:
        for f in self.findings:
            if f.id == finding_id:
                return f
        return None


@dataclass(frozen=True)
class AnnotatedModel:
    base: GoalModel
    root: str
    ce: Mapping[str, AltConditions]
    provenance: Mapping[str, tuple[str | None, ...]]
    scope: LabelNode | None = None


def _lit_key(l) -> tuple[str, bool]:
    return (l.atom, not l.positive)


def condition_key(s: ConditionSet) -> tuple:
    return tuple(sorted((l.atom, not l.positive) for l in s))


# -- reconciliation operators ------------------------------------------------


def and_rec(ie_parent: ConditionSet, child_ces: list[AltConditions]) -> AltConditions:
    """Union of per-child reconciliations, distributed over child alternatives."""
    alts: list[ConditionSet] = []
    for combo in itertools.product(*(c.alternatives for c in child_ces)):
        merged: ConditionSet = frozenset()
        for part in combo:
            merged |= rec(ie_parent, part)
        if merged not in alts:
            alts.append(merged)
    return AltConditions.of(alts or [frozenset()])


def or_rec(ie_parent: ConditionSet, child_ces: list[AltConditions]) -> AltConditions:
    """One reconciled alternative per child alternative, child order first."""
    alts: list[ConditionSet] = []
    for child in child_ces:
        for alt in child.alternatives:
            merged = rec(ie_parent, alt)
            if merged not in alts:
                alts.append(merged)
    return AltConditions.of(alts)


def dep_rec(model: GoalModel, leaf: str) -> AltConditions:
    """Cumulative conditions of a leaf through its dependency chain.

    An independent leaf keeps its immediate conditions; a depender folds the
    dependee's cumulative conditions under its own (the depender's conditions
    win polarity clashes). Dependency cycles are a hard error.
    """
    alts, _ = _dep_rec_traced(model, leaf)
    return alts


def _dep_rec_traced(
    model: GoalModel, leaf: str, _stack: tuple[str, ...] = ()
) -> tuple[AltConditions, list[tuple[str, str, ConditionSet]]]:
    art = model.artefact(leaf)
    if leaf in _stack:
        cycle = _stack[_stack.index(leaf):] + (leaf,)
        raise ModelError("dependency cycle: " + ",".join(cycle))
    dep = model.dependency_of(leaf)
    if dep is None:
        return art.ie, []
    dependee = dep.dependee[1]
    dee_alts, conflicts = _dep_rec_traced(model, dependee, _stack + (leaf,))
    clash: set = set()
    merged: list[ConditionSet] = []
    for ie_alt in art.ie.alternatives:
        for dee_alt in dee_alts.alternatives:
            clash |= conflict_set(ie_alt, dee_alt)
            out = state_update(dee_alt, ie_alt)
            if out not in merged:
                merged.append(out)
    if clash:
        conflicts = conflicts + [(leaf, dependee, frozenset(clash))]
    return AltConditions.of(merged), conflicts


def check_commutativity(sibling_ces: list[ConditionSet]) -> bool:
    """True iff state updates commute across the siblings.

    Exhaustive over all orders up to six siblings, pairwise beyond that.
    """
    if len(sibling_ces) <= 1:
        return True
    if len(sibling_ces) <= 6:
        results = {
            reduce(state_update, perm, frozenset())
            for perm in itertools.permutations(sibling_ces)
        }
        return len(results) == 1
    for a, b in itertools.combinations(sibling_ces, 2):
        ab = state_update(state_update(frozenset(), a), b)
        ba = state_update(state_update(frozenset(), b), a)
        if ab != ba:
            return False
    return True


def detect_entailment(
    ie: ConditionSet | AltConditions,
    ce: AltConditions,
    kb: KnowledgeBase = EMPTY_KB,
) -> list[int]:
    """Indices of cumulative alternatives that fail to cover the immediate conditions."""
    ie_alts = ie.alternatives if isinstance(ie, AltConditions) else (frozenset(ie),)
    return [
        i
        for i, alt in enumerate(ce.alternatives)
        if not any(covers(ie_alt, alt, kb) for ie_alt in ie_alts)
    ]


def detect_consistency(
    node: str,
    ie: ConditionSet | AltConditions,
    children: list[tuple[str, AltConditions]],
    link_kind: str = "and",
) -> list[Finding]:
    """Hierarchic and sibling conflicts among a node's direct children."""
    ie_alts = ie.alternatives if isinstance(ie, AltConditions) else (frozenset(ie),)
    findings: list[Finding] = []
    for child_id, child_ce in children:
        clash: set = set()
        for ie_alt in ie_alts:
            for alt in child_ce.alternatives:
                clash |= conflict_set(ie_alt, alt)
        if clash:
            unmet: set = set()
            for ie_alt in ie_alts:
                unmet |= {l for l in ie_alt if l.negated() in clash}
            findings.append(
                Finding(
                    id=f"{KIND_HIERARCHIC}:{node}:{child_id}",
                    kind=KIND_HIERARCHIC,
                    at=node,
                    children=(child_id,),
                    conflicting=frozenset(clash),
                    missing=((0, frozenset(unmet)),) if unmet else (),
                )
            )
    if link_kind == "and" and len(children) > 1:
        findings.extend(_sibling_findings(node, ie_alts, children))
    return findings


def _sibling_findings(
    node: str,
    ie_alts: tuple[ConditionSet, ...],
    children: list[tuple[str, AltConditions]],
) -> list[Finding]:
    in_ie: set = set()
    for ie_alt in ie_alts:
        in_ie |= ie_alt | {l.negated() for l in ie_alt}
    findings: list[Finding] = []
    seen: set[tuple[str, str, str]] = set()
    for (c1, ce1), (c2, ce2) in itertools.combinations(children, 2):
        for a1 in ce1.alternatives:
            for a2 in ce2.alternatives:
                for l in sorted(a1, key=_lit_key):
                    if l in in_ie or l.negated() not in a2:
                        continue
                    key = (c1, c2, l.atom)
                    if key in seen:
                        continue
                    seen.add(key)
                    neg = l.negated()
                    findings.append(
                        Finding(
                            id=f"{KIND_SIBLING}:{node}:{c1}:{c2}:{l.atom}",
                            kind=KIND_SIBLING,
                            at=node,
                            children=(c1, c2),
                            conflicting=frozenset({l, neg}),
                            pairs=(
                                (c1, l.atom if l.positive else "!" + l.atom),
                                (c2, neg.atom if neg.positive else "!" + neg.atom),
                            ),
                        )
                    )
    return findings


def minimality_rank(ie: ConditionSet | AltConditions, alts: AltConditions) -> list[int]:
    """Alternative indices ordered by surplus over the immediate conditions."""
    ie_alts = ie.alternatives if isinstance(ie, AltConditions) else (frozenset(ie),)

    def surplus(alt: ConditionSet) -> int:
        return min(len(alt - ie_alt) for ie_alt in ie_alts)

    return sorted(range(len(alts.alternatives)), key=lambda i: (surplus(alts.alternatives[i]), i))


# -- the reconciliation algorithm ----------------------------------------------


def _scope_selection(scope: LabelNode | None) -> dict[str, str]:
    selected: dict[str, str] = {}

    def walk(n: LabelNode) -> None:
        if isinstance(n, SeqNode):
            walk(n.next)
        elif isinstance(n, AndNode):
            for c in n.children:
                walk(c)
        elif isinstance(n, ChoiceNode):
            selected[n.artefact] = n.selected.artefact
            walk(n.selected)

    if scope is not None:
        walk(scope)
    return selected


def run_sra(
    model: GoalModel,
    root: str,
    kb: KnowledgeBase = EMPTY_KB,
    scope: LabelNode | None = None,
    cap: int = DEFAULT_CAP,
) -> tuple[AnnotatedModel, ConflictReport]:
    """Reconcile the subtree rooted at root and report every conflict found."""
    diags = validate_model(model)
    if diags:
        raise ModelError("invalid model: " + "; ".join(diags))
    model.artefact(root)
    selected = _scope_selection(scope)

    ce: dict[str, AltConditions] = {}
    provenance: dict[str, tuple[str | None, ...]] = {}
    findings: list[Finding] = []
    warnings: list[str] = []

    def reduce_with_prov(
        raw: list[tuple[ConditionSet, str | None]]
    ) -> tuple[AltConditions, tuple[str | None, ...]]:
        alts: list[ConditionSet] = []
        prov: list[str | None] = []
        for alt, src in raw:
            reduced = kb_reduce(AltConditions((alt,)), kb).alternatives[0]
            if reduced not in alts:
                alts.append(reduced)
                prov.append(src)
        return AltConditions.of(alts or [frozenset()]), tuple(prov)

    def compute(aid: str) -> AltConditions:
        if aid in ce:
            return ce[aid]
        art = model.artefact(aid)
        link = model.link_of(aid)
        if link is None:
            alts, dep_conflicts = _dep_rec_traced(model, aid)
            for depender, dependee, clash in dep_conflicts:
                fid = f"{KIND_HIERARCHIC}:{depender}:{dependee}"
                if not any(f.id == fid for f in findings):
                    findings.append(
                        Finding(
                            id=fid,
                            kind=KIND_HIERARCHIC,
                            at=depender,
                            children=(dependee,),
                            conflicting=clash,
                            note="dependency",
                        )
                    )
            alts, prov = reduce_with_prov([(a, None) for a in alts.alternatives])
            ce[aid] = alts
            provenance[aid] = prov
            return alts

        kids = list(link.children)
        is_or = link.kind == "or"
        if is_or and aid in selected and selected[aid] in kids:
            kids = [selected[aid]]
        child_ces = [(c, compute(c)) for c in kids]
        findings.extend(
            detect_consistency(aid, art.ie, child_ces, "or" if is_or else "and")
        )
        raw: list[tuple[ConditionSet, str | None]] = []
        if is_or:
            for child_id, child_ce in child_ces:
                for ie_alt in art.ie.alternatives:
                    for alt in child_ce.alternatives:
                        raw.append((rec(ie_alt, alt), child_id))
        else:
            size = len(art.ie.alternatives)
            for _, child_ce in child_ces:
                size *= len(child_ce.alternatives)
            if size > cap:
                raise CapExceeded(size, cap, aid)
            warned = False
            for ie_alt in art.ie.alternatives:
                for combo in itertools.product(*(c.alternatives for _, c in child_ces)):
                    if not warned and not check_commutativity(list(combo)):
                        warnings.append(f"state updates of {aid}'s children do not commute")
                        warned = True
                    merged: ConditionSet = frozenset()
                    for part in combo:
                        merged |= rec(ie_alt, part)
                    raw.append((merged, None))
        alts, prov = reduce_with_prov(raw)
        if len(alts.alternatives) > cap:
            raise CapExceeded(len(alts.alternatives), cap, aid)
        ce[aid] = alts
        provenance[aid] = prov
        _check_entailment(aid, art.ie, alts, prov)
        _check_mutexes(aid, alts)
        return alts

    def _check_entailment(
        aid: str,
        ie: AltConditions,
        alts: AltConditions,
        prov: tuple[str | None, ...],
    ) -> None:
        failing = detect_entailment(ie, alts, kb)
        if not failing or len(failing) != len(alts.alternatives):
            return
        missing_entries: list[tuple[int, ConditionSet]] = []
        avail_entries: list[tuple[int, ...]] = []
        children: list[str] = []
        for i, alt in enumerate(alts.alternatives):
            best = min(
                (missing_for(ie_alt, alt, kb) for ie_alt in ie.alternatives),
                key=lambda m: (len(m), condition_key(m)),
            )
            missing_entries.append((i, best))
            avail_entries.append(_availability_tuple(best, alts, i))
            if i < len(prov) and prov[i] is not None:
                children.append(prov[i])
        findings.append(
            Finding(
                id=f"{KIND_ENTAILMENT}:{aid}",
                kind=KIND_ENTAILMENT,
                at=aid,
                alt_indices=tuple(range(len(alts.alternatives))),
                children=tuple(dict.fromkeys(children)),
                missing=tuple(missing_entries),
                availability=tuple(avail_entries),
            )
        )

    def _check_mutexes(aid: str, alts: AltConditions) -> None:
        if not kb.mutexes:
            return
        link = model.link_of(aid)
        for i, alt in enumerate(alts.alternatives):
            atoms = {l.atom for l in alt if l.positive}
            for pair in sorted((p for p in kb.mutexes if p <= atoms), key=sorted):
                a1, a2 = sorted(pair)
                fid = f"{KIND_SIBLING}:{aid}:{a1}:{a2}"
                if any(f.id == fid for f in findings):
                    continue
                contributors: list[str] = []
                if link is not None:
                    for atom in (a1, a2):
                        for c in link.children:
                            if c in ce and any(
                                any(l.atom == atom and l.positive for l in a) for a in ce[c]
                            ):
                                contributors.append(c)
                                break
                pairs = ()
                if len(contributors) == 2:
                    pairs = ((contributors[0], a1), (contributors[1], a2))
                findings.append(
                    Finding(
                        id=fid,
                        kind=KIND_SIBLING,
                        at=aid,
                        alt_indices=(i,),
                        children=tuple(dict.fromkeys(contributors)),
                        pairs=pairs,
                        note="mutex",
                    )
                )

    compute(root)
    _attach_or_indices(findings, provenance)
    annotated = AnnotatedModel(model, root, ce, provenance, scope)
    return annotated, ConflictReport(tuple(findings), tuple(warnings))


def _availability_tuple(
    missing: ConditionSet, alts: AltConditions, own_index: int
) -> tuple[int, ...]:
    out: list[int] = []
    for l in sorted(missing, key=_lit_key):
        n = 0
        for r, alt in enumerate(alts.alternatives):
            if r != own_index and l in alt:
                n = r + 1
                break
        out.append(n)
    return tuple(out)


def _attach_or_indices(
    findings: list[Finding], provenance: Mapping[str, tuple[str | None, ...]]
) -> None:
    """Point hierarchic findings at the OR alternatives their child produced."""
    for i, f in enumerate(findings):
        if f.kind != KIND_HIERARCHIC or f.note == "dependency" or not f.children:
            continue
        prov = provenance.get(f.at, ())
        idx = tuple(j for j, src in enumerate(prov) if src == f.children[0])
        if idx:
            unmet = f.missing[0][1] if f.missing else frozenset()
            findings[i] = replace(
                f,
                alt_indices=idx,
                missing=tuple((j, unmet) for j in idx) if unmet else (),
            )
