"""Refactoring-plan synthesis for entailment and consistency findings, and
atomic plan application.

Plans never delete analyst-authored artefacts: they strip literals, add
temporary carrier goals, and add links. A plan records the model revision it
was computed against; applying it to any other revision is an error.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass

from .conditions import AltConditions, ConditionSet, EMPTY_KB, KnowledgeBase, lit, literal_text
from .dsl import model_revision
from .model import Artefact, GoalModel, ModelError, validate_model
from .orgmod import DEFAULT_CAP
from .reconcile import (
    AnnotatedModel,
    ConflictReport,
    Finding,
    KIND_ENTAILMENT,
    KIND_HIERARCHIC,
    KIND_SIBLING,
    run_sra,
)

__all__ = [
    "DeficiencyList",
    "deficiency",
    "availability",
    "AddTempGoal",
    "AddAndLink",
    "AddParent",
    "StripLiterals",
    "Edit",
    "RefactoringPlan",
    "StalePlanError",
    "era_resolve",
    "cra_resolve_hierarchic",
    "cra_resolve_sibling",
    "resolve_finding",
    "apply_plan",
    "plan_to_doc",
    "plan_from_doc",
]


def _lit_key(l) -> tuple[str, bool]:
    return (l.atom, not l.positive)


@dataclass(frozen=True, slots=True)
class DeficiencyList:
    """Per cumulative alternative, the immediate conditions it misses."""

    entries: tuple[tuple[int, ConditionSet], ...]


def deficiency(ie: ConditionSet, ce: AltConditions) -> DeficiencyList:
    return DeficiencyList(tuple((i, frozenset(ie) - alt) for i, alt in enumerate(ce.alternatives)))


def availability(d: DeficiencyList, ce: AltConditions) -> list[tuple[int, ...]]:
    """Per missing literal, the 1-based index of another alternative containing it, else 0."""
    out: list[tuple[int, ...]] = []
    for own, missing in d.entries:
        row: list[int] = []
        for l in sorted(missing, key=_lit_key):
            n = 0
            for r, alt in enumerate(ce.alternatives):
                if r != own and l in alt:
                    n = r + 1
                    break
            row.append(n)
        out.append(tuple(row))
    return out


# -- edits and plans -----------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AddTempGoal:
    id: str
    name: str
    actor: str
    ie: AltConditions


@dataclass(frozen=True, slots=True)
class AddAndLink:
    parent: str
    child: str


@dataclass(frozen=True, slots=True)
class AddParent:
    """Insert wrapper in place of child within under's decomposition, then
    make child the wrapper's first AND child."""

    wrapper: str
    child: str
    under: str


@dataclass(frozen=True, slots=True)
class StripLiterals:
    artefact: str
    literals: ConditionSet


Edit = AddTempGoal | AddAndLink | AddParent | StripLiterals


@dataclass(frozen=True, slots=True)
class RefactoringPlan:
    base_revision: str
    finding_id: str
    label: str
    edits: tuple[Edit, ...]

    @property
    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(plan_to_doc(self), sort_keys=True).encode("utf-8")
        ).hexdigest()


class StalePlanError(RuntimeError):
    """The model changed since the plan was synthesized."""


def _ie_doc(ie: AltConditions) -> list[list[str]]:
    return [sorted((literal_text(l) for l in alt), key=lambda t: t.lstrip("!")) for alt in ie]


def _ie_from(doc: list[list[str]]) -> AltConditions:
    return AltConditions.of(frozenset(lit(t) for t in alt) for alt in doc)


def edit_to_doc(edit: Edit) -> dict:
    if isinstance(edit, AddTempGoal):
        return {"op": "add-temp-goal", "id": edit.id, "name": edit.name,
                "actor": edit.actor, "ie": _ie_doc(edit.ie)}
    if isinstance(edit, AddAndLink):
        return {"op": "add-and-link", "parent": edit.parent, "child": edit.child}
    if isinstance(edit, AddParent):
        return {"op": "add-parent", "wrapper": edit.wrapper, "child": edit.child,
                "under": edit.under}
    return {"op": "strip-literals", "artefact": edit.artefact,
            "literals": sorted((literal_text(l) for l in edit.literals), key=lambda t: t.lstrip("!"))}


def edit_from_doc(doc: dict) -> Edit:
    op = doc.get("op")
    if op == "add-temp-goal":
        return AddTempGoal(doc["id"], doc["name"], doc["actor"], _ie_from(doc["ie"]))
    if op == "add-and-link":
        return AddAndLink(doc["parent"], doc["child"])
    if op == "add-parent":
        return AddParent(doc["wrapper"], doc["child"], doc["under"])
    if op == "strip-literals":
        return StripLiterals(doc["artefact"], frozenset(lit(t) for t in doc["literals"]))
    raise ModelError(f"unknown edit op {op!r}")


def plan_to_doc(plan: RefactoringPlan) -> dict:
    return {
        "base_revision": plan.base_revision,
        "finding": plan.finding_id,
        "label": plan.label,
        "edits": [edit_to_doc(e) for e in plan.edits],
    }


def plan_from_doc(doc: dict) -> RefactoringPlan:
    return RefactoringPlan(
        doc["base_revision"],
        doc["finding"],
        doc.get("label", ""),
        tuple(edit_from_doc(e) for e in doc["edits"]),
    )


# -- synthesis helpers ----------------------------------------------------------


_TEMP_ID = re.compile(r"^(GT|CT|TG)_(\d+)$")


class _TempIds:
    """Fresh GT_n/CT_n ids against a model plus anything already allocated."""

    def __init__(self, model: GoalModel):
        self.used = set(model.artefacts)
        self.counters: dict[str, int] = {}
        for aid in model.artefacts:
            m = _TEMP_ID.match(aid)
            if m:
                stem, n = m.group(1), int(m.group(2))
                self.counters[stem] = max(self.counters.get(stem, 0), n)

    def fresh(self, stem: str) -> str:
        while True:
            self.counters[stem] = self.counters.get(stem, 0) + 1
            candidate = f"{stem}_{self.counters[stem]}"
            if candidate not in self.used:
                self.used.add(candidate)
                return candidate


def _humanize(literals: ConditionSet) -> str:
    parts = []
    for l in sorted(literals, key=_lit_key):
        text = l.atom.replace("_", " ")
        parts.append(text if l.positive else "not " + text)
    return " and ".join(parts)


def _subtree_with_dependees(model: GoalModel, top: str) -> list[str]:
    """Artefacts under top, plus dependency-chain artefacts of its leaves."""
    out = list(model.subtree_ids(top))
    for aid in list(out):
        node = aid
        seen = set()
        while True:
            dep = model.dependency_of(node)
            if dep is None or dep.dependee[1] in seen:
                break
            node = dep.dependee[1]
            seen.add(node)
            if node not in out:
                out.append(node)
    return out


def _strip_edits(model: GoalModel, top: str, literals: ConditionSet) -> list[StripLiterals]:
    """Strip the literals from top and any origin in its subtree or dependee chain."""
    edits: list[StripLiterals] = []
    for aid in _subtree_with_dependees(model, top):
        present = frozenset(
            l for l in literals if any(l in alt for alt in model.artefact(aid).ie)
        )
        if present:
            edits.append(StripLiterals(aid, present))
    return edits


def _supplies(ce: AltConditions, literal) -> bool:
    return all(literal in alt for alt in ce.alternatives)


def _clashes(ce: AltConditions, taboo: ConditionSet) -> bool:
    """True when borrowing this subtree would drag in a contrary condition."""
    return any(l.negated() in taboo for alt in ce.alternatives for l in alt)


def _would_cycle(model: GoalModel, attach_point: str, donor: str) -> bool:
    return attach_point == donor or attach_point in model.subtree_ids(donor)


def _shallowest_supplier(
    model: GoalModel,
    annotated: AnnotatedModel,
    top: str,
    literal,
    taboo: ConditionSet,
) -> str | None:
    """Breadth-first search of the donor path for an artefact that reliably
    delivers the literal (every cumulative alternative) without dragging in
    contrary conditions. Artefacts annotated with the literal win over mere
    aggregators; shallowest first either way."""
    fallback: str | None = None
    queue = [top]
    while queue:
        aid = queue.pop(0)
        ce = annotated.ce.get(aid, model.artefact(aid).ie)
        if _supplies(ce, literal) and not _clashes(ce, taboo):
            if any(literal in alt for alt in model.artefact(aid).ie):
                return aid
            if fallback is None:
                fallback = aid
        link = model.link_of(aid)
        if link:
            queue.extend(link.children)
    return fallback


# -- ERA ------------------------------------------------------------------------


def era_resolve(
    model: GoalModel,
    annotated: AnnotatedModel,
    finding: Finding,
    ids: _TempIds | None = None,
) -> RefactoringPlan:
    """Entailment repair: carrier goals for unavailable conditions, links to donors.

    OR nodes get a temporary high-level goal per failing branch, sharing one
    carrier when the unavailable conditions coincide; AND nodes first borrow
    from siblings that already supply a missing condition, then carry the rest.
    """
    if finding.kind != KIND_ENTAILMENT:
        raise ValueError("not an entailment finding")
    if all(not m for _, m in finding.missing):
        raise ValueError("nothing to resolve")
    node = finding.at
    art = model.artefact(node)
    link = model.link_of(node)
    ids = ids or _TempIds(model)
    edits: list[Edit] = []

    if link is not None and link.kind == "or":
        prov = annotated.provenance.get(node, ())
        by_child: dict[str, list[int]] = {}
        for i, src in enumerate(prov):
            if src is not None:
                by_child.setdefault(src, []).append(i)
        missing_by_alt = dict(finding.missing)
        avail_by_alt = dict(zip((i for i, _ in finding.missing), finding.availability))
        ct_cache: dict[ConditionSet, str] = {}
        for child in link.children:
            alt_ids = by_child.get(child)
            if not alt_ids:
                continue
            best = min(alt_ids, key=lambda i: (len(missing_by_alt.get(i, frozenset())), i))
            missing = missing_by_alt.get(best, frozenset())
            if not missing:
                continue
            avail = avail_by_alt.get(best, (0,) * len(missing))
            ordered = sorted(missing, key=_lit_key)
            branch_ie = model.artefact(child).ie
            # the ancestor's demand wins: drop contrary demands from the branch
            contrary = frozenset(
                l.negated()
                for l in ordered
                if any(l.negated() in a for a in branch_ie)
            )
            if contrary:
                edits.extend(_strip_edits(model, child, contrary))
                branch_ie = AltConditions.of(a - contrary for a in branch_ie)
            taboo: ConditionSet = frozenset(missing)
            for a in art.ie.alternatives:
                taboo |= a
            for a in branch_ie.alternatives:
                taboo |= a
            donors: list[tuple] = []
            zero_set = set()
            for l, n in zip(ordered, avail):
                donor = None
                if n != 0:
                    donor_root = prov[n - 1] if n - 1 < len(prov) and prov[n - 1] else None
                    donor = (
                        _shallowest_supplier(model, annotated, donor_root, l, taboo)
                        if donor_root
                        else None
                    )
                    if donor is not None and (
                        _would_cycle(model, node, donor) or _would_cycle(model, child, donor)
                    ):
                        donor = None
                if donor is None:
                    zero_set.add(l)
                elif donor not in [d for d, _ in donors]:
                    donors.append((donor, l))
            zero = frozenset(zero_set)
            child_art = model.artefact(child)
            child_link = model.link_of(child)
            if (
                child_art.temp
                and (child_link is None or child_link.kind == "and")
                and len(model.parents_of(child)) == 1
            ):
                gt = child  # branch is already a synthesized wrapper; reuse it
            else:
                gt = ids.fresh("GT")
                edits.append(AddTempGoal(gt, gt, art.actor, branch_ie))
                edits.append(AddParent(gt, child, node))
            if zero:
                ct = ct_cache.get(zero)
                if ct is None:
                    ct = ids.fresh("CT")
                    ct_cache[zero] = ct
                    edits.append(AddTempGoal(ct, _humanize(zero), art.actor,
                                             AltConditions.single(zero)))
                edits.append(AddAndLink(gt, ct))
            for donor, _l in donors:
                if donor != gt:
                    edits.append(AddAndLink(gt, donor))
    else:
        missing_union: set = set()
        for _, m in finding.missing:
            missing_union |= m
        taboo = frozenset(missing_union)
        for a in art.ie.alternatives:
            taboo |= a
        leftovers: list = []
        donors: list[str] = []
        for l in sorted(missing_union, key=_lit_key):
            donor = None
            for parent in model.parents_of(node):
                for sibling in model.link_of(parent).children:
                    if sibling == node:
                        continue
                    sib_ce = annotated.ce.get(sibling)
                    if (
                        sib_ce is not None
                        and _supplies(sib_ce, l)
                        and not _clashes(sib_ce, taboo)
                        and not _would_cycle(model, node, sibling)
                    ):
                        donor = sibling
                        break
                if donor:
                    break
            if donor is None:
                leftovers.append(l)
            elif donor not in donors:
                donors.append(donor)
        edits.extend(AddAndLink(node, d) for d in donors)
        if leftovers:
            ct = ids.fresh("CT")
            carried = frozenset(leftovers)
            edits.append(AddTempGoal(ct, _humanize(carried), art.actor,
                                     AltConditions.single(carried)))
            edits.append(AddAndLink(node, ct))
    return RefactoringPlan(model_revision(model), finding.id, "", tuple(edits))


# -- CRA ------------------------------------------------------------------------


def cra_resolve_hierarchic(
    model: GoalModel,
    finding: Finding,
    kb: KnowledgeBase = EMPTY_KB,
    cap: int = DEFAULT_CAP,
) -> RefactoringPlan:
    """Strip the conflicting conditions from the offending child, then carry
    any immediate condition of the parent left unmet (chained entailment repair)."""
    if finding.kind != KIND_HIERARCHIC:
        raise ValueError("not hierarchic")
    node = finding.at
    child = finding.children[0]
    edits: list[Edit] = list(_strip_edits(model, child, finding.conflicting))
    ids = _TempIds(model)
    # simulate the strips, then see what entailment gap remains at the node
    trial = model
    for e in edits:
        trial = _apply_edit(trial, e)
    annotated, report = run_sra(trial, node, kb, cap=cap)
    # while other children still conflict with the node, a carrier would be
    # contradicted immediately; the chained repair waits for those strips
    blocked = any(
        f.kind == KIND_HIERARCHIC and f.at == node for f in report.findings
    )
    follow = next(
        (f for f in report.findings if f.kind == KIND_ENTAILMENT and f.at == node), None
    )
    if follow is not None and not blocked:
        chained = era_resolve(trial, annotated, follow, ids)
        edits.extend(chained.edits)
    return RefactoringPlan(model_revision(model), finding.id, "", tuple(edits))


def cra_resolve_sibling(
    model: GoalModel, finding: Finding
) -> tuple[RefactoringPlan, RefactoringPlan]:
    """Two alternatives for the analyst: drop either side's conflicting condition."""
    if finding.kind != KIND_SIBLING:
        raise ValueError("not a sibling finding")
    if len(finding.pairs) != 2:
        raise ValueError("sibling finding lacks a literal pair")
    revision = model_revision(model)
    plans = []
    for label, (child, lit_text) in zip(("Solution 1", "Solution 2"), finding.pairs):
        target = frozenset({lit(lit_text)})
        edits = tuple(_strip_edits(model, child, target))
        plans.append(RefactoringPlan(revision, finding.id, label, edits))
    return (plans[0], plans[1])


def resolve_finding(
    model: GoalModel,
    annotated: AnnotatedModel,
    finding: Finding,
    kb: KnowledgeBase = EMPTY_KB,
    cap: int = DEFAULT_CAP,
) -> list[RefactoringPlan]:
    if finding.kind == KIND_ENTAILMENT:
        return [era_resolve(model, annotated, finding)]
    if finding.kind == KIND_HIERARCHIC:
        return [cra_resolve_hierarchic(model, finding, kb, cap)]
    if finding.pairs:
        return list(cra_resolve_sibling(model, finding))
    return []


def iterate_to_fixpoint(
    model: GoalModel,
    root: str,
    kb: KnowledgeBase = EMPTY_KB,
    cap: int = DEFAULT_CAP,
    max_rounds: int = 20,
) -> tuple[GoalModel, int, ConflictReport]:
    """Analyze, resolve the first finding, apply, repeat until conflict-free.

    Sibling conflicts take the first offered solution. Returns the final model,
    the number of plans applied, and the last (clean) report; raises if the
    round budget runs out first.
    """
    kind_order = {KIND_HIERARCHIC: 0, KIND_SIBLING: 1, KIND_ENTAILMENT: 2}
    current = model
    for rounds in range(max_rounds + 1):
        annotated, report = run_sra(current, root, kb, cap=cap)
        if report.is_clean():
            return current, rounds, report
        if rounds == max_rounds:
            break
        first = sorted(report.findings, key=lambda f: kind_order[f.kind])[0]
        plans = resolve_finding(current, annotated, first, kb, cap)
        if not plans:
            raise RuntimeError(f"no plan for finding {first.id}")
        if len(plans) > 1:
            # stripping a synthesized carrier undoes earlier repairs
            def keeps_temps(plan: RefactoringPlan) -> bool:
                return any(
                    isinstance(e, StripLiterals) and current.artefact(e.artefact).temp
                    for e in plan.edits
                )

            plans = sorted(plans, key=keeps_temps)
        current = apply_plan(current, plans[0])
    raise RuntimeError(f"no fixpoint within {max_rounds} rounds")


# -- application ------------------------------------------------------------------


def _apply_edit(model: GoalModel, edit: Edit) -> GoalModel:
    if isinstance(edit, AddTempGoal):
        return model.with_artefact(
            Artefact(edit.id, "goal", edit.name, edit.actor, edit.ie, temp=True)
        )
    if isinstance(edit, AddAndLink):
        return model.with_child_appended(edit.parent, edit.child, "and")
    if isinstance(edit, AddParent):
        out = model.with_child_replaced(edit.under, edit.child, edit.wrapper)
        return out.with_child_appended(edit.wrapper, edit.child, "and")
    if isinstance(edit, StripLiterals):
        art = model.artefact(edit.artefact)
        stripped = AltConditions.of(alt - edit.literals for alt in art.ie)
        return model.with_updated_ie(edit.artefact, stripped)
    raise ModelError(f"unknown edit {edit!r}")


def apply_plan(model: GoalModel, plan: RefactoringPlan) -> GoalModel:
    """Apply all edits atomically to a fresh model; the original is untouched."""
    if plan.base_revision != model_revision(model):
        raise StalePlanError(
            f"plan was built against revision {plan.base_revision[:12]}, model has moved"
        )
    out = model
    for edit in plan.edits:
        out = _apply_edit(out, edit)
    diags = validate_model(out)
    if diags:
        raise ModelError("plan produced an invalid model: " + "; ".join(diags))
    return out
