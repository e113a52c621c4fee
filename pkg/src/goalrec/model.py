"""Goal-model data structures and structural validation.

Models are immutable after construction; every "edit" builds a new model.
Decomposition links form an acyclic graph with at most one link per parent;
children may be shared between parents (i* figures reuse resources across
alternative branches).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .conditions import AltConditions

__all__ = [
    "ARTEFACT_KINDS",
    "Artefact",
    "Actor",
    "DecompositionLink",
    "DependencyLink",
    "GoalModel",
    "ModelError",
    "validate_model",
]

ARTEFACT_KINDS = ("goal", "task", "resource")


class ModelError(ValueError):
    """Structural problem that prevents building or editing a model."""


@dataclass(frozen=True, slots=True)
class Artefact:
    id: str
    kind: str
    name: str
    actor: str
    ie: AltConditions
    temp: bool = False


@dataclass(frozen=True, slots=True)
class Actor:
    id: str
    name: str
    artefacts: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class DecompositionLink:
    parent: str
    kind: str  # "and" | "or"
    children: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class DependencyLink:
    depender: tuple[str, str]  # (actor id, artefact id)
    dependee: tuple[str, str]


@dataclass(frozen=True)
class GoalModel:
    actors: tuple[Actor, ...] = ()
    artefacts: Mapping[str, Artefact] = field(default_factory=dict)
    decompositions: tuple[DecompositionLink, ...] = ()
    dependencies: tuple[DependencyLink, ...] = ()

    # -- lookups ---------------------------------------------------------

    def artefact(self, artefact_id: str) -> Artefact:
        try:
            return self.artefacts[artefact_id]
        except KeyError:
            raise ModelError(f"unknown artefact {artefact_id!r}") from None

    def link_of(self, parent: str) -> DecompositionLink | None:
        for link in self.decompositions:
            if link.parent == parent:
                return link
        return None

    def parents_of(self, child: str) -> tuple[str, ...]:
        return tuple(l.parent for l in self.decompositions if child in l.children)

    def dependency_of(self, artefact_id: str) -> DependencyLink | None:
        for dep in self.dependencies:
            if dep.depender[1] == artefact_id:
                return dep
        return None

    def is_leaf(self, artefact_id: str) -> bool:
        return self.link_of(artefact_id) is None

    def roots(self) -> tuple[str, ...]:
        children = {c for l in self.decompositions for c in l.children}
        return tuple(a for a in sorted(self.artefacts) if a not in children)

    def subtree_ids(self, root: str) -> tuple[str, ...]:
        """Artefacts reachable from root through decompositions, preorder."""
        out: list[str] = []
        seen: set[str] = set()
        stack = [root]
        while stack:
            a = stack.pop()
            if a in seen:
                continue
            seen.add(a)
            out.append(a)
            link = self.link_of(a)
            if link:
                stack.extend(reversed(link.children))
        return tuple(out)

    # -- functional edits -------------------------------------------------

    def with_artefact(self, artefact: Artefact) -> "GoalModel":
        if artefact.id in self.artefacts:
            raise ModelError(f"artefact id collision: {artefact.id!r}")
        arts = dict(self.artefacts)
        arts[artefact.id] = artefact
        actors = tuple(
            replace(a, artefacts=a.artefacts + (artefact.id,)) if a.id == artefact.actor else a
            for a in self.actors
        )
        if artefact.actor not in {a.id for a in self.actors}:
            raise ModelError(f"unknown actor {artefact.actor!r}")
        return replace(self, actors=actors, artefacts=arts)

    def with_updated_ie(self, artefact_id: str, ie: AltConditions) -> "GoalModel":
        art = self.artefact(artefact_id)
        arts = dict(self.artefacts)
        arts[artefact_id] = replace(art, ie=ie)
        return replace(self, artefacts=arts)

    def with_child_appended(self, parent: str, child: str, kind: str = "and") -> "GoalModel":
        self.artefact(parent)
        self.artefact(child)
        link = self.link_of(parent)
        if link is None:
            new = self.decompositions + (DecompositionLink(parent, kind, (child,)),)
        else:
            if link.kind != kind:
                raise ModelError(f"cannot add {kind} child under {parent!r} ({link.kind} link)")
            if child in link.children:
                return self
            new = tuple(
                replace(l, children=l.children + (child,)) if l.parent == parent else l
                for l in self.decompositions
            )
        return replace(self, decompositions=new)

    def with_child_replaced(self, parent: str, old_child: str, new_child: str) -> "GoalModel":
        link = self.link_of(parent)
        if link is None or old_child not in link.children:
            raise ModelError(f"{old_child!r} is not a child of {parent!r}")
        new = tuple(
            replace(l, children=tuple(new_child if c == old_child else c for c in l.children))
            if l.parent == parent
            else l
            for l in self.decompositions
        )
        return replace(self, decompositions=new)


def _decomposition_cycle(model: GoalModel) -> list[str] | None:
    graph = {l.parent: l.children for l in model.decompositions}
    WHITE, GREY, BLACK = 0, 1, 2
    color = {a: WHITE for a in model.artefacts}
    stack_path: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GREY
        stack_path.append(node)
        for child in graph.get(node, ()):
            if child not in color:
                continue
            if color[child] == GREY:
                return stack_path[stack_path.index(child):]
            if color[child] == WHITE:
                found = visit(child)
                if found:
                    return found
        stack_path.pop()
        color[node] = BLACK
        return None

    for a in sorted(model.artefacts):
        if color.get(a) == WHITE:
            found = visit(a)
            if found:
                return found
    return None


def validate_model(model: GoalModel) -> list[str]:
    """Structural diagnostics; an empty list means the model is well-formed."""
    diags: list[str] = []
    actor_ids = {a.id for a in model.actors}

    seen_actor = set()
    for actor in model.actors:
        if actor.id in seen_actor:
            diags.append(f"duplicate actor id: {actor.id}")
        seen_actor.add(actor.id)
        for aid in actor.artefacts:
            if aid not in model.artefacts:
                diags.append(f"actor {actor.id} lists unknown artefact {aid}")

    for art in model.artefacts.values():
        if art.kind not in ARTEFACT_KINDS:
            diags.append(f"bad artefact kind: {art.id} ({art.kind})")
        if art.actor not in actor_ids:
            diags.append(f"artefact {art.id} in unknown actor {art.actor}")

    seen_parent: set[str] = set()
    for link in model.decompositions:
        if link.parent in seen_parent:
            diags.append(f"multiple decomposition links under {link.parent}")
        seen_parent.add(link.parent)
        if link.kind not in ("and", "or"):
            diags.append(f"bad link kind under {link.parent}: {link.kind}")
        if not link.children:
            diags.append(f"empty decomposition under {link.parent}")
        if link.parent not in model.artefacts:
            diags.append(f"decomposition from unknown artefact {link.parent}")
        if len(set(link.children)) != len(link.children):
            diags.append(f"duplicate child under {link.parent}")
        for child in link.children:
            if child not in model.artefacts:
                diags.append(f"decomposition to unknown artefact {child}")
            if child == link.parent:
                diags.append(f"artefact {link.parent} decomposes into itself")

    cycle = _decomposition_cycle(model)
    if cycle:
        diags.append("decomposition cycle: " + ",".join(cycle))

    seen_depender: set[tuple[str, str]] = set()
    for dep in model.dependencies:
        for role, (actor_id, artefact_id) in (("depender", dep.depender), ("dependee", dep.dependee)):
            if actor_id not in actor_ids:
                diags.append(f"dependency {role} in unknown actor {actor_id}")
            if artefact_id not in model.artefacts:
                diags.append(f"dependency {role} unknown artefact {artefact_id}")
            elif not model.is_leaf(artefact_id):
                diags.append(f"{role} not leaf: {artefact_id}")
        if dep.depender in seen_depender:
            diags.append(f"multiple dependencies from {dep.depender[1]}")
        seen_depender.add(dep.depender)

    dep_graph = {d.depender[1]: d.dependee[1] for d in model.dependencies}
    visited: set[str] = set()
    for start in sorted(dep_graph):
        if start in visited:
            continue
        trail: list[str] = []
        node: str | None = start
        on_trail: set[str] = set()
        while node is not None and node in dep_graph:
            if node in on_trail:
                cycle_nodes = trail[trail.index(node):]
                diags.append("dependency cycle: " + ",".join(cycle_nodes))
                break
            if node in visited:
                break
            trail.append(node)
            on_trail.add(node)
            visited.add(node)
            node = dep_graph.get(node)
    return diags


def build_model(
    actors: Iterable[Actor],
    artefacts: Iterable[Artefact],
    decompositions: Iterable[DecompositionLink],
    dependencies: Iterable[DependencyLink],
) -> GoalModel:
    arts: dict[str, Artefact] = {}
    for art in artefacts:
        if art.id in arts:
            raise ModelError(f"duplicate artefact id: {art.id}")
        arts[art.id] = art
    return GoalModel(tuple(actors), arts, tuple(decompositions), tuple(dependencies))
