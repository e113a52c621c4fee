"""Lossless structured-text (JSON) import/export of goal models.

One document per model, fields mirroring GoalModel. Used by the service and UI.
"""

from __future__ import annotations

import json
from typing import Any

from .conditions import AltConditions, Literal, lit, literal_text
from .model import (
    Actor,
    Artefact,
    DecompositionLink,
    DependencyLink,
    GoalModel,
    ModelError,
    build_model,
)

__all__ = ["model_to_document", "document_to_model", "document_dumps", "document_loads"]

FORMAT = "goalmodel/v1"


def _ie_to_doc(ie: AltConditions) -> list[list[str]]:
    return [
        sorted((literal_text(l) for l in alt), key=lambda t: t.lstrip("!"))
        for alt in ie.alternatives
    ]


def _ie_from_doc(data: Any, where: str) -> AltConditions:
    if not isinstance(data, list) or not all(isinstance(a, list) for a in data):
        raise ModelError(f"{where}: ie must be a list of literal lists")
    alts = []
    for alt in data:
        literals: list[Literal] = []
        for token in alt:
            if not isinstance(token, str):
                raise ModelError(f"{where}: bad literal {token!r}")
            literals.append(lit(token))
        alts.append(frozenset(literals))
    if not alts:
        raise ModelError(f"{where}: ie needs at least one alternative")
    return AltConditions.of(alts)


def model_to_document(model: GoalModel) -> dict:
    return {
        "format": FORMAT,
        "actors": [
            {"id": a.id, "name": a.name, "artefacts": sorted(a.artefacts)}
            for a in sorted(model.actors, key=lambda a: a.id)
        ],
        "artefacts": [
            {
                "id": art.id,
                "kind": art.kind,
                "name": art.name,
                "actor": art.actor,
                "temp": art.temp,
                "ie": _ie_to_doc(art.ie),
            }
            for art in sorted(model.artefacts.values(), key=lambda a: a.id)
        ],
        "decompositions": [
            {"parent": l.parent, "kind": l.kind, "children": list(l.children)}
            for l in sorted(model.decompositions, key=lambda l: l.parent)
        ],
        "dependencies": [
            {"depender": list(d.depender), "dependee": list(d.dependee)}
            for d in sorted(model.dependencies, key=lambda d: d.depender)
        ],
    }


def document_to_model(doc: dict) -> GoalModel:
    if not isinstance(doc, dict):
        raise ModelError("document must be an object")
    if doc.get("format") != FORMAT:
        raise ModelError(f"unsupported document format {doc.get('format')!r}")
    actors = [
        Actor(a["id"], a.get("name", a["id"]), tuple(a.get("artefacts", ())))
        for a in doc.get("actors", [])
    ]
    artefacts = [
        Artefact(
            art["id"],
            art["kind"],
            art.get("name", art["id"]),
            art["actor"],
            _ie_from_doc(art.get("ie", []), art["id"]),
            bool(art.get("temp", False)),
        )
        for art in doc.get("artefacts", [])
    ]
    links = [
        DecompositionLink(l["parent"], l["kind"], tuple(l["children"]))
        for l in doc.get("decompositions", [])
    ]
    deps = [
        DependencyLink(tuple(d["depender"]), tuple(d["dependee"]))
        for d in doc.get("dependencies", [])
    ]
    return build_model(actors, artefacts, links, deps)


def document_dumps(model: GoalModel) -> str:
    return json.dumps(model_to_document(model), indent=2, sort_keys=True) + "\n"


def document_loads(text: str) -> GoalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"bad document JSON: {exc}") from None
    return document_to_model(doc)
