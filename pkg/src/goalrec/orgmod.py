"""Enumeration of OR-refined goal models: path traversal, decomposition
sequence objects, and routine-label derivation.

A routine label pins one alternative at every OR split reachable along the
selected branches and records the rejected siblings in exclusion sets.
Serialized labels use ASCII brackets: < > for sequences, { } for AND sets,
[ ] for exclusion sets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Union

from .model import GoalModel

__all__ = [
    "DEFAULT_CAP",
    "cap_from_env",
    "CapExceeded",
    "PathNode",
    "TraversalPath",
    "DSO",
    "LeafNode",
    "SeqNode",
    "AndNode",
    "ChoiceNode",
    "LabelNode",
    "marker_of",
    "traverse_paths",
    "path_text",
    "extract_dsos",
    "derive_routine_labels",
    "count_orgmods",
    "label_text",
    "label_to_doc",
    "label_exclusions",
    "label_choices",
]

DEFAULT_CAP = 4096

# markers: X = OR split, A = AND split, seq = single-child refinement, leaf
MARKER_OR = "X"
MARKER_AND = "A"
MARKER_SEQ = "seq"
MARKER_LEAF = "leaf"


def cap_from_env(default: int = DEFAULT_CAP) -> int:
    raw = os.environ.get("AFSCR_CAP")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value >= 1 else default


class CapExceeded(RuntimeError):
    def __init__(self, needed: int, cap: int, where: str):
        super().__init__(f"{where}: {needed} alternatives exceed cap {cap}")
        self.needed = needed
        self.cap = cap


@dataclass(frozen=True, slots=True)
class PathNode:
    artefact: str
    marker: str


@dataclass(frozen=True, slots=True)
class TraversalPath:
    nodes: tuple[PathNode, ...]


@dataclass(frozen=True, slots=True)
class DSO:
    """Decomposition sequence object: a split node and its downward segments."""

    root: str
    subsequences: tuple[tuple[str, ...], ...]


@dataclass(frozen=True, slots=True)
class LeafNode:
    artefact: str


@dataclass(frozen=True, slots=True)
class SeqNode:
    artefact: str
    next: "LabelNode"


@dataclass(frozen=True, slots=True)
class AndNode:
    artefact: str
    children: tuple["LabelNode", ...]


@dataclass(frozen=True, slots=True)
class ChoiceNode:
    artefact: str
    selected: "LabelNode"
    excluded: tuple[str, ...]


LabelNode = Union[LeafNode, SeqNode, AndNode, ChoiceNode]


def marker_of(model: GoalModel, artefact_id: str) -> str:
    link = model.link_of(artefact_id)
    if link is None:
        return MARKER_LEAF
    if len(link.children) == 1:
        return MARKER_SEQ
    return MARKER_OR if link.kind == "or" else MARKER_AND


def traverse_paths(model: GoalModel, root: str) -> list[TraversalPath]:
    """Depth-first root-to-leaf paths, children in declaration order."""
    model.artefact(root)
    paths: list[TraversalPath] = []

    def walk(artefact_id: str, trail: tuple[PathNode, ...], on_path: frozenset) -> None:
        if artefact_id in on_path:
            raise ValueError(
                "decomposition cycle through " + ",".join(n.artefact for n in trail)
            )
        node = PathNode(artefact_id, marker_of(model, artefact_id))
        trail = trail + (node,)
        link = model.link_of(artefact_id)
        if link is None:
            paths.append(TraversalPath(trail))
            return
        for child in link.children:
            walk(child, trail, on_path | {artefact_id})

    walk(root, (), frozenset())
    return paths


def _node_text(node: PathNode) -> str:
    if node.marker == MARKER_OR:
        return f"{node.artefact}(X)"
    if node.marker == MARKER_AND:
        return f"{node.artefact}(A)"
    return node.artefact


def path_text(path: TraversalPath) -> str:
    return "<" + ",".join(_node_text(n) for n in path.nodes) + ">"


def extract_dsos(paths: Iterable[TraversalPath]) -> dict[str, DSO]:
    """One DSO per OR/AND-split artefact, subsequences deduplicated in path order.

    A subsequence runs from a child of the split down to the next split
    artefact or to a leaf, inclusive.
    """
    order: list[str] = []
    segments: dict[str, list[tuple[str, ...]]] = {}
    for path in paths:
        nodes = path.nodes
        for i, node in enumerate(nodes):
            if node.marker not in (MARKER_OR, MARKER_AND):
                continue
            j = i + 1
            seg: list[str] = []
            while j < len(nodes):
                seg.append(nodes[j].artefact)
                if nodes[j].marker in (MARKER_OR, MARKER_AND):
                    break
                j += 1
            if not seg:
                continue
            if node.artefact not in segments:
                segments[node.artefact] = []
                order.append(node.artefact)
            bucket = segments[node.artefact]
            tseg = tuple(seg)
            if tseg not in bucket:
                bucket.append(tseg)
    return {a: DSO(a, tuple(segments[a])) for a in order}


def count_orgmods(model: GoalModel, root: str) -> int:
    """Number of OR-refined goal models rooted at root (brute arithmetic)."""
    model.artefact(root)
    memo: dict[str, int] = {}

    def count(artefact_id: str) -> int:
        if artefact_id in memo:
            return memo[artefact_id]
        link = model.link_of(artefact_id)
        if link is None:
            n = 1
        elif link.kind == "or" and len(link.children) > 1:
            n = sum(count(c) for c in link.children)
        else:
            n = 1
            for c in link.children:
                n *= count(c)
        memo[artefact_id] = n
        return n

    return count(root)


def derive_routine_labels(
    model: GoalModel, root: str, cap: int = DEFAULT_CAP
) -> list[LabelNode]:
    """All routine labels for root via child-first merging of DSO subsequences.

    Children pass their merged sequences back to the parent's subsequence;
    OR splits fan out one label per alternative and record exclusions.
    """
    total = count_orgmods(model, root)
    if total > cap:
        raise CapExceeded(total, cap, f"routine labels of {root}")
    paths = traverse_paths(model, root)
    dsos = extract_dsos(paths)

    def labels_from(artefact_id: str) -> list[LabelNode]:
        dso = dsos.get(artefact_id)
        if dso is None:
            # plain chain from here down
            link = model.link_of(artefact_id)
            if link is None:
                return [LeafNode(artefact_id)]
            return [SeqNode(artefact_id, l) for l in labels_from(link.children[0])]
        branch_labels = [_segment_labels(seg, dsos, model) for seg in dso.subsequences]
        if marker_of(model, artefact_id) == MARKER_OR:
            out: list[LabelNode] = []
            firsts = [seg[0] for seg in dso.subsequences]
            for i, labs in enumerate(branch_labels):
                excluded = tuple(f for j, f in enumerate(firsts) if j != i)
                out.extend(ChoiceNode(artefact_id, lab, excluded) for lab in labs)
            return out
        combos: list[tuple[LabelNode, ...]] = [()]
        for labs in branch_labels:
            combos = [c + (l,) for c in combos for l in labs]
        return [AndNode(artefact_id, combo) for combo in combos]

    def _segment_labels(
        seg: tuple[str, ...], dsos: dict[str, DSO], model: GoalModel
    ) -> list[LabelNode]:
        last = seg[-1]
        if last in dsos:
            tails = labels_from(last)
        else:
            tails = [LeafNode(last)]
        for artefact_id in reversed(seg[:-1]):
            tails = [SeqNode(artefact_id, t) for t in tails]
        return tails

    return labels_from(root)


def _spine(node: LabelNode) -> list[str]:
    if isinstance(node, LeafNode):
        return [node.artefact]
    if isinstance(node, SeqNode):
        return [node.artefact] + _spine(node.next)
    if isinstance(node, AndNode):
        inner = ",".join(_bracketed(c) for c in node.children)
        return [node.artefact, "{" + inner + "}"]
    excl = ",".join((node.artefact,) + node.excluded)
    return [node.artefact, f"<{_bracketed(node.selected)},[{excl}]>"]


def _bracketed(node: LabelNode) -> str:
    return "<" + ",".join(_spine(node)) + ">"


def label_text(node: LabelNode) -> str:
    """Canonical label string; OR roots render in routine style, other roots
    wrap with an empty exclusion set."""
    if isinstance(node, ChoiceNode):
        return _bracketed(node)
    if isinstance(node, LeafNode):
        return f"<{node.artefact},[∅]>"
    return f"<{_bracketed(node)},[∅]>"


def label_to_doc(node: LabelNode):
    """Structured form: nested arrays tagged by node kind."""
    if isinstance(node, LeafNode):
        return ["leaf", node.artefact]
    if isinstance(node, SeqNode):
        return ["seq", node.artefact, label_to_doc(node.next)]
    if isinstance(node, AndNode):
        return ["and", node.artefact, [label_to_doc(c) for c in node.children]]
    return [
        "choice",
        node.artefact,
        label_to_doc(node.selected),
        list(node.excluded),
    ]


def label_exclusions(node: LabelNode) -> list[tuple[str, tuple[str, ...]]]:
    """(or-artefact, excluded children) pairs in label order."""
    out: list[tuple[str, tuple[str, ...]]] = []

    def walk(n: LabelNode) -> None:
        if isinstance(n, SeqNode):
            walk(n.next)
        elif isinstance(n, AndNode):
            for c in n.children:
                walk(c)
        elif isinstance(n, ChoiceNode):
            out.append((n.artefact, n.excluded))
            walk(n.selected)

    walk(node)
    return out


def label_choices(node: LabelNode) -> frozenset:
    """The OR assignments {(or-artefact, selected child)} a label commits to."""
    out: set[tuple[str, str]] = set()

    def first_artefact(n: LabelNode) -> str:
        return n.artefact

    def walk(n: LabelNode) -> None:
        if isinstance(n, SeqNode):
            walk(n.next)
        elif isinstance(n, AndNode):
            for c in n.children:
                walk(c)
        elif isinstance(n, ChoiceNode):
            out.add((n.artefact, first_artefact(n.selected)))
            walk(n.selected)

    walk(node)
    return frozenset(out)
