"""Command-line front end: enumeration, analysis, resolution preview,
plan application, and graph export.

Exit codes: 0 clean, 1 findings reported, 2 input error, 3 enumeration cap
exceeded, 4 stale plan digest.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .conditions import (
    EMPTY_KB,
    KbParseError,
    alt_conditions_text,
    condition_set_text,
    literal_text,
    parse_kb,
)
from .dsl import ParseError, model_revision, parse_model, serialize_model
from .model import GoalModel, ModelError, validate_model
from .orgmod import (
    CapExceeded,
    cap_from_env,
    count_orgmods,
    derive_routine_labels,
    label_exclusions,
    label_text,
    label_to_doc,
    path_text,
    traverse_paths,
)
from .reconcile import AnnotatedModel, ConflictReport, minimality_rank, run_sra
from .resolve import apply_plan, plan_from_doc, plan_to_doc, resolve_finding, StalePlanError

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_STALE = 4


class _Ctx:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = open(args.out, "w") if args.out else sys.stdout

    def emit(self, line: str = "") -> None:
        print(line, file=self.out)

    def close(self) -> None:
        if self.out is not sys.stdout:
            self.out.close()


def _load_model(path: str) -> GoalModel:
    text = Path(path).read_text()
    model = parse_model(text)
    diags = validate_model(model)
    if diags:
        raise ModelError("; ".join(diags))
    return model


def _load_kb(path: str | None):
    if not path:
        return EMPTY_KB
    return parse_kb(Path(path).read_text())


def _pick_root(model: GoalModel, requested: str | None) -> str:
    if requested:
        model.artefact(requested)
        return requested
    roots = model.roots()
    if len(roots) != 1:
        raise ModelError(
            f"--root required: model has {len(roots)} top-level artefacts ({', '.join(roots)})"
        )
    return roots[0]


def _scope_label(model: GoalModel, root: str, scope: str, cap: int):
    if scope == "all":
        return None
    try:
        index = int(scope)
    except ValueError:
        raise ModelError(f"--scope must be 'all' or a routine index, got {scope!r}") from None
    labels = derive_routine_labels(model, root, cap)
    if not 1 <= index <= len(labels):
        raise ModelError(f"scope index {index} out of range 1..{len(labels)}")
    return labels[index - 1]


def _finding_record(f) -> dict:
    return {
        "type": "finding",
        "id": f.id,
        "kind": f.kind,
        "at": f.at,
        "alternatives": list(f.alt_indices),
        "children": list(f.children),
        "conflicting": sorted(literal_text(l) for l in f.conflicting),
        "missing": [[i, sorted(literal_text(l) for l in m)] for i, m in f.missing],
        "availability": [list(t) for t in f.availability],
        "note": f.note,
    }


def _report_lines(ctx: _Ctx, model: GoalModel, annotated: AnnotatedModel, report: ConflictReport) -> None:
    structured = ctx.args.format == "structured"
    order = sorted(
        annotated.ce,
        key=lambda a: (model.artefact(a).actor, a),
    )
    if structured:
        for aid in order:
            ctx.emit(json.dumps({
                "type": "ce",
                "artefact": aid,
                "alternatives": [
                    sorted(literal_text(l) for l in alt) for alt in annotated.ce[aid]
                ],
            }, sort_keys=True))
        for f in report.findings:
            ctx.emit(json.dumps(_finding_record(f), sort_keys=True))
        for w in report.warnings:
            ctx.emit(json.dumps({"type": "warning", "message": w}, sort_keys=True))
        return
    ctx.emit(f"root: {annotated.root}")
    for aid in order:
        ctx.emit(f"  CE({aid}) = {alt_conditions_text(annotated.ce[aid])}")
    root_art = model.artefact(annotated.root)
    clean_order = [
        i
        for i in minimality_rank(root_art.ie, annotated.ce[annotated.root])
        if not any(f.at == annotated.root and i in f.alt_indices for f in report.findings)
    ]
    if clean_order:
        ctx.emit("minimality order at root: " + ", ".join(str(i + 1) for i in clean_order))
    if report.findings:
        ctx.emit("findings:")
        for f in report.findings:
            detail = []
            if f.conflicting:
                detail.append("conflicting " + condition_set_text(f.conflicting))
            for i, m in f.missing:
                if m:
                    detail.append(f"alt {i + 1} missing {condition_set_text(m)}")
            who = f" children {','.join(f.children)}" if f.children else ""
            ctx.emit(f"  [{f.kind}] {f.at}{who}: {'; '.join(detail) or f.note or 'see record'}")
    else:
        ctx.emit("findings: none")
    for w in report.warnings:
        ctx.emit(f"warning: {w}")


def cmd_orgmods(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    root = _pick_root(model, args.root)
    labels = derive_routine_labels(model, root, args.cap)
    if args.format == "structured":
        for i, label in enumerate(labels, start=1):
            ctx.emit(json.dumps({
                "type": "routine",
                "index": i,
                "label": label_text(label),
                "tree": label_to_doc(label),
                "exclusions": [[p, list(e)] for p, e in label_exclusions(label)],
            }, sort_keys=True))
    else:
        for i, label in enumerate(labels, start=1):
            ctx.emit(f"Routine {i}: {label_text(label)}")
        ctx.emit(f"total: {len(labels)} (count check: {count_orgmods(model, root)})")
    return EXIT_CLEAN


def cmd_paths(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    root = _pick_root(model, args.root)
    for p in traverse_paths(model, root):
        ctx.emit(path_text(p))
    return EXIT_CLEAN


def cmd_analyze(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    kb = _load_kb(args.kb)
    root = _pick_root(model, args.root)
    scope = _scope_label(model, root, args.scope, args.cap)
    annotated, report = run_sra(model, root, kb, scope, args.cap)
    _report_lines(ctx, model, annotated, report)
    return EXIT_CLEAN if report.is_clean() else EXIT_FINDINGS


def cmd_resolve(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    kb = _load_kb(args.kb)
    root = _pick_root(model, args.root)
    annotated, report = run_sra(model, root, kb, cap=args.cap)
    if not report.findings:
        ctx.emit("nothing to resolve")
        return EXIT_CLEAN
    wanted = [f for f in report.findings if not args.finding or f.id == args.finding]
    if args.finding and not wanted:
        raise ModelError(f"unknown finding {args.finding!r}")
    structured = ctx.args.format == "structured"
    for f in wanted:
        plans = resolve_finding(model, annotated, f, kb, args.cap)
        for plan in plans:
            if structured:
                ctx.emit(json.dumps({"type": "plan", "digest": plan.digest,
                                     **plan_to_doc(plan)}, sort_keys=True))
            else:
                title = f"plan {plan.digest[:12]} for {f.id}"
                if plan.label:
                    title += f" ({plan.label})"
                ctx.emit(title)
                for doc in (plan_to_doc(plan))["edits"]:
                    ctx.emit("  " + json.dumps(doc, sort_keys=True))
    return EXIT_FINDINGS


def cmd_apply(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    kb = _load_kb(args.kb)
    root = _pick_root(model, args.root)
    raw = Path(args.plans).read_text()
    try:
        doc = json.loads(raw)
        if isinstance(doc, dict) and "plans" in doc:
            records = list(doc["plans"])
        elif isinstance(doc, list):
            records = doc
        else:
            records = [doc]
    except json.JSONDecodeError:
        # JSONL as written by `resolve --format structured`
        records = [json.loads(line) for line in raw.splitlines() if line.strip()]
    records = [rec for rec in records if isinstance(rec, dict) and "edits" in rec]
    if not records:
        raise ModelError(f"no plan records in {args.plans}")
    plans = [plan_from_doc(doc) for doc in records]
    chosen = next((p for p in plans if p.digest == args.digest), None)
    if chosen is None:
        raise ModelError(f"no plan with digest {args.digest!r} in {args.plans}")
    revised = apply_plan(model, chosen)
    source = Path(args.model)
    target = source.with_name(
        f"{source.stem}.rev-{model_revision(revised)[:12]}{source.suffix}"
    )
    target.write_text(serialize_model(revised))
    annotated, report = run_sra(revised, root, kb, cap=args.cap)
    ctx.emit(f"wrote {target}")
    ctx.emit(f"revision: {model_revision(revised)}")
    ctx.emit(f"findings after apply: {len(report.findings)}")
    return EXIT_CLEAN if report.is_clean() else EXIT_FINDINGS


def cmd_export_dot(ctx: _Ctx) -> int:
    args = ctx.args
    model = _load_model(args.model)
    kb = _load_kb(args.kb)
    conflicted: set[str] = set()
    ce = {}
    if args.root or len(model.roots()) == 1:
        root = _pick_root(model, args.root)
        annotated, report = run_sra(model, root, kb, cap=args.cap)
        ce = annotated.ce
        conflicted = {f.at for f in report.findings}
    shapes = {"goal": "ellipse", "task": "hexagon", "resource": "box"}
    ctx.emit("digraph goalmodel {")
    ctx.emit("  rankdir=TB;")
    for actor in sorted(model.actors, key=lambda a: a.id):
        ctx.emit(f'  subgraph "cluster_{actor.id}" {{')
        ctx.emit(f'    label="{actor.name}";')
        for aid in sorted(actor.artefacts):
            art = model.artefacts[aid]
            lines = [f"{aid}: {art.name}"]
            lines.append("IE " + alt_conditions_text(art.ie))
            if aid in ce:
                lines.append("CE " + alt_conditions_text(ce[aid]))
            attrs = [
                f'label="{_dot_escape(chr(10).join(lines))}"',
                f"shape={shapes[art.kind]}",
            ]
            if art.temp:
                attrs.append('style="dashed"')
            if aid in conflicted:
                attrs.append('conflict="true"')
                attrs.append("color=red")
            ctx.emit(f"    {aid} [{', '.join(attrs)}];")
        ctx.emit("  }")
    for link in sorted(model.decompositions, key=lambda l: l.parent):
        for child in link.children:
            style = 'style=solid, arrowhead=normal' if link.kind == "and" else "style=dashed"
            ctx.emit(f'    {link.parent} -> {child} [kind="{link.kind}", {style}];')
    for dep in sorted(model.dependencies, key=lambda d: d.depender):
        ctx.emit(
            f'    {dep.depender[1]} -> {dep.dependee[1]} [kind="depends", style=dotted];'
        )
    ctx.emit("}")
    return EXIT_CLEAN


def _dot_escape(s: str) -> str:
    return s.replace('"', '\\"').replace("\n", "\\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalrec",
        description="Reconcile satisfaction conditions over annotated goal models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", required=True, help="goal model DSL file")
        p.add_argument("--kb", help="knowledge base file")
        p.add_argument("--root", help="root artefact id (default: the unique top)")
        p.add_argument("--scope", default="all", help="'all' or a 1-based routine index")
        p.add_argument("--cap", type=int, default=cap_from_env(),
                       help="alternative/enumeration cap (env AFSCR_CAP)")
        p.add_argument("--format", choices=("text", "structured", "dot"), default="text")
        p.add_argument("--out", help="write output to this file instead of stdout")

    for name, fn, extra in (
        ("orgmods", cmd_orgmods, None),
        ("paths", cmd_paths, None),
        ("analyze", cmd_analyze, None),
        ("resolve", cmd_resolve, "finding"),
        ("apply", cmd_apply, "apply"),
        ("export-dot", cmd_export_dot, None),
    ):
        p = sub.add_parser(name)
        common(p)
        if extra == "finding":
            p.add_argument("--finding", help="only this finding id")
        if extra == "apply":
            p.add_argument("--plans", required=True, help="plan file from `resolve --format structured`")
            p.add_argument("--digest", required=True, help="digest of the plan to apply")
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    ctx = _Ctx(args)
    try:
        return args.fn(ctx)
    except (ParseError, KbParseError, ModelError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except StalePlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STALE
    finally:
        ctx.close()


if __name__ == "__main__":
    sys.exit(main())
