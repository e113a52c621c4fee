"""HTTP facade for the analyst loop: upload, analyze, browse findings,
apply a chosen plan, re-analyze.

Sessions are directories of immutable revision documents plus a history log;
per-session applies are serialized behind a compare-and-swap on the revision
hash, so exactly one of two racing applies wins.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .conditions import EMPTY_KB, KbParseError, literal_text, parse_kb
from .dsl import ParseError, model_revision, parse_model, serialize_model
from .document import model_to_document
from .model import GoalModel, ModelError, validate_model
from .orgmod import CapExceeded, cap_from_env
from .reconcile import AnnotatedModel, ConflictReport, run_sra
from .resolve import RefactoringPlan, apply_plan, plan_to_doc, resolve_finding

__all__ = ["SessionStore", "create_app"]


def _alts_doc(alts) -> list[list[str]]:
    return [sorted((literal_text(l) for l in alt), key=lambda t: t.lstrip("!")) for alt in alts]


def _finding_doc(f) -> dict:
    return {
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


def _report_doc(report: ConflictReport) -> dict:
    return {
        "findings": [_finding_doc(f) for f in report.findings],
        "warnings": list(report.warnings),
    }


def _layout(model: GoalModel, root: str) -> dict:
    """Layered top-down placement hints: depth per artefact, stable column order."""
    depth: dict[str, int] = {root: 0}
    queue = [root]
    while queue:
        aid = queue.pop(0)
        link = model.link_of(aid)
        if not link:
            continue
        for child in link.children:
            d = depth[aid] + 1
            if child not in depth or d > depth[child]:
                depth[child] = d
                queue.append(child)
    columns: dict[int, int] = {}
    placed = {}
    for aid in model.subtree_ids(root):
        d = depth.get(aid, 0)
        placed[aid] = {"depth": d, "column": columns.get(d, 0)}
        columns[d] = columns.get(d, 0) + 1
    return placed


class _Session:
    def __init__(self, session_id: str, directory: Path, kb, kb_text: str, root: str):
        self.id = session_id
        self.dir = directory
        self.kb = kb
        self.kb_text = kb_text
        self.root = root
        self.lock = threading.Lock()
        self.revision: str = ""
        self.history: list[dict] = []
        self.models: dict[str, GoalModel] = {}
        self.analyses: dict[str, tuple[AnnotatedModel, ConflictReport]] = {}
        self.plans: dict[str, dict[str, list[RefactoringPlan]]] = {}

    def analysis(self, revision: str, cap: int) -> tuple[AnnotatedModel, ConflictReport]:
        if revision not in self.analyses:
            model = self.models[revision]
            self.analyses[revision] = run_sra(model, self.root, self.kb, cap=cap)
        return self.analyses[revision]

    def plans_for(self, revision: str, cap: int) -> dict[str, list[RefactoringPlan]]:
        if revision not in self.plans:
            model = self.models[revision]
            annotated, report = self.analysis(revision, cap)
            self.plans[revision] = {
                f.id: resolve_finding(model, annotated, f, self.kb, cap)
                for f in report.findings
            }
        return self.plans[revision]


class SessionStore:
    def __init__(self, base_dir: str | Path, cap: int | None = None):
        self.base = Path(base_dir)
        self.base.mkdir(parents=True, exist_ok=True)
        self.cap = cap if cap is not None else cap_from_env()
        self.sessions: dict[str, _Session] = {}

    # -- persistence helpers

    def _persist_revision(self, session: _Session, model: GoalModel) -> str:
        revision = model_revision(model)
        session.models[revision] = model
        path = session.dir / f"rev-{revision}.gm"
        if not path.exists():
            path.write_text(serialize_model(model))
        return revision

    def _append_history(self, session: _Session, entry: dict) -> None:
        session.history.append(entry)
        with (session.dir / "history.jsonl").open("a") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    # -- operations

    def create_session(self, model_text: str, kb_text: str = "", root: str | None = None) -> dict:
        model = parse_model(model_text)
        diags = validate_model(model)
        if diags:
            raise ModelError("; ".join(diags))
        kb = parse_kb(kb_text) if kb_text.strip() else EMPTY_KB
        if root is None:
            roots = model.roots()
            if len(roots) != 1:
                raise ModelError(
                    f"root required: model has {len(roots)} top-level artefacts"
                )
            root = roots[0]
        else:
            model.artefact(root)
        session_id = uuid.uuid4().hex
        directory = self.base / session_id
        directory.mkdir(parents=True, exist_ok=True)
        if kb_text.strip():
            (directory / "kb.kb").write_text(kb_text)
        session = _Session(session_id, directory, kb, kb_text, root)
        revision = self._persist_revision(session, model)
        session.revision = revision
        self._append_history(session, {"revision": revision, "applied": None, "finding": None})
        self.sessions[session_id] = session
        _, report = session.analysis(revision, self.cap)
        warnings = list(report.warnings)
        known_atoms = {
            l.atom for art in model.artefacts.values() for alt in art.ie for l in alt
        }
        stray = sorted(kb.atoms() - known_atoms)
        if stray:
            warnings.append("kb atoms not used by any annotation: " + ", ".join(stray))
        return {
            "session": session_id,
            "revision": revision,
            "root": root,
            "report": {**_report_doc(report), "warnings": warnings},
        }

    def get(self, session_id: str) -> _Session | None:
        return self.sessions.get(session_id)

    def findings(self, session: _Session) -> dict:
        annotated, report = session.analysis(session.revision, self.cap)
        plans = session.plans_for(session.revision, self.cap)
        payload = []
        for f in report.findings:
            payload.append({
                **_finding_doc(f),
                "plans": [
                    {
                        "digest": p.digest,
                        "label": p.label,
                        "edits": plan_to_doc(p)["edits"],
                    }
                    for p in plans.get(f.id, [])
                ],
            })
        return {
            "revision": session.revision,
            "findings": payload,
            "warnings": list(report.warnings),
        }

    def apply(self, session: _Session, finding_id: str, digest: str) -> tuple[int, dict]:
        with session.lock:
            plans = session.plans_for(session.revision, self.cap)
            candidates = plans.get(finding_id)
            chosen = next(
                (p for p in candidates or () if p.digest == digest), None
            )
            if chosen is None or chosen.base_revision != session.revision:
                known_anywhere = any(
                    p.digest == digest
                    for by_finding in session.plans.values()
                    for ps in by_finding.values()
                    for p in ps
                )
                if known_anywhere:
                    return 409, {"error": "plan digest is stale; reload findings"}
                if candidates is None:
                    return 404, {"error": f"unknown finding {finding_id!r} at current revision"}
                return 404, {"error": f"unknown plan digest {digest!r}"}
            model = session.models[session.revision]
            revised = apply_plan(model, chosen)
            revision = self._persist_revision(session, revised)
            session.revision = revision
            self._append_history(session, {
                "revision": revision,
                "applied": digest,
                "finding": finding_id,
                "plan": plan_to_doc(chosen),
            })
        _, report = session.analysis(revision, self.cap)
        return 200, {"revision": revision, "report": _report_doc(report)}

    def model_payload(self, session: _Session, revision: str | None) -> tuple[int, dict]:
        rev = revision or session.revision
        if rev not in session.models:
            return 404, {"error": f"unknown revision {rev!r}"}
        model = session.models[rev]
        annotated, report = session.analysis(rev, self.cap)
        return 200, {
            "revision": rev,
            "root": session.root,
            "document": model_to_document(model),
            "dsl": serialize_model(model),
            "ce": {aid: _alts_doc(alts) for aid, alts in sorted(annotated.ce.items())},
            "conflicts": sorted({f.at for f in report.findings}),
            "layout": _layout(model, session.root),
            "report": _report_doc(report),
        }

    def history_payload(self, session: _Session) -> dict:
        return {"session": session.id, "history": session.history}


def create_app(store: SessionStore | str | Path | None = None) -> FastAPI:
    if store is None:
        store = SessionStore(Path("sessions"))
    elif not isinstance(store, SessionStore):
        store = SessionStore(store)
    app = FastAPI(title="goalrec analysis service")
    app.state.store = store

    def _missing(session_id: str) -> JSONResponse:
        return JSONResponse({"error": f"unknown session {session_id!r}"}, status_code=404)

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        try:
            result = store.create_session(
                body.get("model", ""), body.get("kb", ""), body.get("root")
            )
        except (ParseError, KbParseError, ModelError) as exc:
            detail = {"error": str(exc)}
            if isinstance(exc, ParseError):
                detail.update({"line": exc.line, "column": exc.column})
            return JSONResponse(detail, status_code=400)
        except CapExceeded as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return result

    @app.get("/sessions/{session_id}/findings")
    def get_findings(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _missing(session_id)
        return store.findings(session)

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str, rev: str | None = None):
        session = store.get(session_id)
        if session is None:
            return _missing(session_id)
        status, payload = store.model_payload(session, rev)
        return JSONResponse(payload, status_code=status)

    @app.post("/sessions/{session_id}/apply")
    def post_apply(session_id: str, body: dict):
        session = store.get(session_id)
        if session is None:
            return _missing(session_id)
        finding = body.get("finding", "")
        digest = body.get("digest", "")
        status, payload = store.apply(session, finding, digest)
        return JSONResponse(payload, status_code=status)

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _missing(session_id)
        return store.history_payload(session)

    return app


def main(argv: list[str] | None = None) -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="goalrec-service")
    parser.add_argument("--store", default="sessions", help="session store directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(SessionStore(args.store)), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
