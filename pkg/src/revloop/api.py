"""HTTP facade over the store and the revision engine.

Every endpoint is a thin adapter: handlers load a session, run the same
engine call a library user would, and save. Reviewer-facing responses are
blinded: no response body ever carries the session mode or backend
identity, so a reviewer cannot tell replayed human revisions from
generated ones.

Errors use one envelope: {"code": ..., "message": ..., "details": {...}}.
"""

from __future__ import annotations

import hashlib
import threading
from datetime import datetime, timezone
from typing import Callable

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import engine
from .diff import apply_all
from .metrics import acceptance_by_depth, acceptance_by_intention
from .model import (
    Decision,
    DomainTag,
    Mode,
    RevisionSession,
    SessionConfig,
    SessionState,
    Verdict,
    document_to_dict,
    edit_to_dict,
    session_to_dict,
)
from .segment import build_document, render
from .store import NotFoundError, SessionStore

API_PREFIX = "/api/v1"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _require(payload: dict, key: str, kind: type, code: str = "invalid_request"):
    value = payload.get(key)
    if not isinstance(value, kind):
        raise ApiError(400, code, f"field {key!r} must be a {kind.__name__}",
                       {"field": key})
    return value


def _blinded_session(session: RevisionSession) -> dict:
    """Session as JSON minus every backend-identifying field."""
    data = session_to_dict(session)
    data["config"] = {
        "t_max": session.config.t_max,
        "suppress_previously_rejected": session.config.suppress_previously_rejected,
    }
    return data


def _edit_payload(step, edit) -> dict:
    sentence = step.source.sentences[edit.sentence_index]
    data = edit_to_dict(edit)
    data["before_preview"] = render(sentence.token_surfaces())
    data["after_preview"] = render(apply_all(sentence, [edit]))
    return data


def create_app(store: SessionStore,
               backends: dict[str, engine.Backend] | None = None,
               default_backend: str = "rule",
               default_t_max: int = 3,
               clock: Callable[[], str] = _utc_now,
               cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="revloop", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = dict(backends) if backends is not None else {"rule": engine.RuleBackend()}

    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(session_id, threading.Lock())

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={
            "code": exc.code, "message": exc.message, "details": exc.details})

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "code": "invalid_request", "message": "malformed request body",
            "details": {"errors": [str(e.get("msg", e)) for e in exc.errors()]}})

    def load_session_or_404(session_id: str) -> RevisionSession:
        try:
            return store.load_session(session_id)
        except NotFoundError:
            raise ApiError(404, "session_not_found",
                           f"no session {session_id!r}") from None

    def resolve_backend(session: RevisionSession) -> engine.Backend:
        if session.config.mode is Mode.HUMAN_HUMAN:
            try:
                chain = store.load_chain(session.original.doc_id)
            except NotFoundError:
                raise ApiError(409, "missing_chain",
                               "document has no recorded revisions to replay") from None
            return engine.ReplayBackend(chain)
        backend = registry.get(session.config.backend_id)
        if backend is None:
            raise ApiError(409, "unknown_backend",
                           f"backend {session.config.backend_id!r} is not configured")
        return backend

    # -- documents -----------------------------------------------------------

    @app.post(f"{API_PREFIX}/documents", status_code=201)
    def create_document(payload: dict = Body(...)):
        text = _require(payload, "text", str)
        if not text.strip():
            raise ApiError(400, "empty_text", "document text must be non-empty")
        domain_raw = payload.get("domain", DomainTag.OTHER.value)
        try:
            domain = DomainTag(domain_raw)
        except ValueError:
            raise ApiError(400, "unknown_domain",
                           f"unknown domain {domain_raw!r}",
                           {"allowed": [d.value for d in DomainTag]}) from None
        doc_id = hashlib.sha256(f"{domain.value}\n{text}".encode()).hexdigest()[:16]
        document = build_document(doc_id, domain, text)
        store.save_document(document)
        return {"doc_id": doc_id}

    @app.get(f"{API_PREFIX}/documents")
    def list_documents():
        items = []
        for doc in store.list_documents():
            items.append({
                "doc_id": doc.doc_id,
                "domain": doc.domain_tag.value,
                "n_sentences": len(doc.sentences),
                "preview": doc.text[:120],
            })
        return {"documents": items}

    @app.get(f"{API_PREFIX}/documents/{{doc_id}}")
    def get_document(doc_id: str):
        try:
            return document_to_dict(store.load_document(doc_id))
        except NotFoundError:
            raise ApiError(404, "document_not_found", f"no document {doc_id!r}") from None

    # -- sessions --------------------------------------------------------------

    @app.post(f"{API_PREFIX}/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        doc_id = _require(payload, "doc_id", str)
        mode_raw = _require(payload, "mode", str)
        try:
            mode = Mode(mode_raw)
        except ValueError:
            raise ApiError(400, "unknown_mode", f"unknown mode {mode_raw!r}",
                           {"allowed": [m.value for m in Mode]}) from None
        t_max = payload.get("t_max", default_t_max)
        if not isinstance(t_max, int) or t_max < 1:
            raise ApiError(400, "invalid_t_max", "t_max must be a positive integer")
        backend_id = payload.get("backend_id", default_backend)
        if mode is not Mode.HUMAN_HUMAN and backend_id not in registry:
            raise ApiError(400, "unknown_backend",
                           f"backend {backend_id!r} is not configured",
                           {"allowed": sorted(registry)})
        try:
            document = store.load_document(doc_id)
        except NotFoundError:
            raise ApiError(404, "document_not_found", f"no document {doc_id!r}") from None
        if mode is Mode.HUMAN_HUMAN:
            try:
                store.load_chain(doc_id)
            except NotFoundError:
                raise ApiError(400, "missing_chain",
                               "document has no recorded revisions to replay") from None
            backend_id = "replay"
        config = SessionConfig(mode=mode, t_max=t_max, backend_id=backend_id,
                               suppress_previously_rejected=bool(
                                   payload.get("suppress_previously_rejected", False)))
        session = engine.new_session(document, config)
        store.save_session(session)
        return {"session_id": session.session_id, "state": session.state.value}

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}")
    def get_session(session_id: str):
        return _blinded_session(load_session_or_404(session_id))

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/propose")
    def propose(session_id: str):
        with session_lock(session_id):
            session = load_session_or_404(session_id)
            backend = resolve_backend(session)
            try:
                session, step = engine.propose(session, backend)
            except (engine.StateError, engine.DepthExceededError) as exc:
                raise ApiError(409, "wrong_state", str(exc)) from exc
            except engine.BackendError as exc:
                raise ApiError(502, "backend_failed", str(exc)) from exc
            store.save_session(session)
        if session.state is SessionState.COMPLETED:
            return {"completed": True, "depth": step.depth,
                    "final_text": session.current_document().text}
        return {"depth": step.depth,
                "edits": [_edit_payload(step, e) for e in step.proposed_edits]}

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/decisions")
    def record_decisions(session_id: str, payload: dict = Body(...)):
        reviewer_id = _require(payload, "reviewer_id", str)
        if not reviewer_id:
            raise ApiError(400, "invalid_request", "reviewer_id must be non-empty")
        raw = _require(payload, "decisions", list)
        stamp = clock()
        decisions = []
        for item in raw:
            if not isinstance(item, dict):
                raise ApiError(400, "invalid_request", "decisions must be objects")
            edit_id = _require(item, "edit_id", str)
            try:
                verdict = Verdict(item.get("verdict"))
            except ValueError:
                raise ApiError(400, "invalid_verdict",
                               f"unknown verdict {item.get('verdict')!r}",
                               {"allowed": [v.value for v in Verdict]}) from None
            decisions.append(Decision(edit_id=edit_id, verdict=verdict,
                                      reviewer_id=reviewer_id, timestamp=stamp))
        with session_lock(session_id):
            session = load_session_or_404(session_id)
            try:
                session = engine.record_decisions(session, decisions)
            except engine.StateError as exc:
                raise ApiError(409, "wrong_state", str(exc)) from exc
            except engine.UnknownEditError as exc:
                raise ApiError(404, "edit_not_found", str(exc)) from exc
            store.save_session(session)
            step = session.current_step()
            store.append_decisions(session.session_id, step.depth, decisions)
        return {"undecided": step.undecided_edit_ids()}

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/advance")
    def advance(session_id: str):
        with session_lock(session_id):
            session = load_session_or_404(session_id)
            try:
                session = engine.advance(session)
            except engine.StateError as exc:
                raise ApiError(409, "wrong_state", str(exc)) from exc
            except engine.UnresolvedEditsError as exc:
                raise ApiError(422, "undecided_edits",
                               "every suggested edit needs a verdict",
                               {"edit_ids": exc.edit_ids}) from exc
            store.save_session(session)
        body = {"state": session.state.value}
        if session.state is SessionState.COMPLETED:
            body["final_text"] = session.current_document().text
        else:
            body["next_depth"] = session.next_depth()
        return body

    # -- metrics ---------------------------------------------------------------

    @app.get(f"{API_PREFIX}/metrics")
    def metrics(group: str = "depth"):
        sessions = store.load_all_sessions()
        if group == "depth":
            rows = [{"depth": s.depth, "n_docs": s.n_docs, "avg_edits": s.avg_edits,
                     "avg_accepts": s.avg_accepts, "pct_accepts": s.pct_accepts}
                    for s in acceptance_by_depth(sessions)]
        elif group == "intention":
            rows = [{"intention": s.intention.value, "n_edits": s.n_edits,
                     "n_accepts": s.n_accepts, "pct_accepts": s.pct_accepts}
                    for s in acceptance_by_intention(sessions)]
        else:
            raise ApiError(400, "unknown_group",
                           f"group must be 'depth' or 'intention', got {group!r}")
        return {"group": group, "rows": rows}

    return app
