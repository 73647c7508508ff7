"""HTTP surface: request/response contracts, the error envelope, reviewer
blinding, and equivalence with direct engine calls against the same store.
"""

import json

import pytest
from fastapi.testclient import TestClient

from revloop import engine
from revloop.api import create_app
from revloop.fixtures import (
    reference_depth_sessions,
    reference_intention_sessions,
)
from revloop.model import (
    Decision,
    DomainTag,
    Mode,
    SessionConfig,
    Verdict,
)
from revloop.store import SessionStore

FIXED_TS = "2024-05-01T12:00:00Z"


def fixed_clock():
    return FIXED_TS


@pytest.fixture
def store(tmp_path):
    return SessionStore(tmp_path / "store")


@pytest.fixture
def client(store):
    app = create_app(store, clock=fixed_clock)
    with TestClient(app) as c:
        yield c


def post_document(client, text="the the cat sat. We utilize very new methods.",
                  domain="other"):
    res = client.post("/api/v1/documents", json={"text": text, "domain": domain})
    assert res.status_code == 201, res.text
    return res.json()["doc_id"]


def post_session(client, doc_id, mode="system_human", **extra):
    res = client.post("/api/v1/sessions",
                      json={"doc_id": doc_id, "mode": mode, **extra})
    assert res.status_code == 201, res.text
    return res.json()["session_id"]


# -- documents ---------------------------------------------------------------

def test_document_create_fetch_list(client):
    doc_id = post_document(client, "A cat sat. It purred.", "wikinews")
    res = client.get(f"/api/v1/documents/{doc_id}")
    assert res.status_code == 200
    body = res.json()
    assert body["text"] == "A cat sat. It purred."
    assert body["domain_tag"] == "wikinews"
    assert len(body["sentences"]) == 2

    listing = client.get("/api/v1/documents").json()["documents"]
    assert [d["doc_id"] for d in listing] == [doc_id]
    assert listing[0]["n_sentences"] == 2
    assert listing[0]["preview"].startswith("A cat sat.")


def test_document_ids_are_content_addressed(client):
    a = post_document(client, "Same text here.", "arxiv")
    b = post_document(client, "Same text here.", "arxiv")
    c = post_document(client, "Same text here.", "other")
    assert a == b
    assert a != c


def test_document_validation_errors(client):
    res = client.post("/api/v1/documents", json={"text": "   "})
    assert res.status_code == 400
    assert res.json()["code"] == "empty_text"
    res = client.post("/api/v1/documents", json={"text": "Hi there.",
                                                 "domain": "mars"})
    assert res.status_code == 400
    body = res.json()
    assert body["code"] == "unknown_domain"
    assert "arxiv" in body["details"]["allowed"]
    res = client.post("/api/v1/documents", json={"domain": "arxiv"})
    assert res.status_code == 400
    res = client.get("/api/v1/documents/missing")
    assert res.status_code == 404
    assert res.json()["code"] == "document_not_found"


def test_error_envelope_is_uniform(client):
    paths = [
        ("get", "/api/v1/documents/zzz", None),
        ("get", "/api/v1/sessions/zzz", None),
        ("post", "/api/v1/sessions", {"doc_id": "zzz", "mode": "warp"}),
        ("get", "/api/v1/metrics?group=week", None),
    ]
    for method, path, payload in paths:
        res = getattr(client, method)(path, **({"json": payload} if payload else {}))
        assert res.status_code >= 400
        body = res.json()
        assert set(body) == {"code", "message", "details"}, (path, body)


def test_malformed_body_maps_to_the_envelope(client):
    res = client.post("/api/v1/sessions", content=b"not json",
                      headers={"content-type": "application/json"})
    assert res.status_code == 400
    assert res.json()["code"] == "invalid_request"


# -- session lifecycle ----------------------------------------------------------

def test_session_create_validations(client):
    doc_id = post_document(client)
    res = client.post("/api/v1/sessions", json={"doc_id": doc_id, "mode": "warp"})
    assert res.status_code == 400 and res.json()["code"] == "unknown_mode"
    res = client.post("/api/v1/sessions",
                      json={"doc_id": doc_id, "mode": "system_human", "t_max": 0})
    assert res.status_code == 400 and res.json()["code"] == "invalid_t_max"
    res = client.post("/api/v1/sessions",
                      json={"doc_id": doc_id, "mode": "system_human",
                            "backend_id": "oracle"})
    assert res.status_code == 400 and res.json()["code"] == "unknown_backend"
    res = client.post("/api/v1/sessions",
                      json={"doc_id": "none", "mode": "system_human"})
    assert res.status_code == 404 and res.json()["code"] == "document_not_found"
    # replayed-revision sessions need a recorded chain
    res = client.post("/api/v1/sessions",
                      json={"doc_id": doc_id, "mode": "human_human"})
    assert res.status_code == 400 and res.json()["code"] == "missing_chain"


def test_full_review_flow(client):
    doc_id = post_document(client)
    session_id = post_session(client, doc_id)

    res = client.post(f"/api/v1/sessions/{session_id}/propose")
    assert res.status_code == 200
    body = res.json()
    assert body["depth"] == 1
    assert len(body["edits"]) == 2
    for e in body["edits"]:
        assert e["status"] == "suggested"
        assert "before_preview" in e and "after_preview" in e
        assert e["before_preview"] != e["after_preview"]

    # deciding only one edit leaves the other listed as undecided
    first, second = body["edits"]
    res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
        "reviewer_id": "r1",
        "decisions": [{"edit_id": first["edit_id"], "verdict": "accept"}]})
    assert res.status_code == 200
    assert res.json()["undecided"] == [second["edit_id"]]

    res = client.post(f"/api/v1/sessions/{session_id}/advance")
    assert res.status_code == 422
    body = res.json()
    assert body["code"] == "undecided_edits"
    assert body["details"]["edit_ids"] == [second["edit_id"]]

    res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
        "reviewer_id": "r1",
        "decisions": [{"edit_id": second["edit_id"], "verdict": "reject"}]})
    assert res.json()["undecided"] == []

    res = client.post(f"/api/v1/sessions/{session_id}/advance")
    assert res.status_code == 200
    assert res.json() == {"state": "awaiting_proposal", "next_depth": 2}

    # accept everything from here on; the rule backend runs dry by depth 3
    for _ in range(2):
        res = client.post(f"/api/v1/sessions/{session_id}/propose")
        body = res.json()
        if body.get("completed"):
            break
        ids = [e["edit_id"] for e in body["edits"]]
        client.post(f"/api/v1/sessions/{session_id}/decisions", json={
            "reviewer_id": "r1",
            "decisions": [{"edit_id": i, "verdict": "accept"} for i in ids]})
        res = client.post(f"/api/v1/sessions/{session_id}/advance")
        body = res.json()
        if body["state"] == "completed":
            break

    res = client.get(f"/api/v1/sessions/{session_id}")
    final = res.json()
    assert final["state"] == "completed"
    # the rejected filler deletion resurfaced at depth 2 and was taken there
    assert final["steps"][-1]["result"]["text"] == \
        "The cat sat. We use new methods."


def test_propose_twice_is_a_state_conflict(client):
    doc_id = post_document(client)
    session_id = post_session(client, doc_id)
    assert client.post(f"/api/v1/sessions/{session_id}/propose").status_code == 200
    res = client.post(f"/api/v1/sessions/{session_id}/propose")
    assert res.status_code == 409
    assert res.json()["code"] == "wrong_state"


def test_decisions_validation(client):
    doc_id = post_document(client)
    session_id = post_session(client, doc_id)
    client.post(f"/api/v1/sessions/{session_id}/propose")
    res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
        "reviewer_id": "r1",
        "decisions": [{"edit_id": "f" * 16, "verdict": "accept"}]})
    assert res.status_code == 404
    assert res.json()["code"] == "edit_not_found"
    res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
        "reviewer_id": "r1",
        "decisions": [{"edit_id": "f" * 16, "verdict": "maybe"}]})
    assert res.status_code == 400
    assert res.json()["code"] == "invalid_verdict"
    res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
        "reviewer_id": "", "decisions": []})
    assert res.status_code == 400


def test_zero_edit_proposal_completes(client):
    doc_id = post_document(client, "Nothing to fix here. Clean text.")
    session_id = post_session(client, doc_id)
    res = client.post(f"/api/v1/sessions/{session_id}/propose")
    body = res.json()
    assert body == {"completed": True, "depth": 1,
                    "final_text": "Nothing to fix here. Clean text."}


def test_replay_session_over_ingested_chain(tmp_path):
    store = SessionStore(tmp_path / "store")
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(json.dumps({
        "doc_id": "w-1", "domain": "wikipedia",
        "versions": ["A cat sat on the mat. It purred.",
                     "A cat slept on the mat. It purred."]}) + "\n",
        encoding="utf-8")
    store.ingest(corpus)
    app = create_app(store, clock=fixed_clock)
    with TestClient(app) as client:
        session_id = post_session(client, "w-1", mode="human_human")
        body = client.post(f"/api/v1/sessions/{session_id}/propose").json()
        assert body["depth"] == 1
        assert [e["old_tokens"] for e in body["edits"]] == [["sat"]]
        ids = [e["edit_id"] for e in body["edits"]]
        client.post(f"/api/v1/sessions/{session_id}/decisions", json={
            "reviewer_id": "r1",
            "decisions": [{"edit_id": i, "verdict": "accept"} for i in ids]})
        body = client.post(f"/api/v1/sessions/{session_id}/advance").json()
        assert body["state"] == "awaiting_proposal"
        body = client.post(f"/api/v1/sessions/{session_id}/propose").json()
        assert body["completed"] is True
        assert body["final_text"] == "A cat slept on the mat. It purred."


# -- blinding ----------------------------------------------------------------------

FORBIDDEN_KEYS = {"mode", "backend_id", "backend"}
FORBIDDEN_VALUES = {"human_human", "system_human", "system_only",
                    "rule", "replay", "remote"}


def scan(node, path="$"):
    bad = []
    if isinstance(node, dict):
        for key, value in node.items():
            if key in FORBIDDEN_KEYS:
                bad.append(f"{path}.{key}")
            bad.extend(scan(value, f"{path}.{key}"))
    elif isinstance(node, list):
        for i, value in enumerate(node):
            bad.extend(scan(value, f"{path}[{i}]"))
    elif isinstance(node, str):
        if node in FORBIDDEN_VALUES:
            bad.append(f"{path}={node!r}")
    return bad


def test_reviewer_facing_responses_never_identify_the_backend(client):
    doc_id = post_document(client)
    for mode in ("system_human", "system_only"):
        session_id = post_session(client, doc_id, mode=mode)
        responses = [client.get(f"/api/v1/sessions/{session_id}").json()]
        body = client.post(f"/api/v1/sessions/{session_id}/propose").json()
        responses.append(body)
        while not body.get("completed"):
            ids = [e["edit_id"] for e in body["edits"]]
            res = client.post(f"/api/v1/sessions/{session_id}/decisions", json={
                "reviewer_id": "r1",
                "decisions": [{"edit_id": i, "verdict": "accept"} for i in ids]})
            responses.append(res.json())
            adv = client.post(f"/api/v1/sessions/{session_id}/advance").json()
            responses.append(adv)
            if adv["state"] == "completed":
                break
            body = client.post(f"/api/v1/sessions/{session_id}/propose").json()
            responses.append(body)
        responses.append(client.get(f"/api/v1/sessions/{session_id}").json())
        for body in responses:
            assert scan(body) == [], body


def test_blinded_session_still_reports_review_budget(client):
    doc_id = post_document(client)
    session_id = post_session(client, doc_id, t_max=2)
    body = client.get(f"/api/v1/sessions/{session_id}").json()
    assert body["config"] == {"t_max": 2, "suppress_previously_rejected": False}


# -- metrics endpoint -----------------------------------------------------------------

def install_sessions(store, sessions):
    for session in sessions:
        store.save_session(session)
        for step in session.steps:
            if step.decisions:
                store.append_decisions(session.session_id, step.depth,
                                       step.decisions)


def test_metrics_endpoint_groups(tmp_path):
    depth_store = SessionStore(tmp_path / "depth")
    install_sessions(depth_store, reference_depth_sessions())
    with TestClient(create_app(depth_store, clock=fixed_clock)) as client:
        body = client.get("/api/v1/metrics?group=depth").json()
        assert body["group"] == "depth"
        pcts = [round(r["pct_accepts"], 2) for r in body["rows"]]
        assert pcts == [49.15, 67.02, 56.72]
        res = client.get("/api/v1/metrics?group=author")
        assert res.status_code == 400
        assert res.json()["code"] == "unknown_group"

    intent_store = SessionStore(tmp_path / "intent")
    install_sessions(intent_store, reference_intention_sessions())
    with TestClient(create_app(intent_store, clock=fixed_clock)) as client:
        body = client.get("/api/v1/metrics?group=intention").json()
        rows = {r["intention"]: r for r in body["rows"]}
        assert rows["clarity"]["n_edits"] == 332
        assert rows["clarity"]["n_accepts"] == 195


# -- bisimulation (small; the broad randomized sweep lives in the acceptance suite)

def test_api_calls_mirror_direct_engine_calls(tmp_path):
    text = "the the cat sat. We utilize very new methods."
    api_store = SessionStore(tmp_path / "api")
    app = create_app(api_store, clock=fixed_clock)
    with TestClient(app) as client:
        doc_id = post_document(client, text)
        session_id = post_session(client, doc_id)
        body = client.post(f"/api/v1/sessions/{session_id}/propose").json()
        ids = [e["edit_id"] for e in body["edits"]]
        verdicts = ["accept", "reject"]
        client.post(f"/api/v1/sessions/{session_id}/decisions", json={
            "reviewer_id": "r1",
            "decisions": [{"edit_id": i, "verdict": v}
                          for i, v in zip(ids, verdicts)]})
        client.post(f"/api/v1/sessions/{session_id}/advance")

    direct_store = SessionStore(tmp_path / "direct")
    import hashlib
    from revloop.segment import build_document
    direct_doc_id = hashlib.sha256(f"other\n{text}".encode()).hexdigest()[:16]
    assert direct_doc_id == doc_id
    doc = build_document(direct_doc_id, DomainTag.OTHER, text)
    direct_store.save_document(doc)
    session = engine.new_session(
        doc, SessionConfig(mode=Mode.SYSTEM_HUMAN), session_id=session_id)
    direct_store.save_session(session)
    session, step = engine.propose(session, engine.RuleBackend())
    direct_store.save_session(session)
    decisions = [
        Decision(edit_id=e.edit_id,
                 verdict=Verdict.ACCEPT if v == "accept" else Verdict.REJECT,
                 reviewer_id="r1", timestamp=FIXED_TS)
        for e, v in zip(step.proposed_edits, ["accept", "reject"])]
    session = engine.record_decisions(session, decisions)
    direct_store.save_session(session)
    direct_store.append_decisions(session_id, step.depth, decisions)
    session = engine.advance(session)
    direct_store.save_session(session)

    api_files = sorted(p.relative_to(tmp_path / "api")
                       for p in (tmp_path / "api").rglob("*") if p.is_file())
    direct_files = sorted(p.relative_to(tmp_path / "direct")
                          for p in (tmp_path / "direct").rglob("*") if p.is_file())
    assert api_files == direct_files
    for rel in api_files:
        assert (tmp_path / "api" / rel).read_bytes() == \
            (tmp_path / "direct" / rel).read_bytes(), rel
