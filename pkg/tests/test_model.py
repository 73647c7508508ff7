import json
import random

import pytest

from revloop.model import (
    Decision,
    Document,
    DomainTag,
    Edit,
    EditIntention,
    EditKind,
    EditStatus,
    Mode,
    SessionConfig,
    SessionState,
    Verdict,
    canonical_dumps,
    decode_session,
    document_from_dict,
    document_to_dict,
    encode_session,
    make_edit_id,
    session_from_dict,
    session_to_dict,
)
from revloop.segment import build_document
from revloop.validate import validate_session

from conftest import random_session


def test_enum_wire_values():
    assert [i.value for i in EditIntention] == ["fluency", "coherence", "clarity", "style"]
    assert [k.value for k in EditKind] == ["insert", "delete", "replace"]
    assert [s.value for s in EditStatus] == ["suggested", "accepted", "rejected"]
    assert [v.value for v in Verdict] == ["accept", "reject"]
    assert [m.value for m in Mode] == ["human_human", "system_human", "system_only"]
    assert [d.value for d in DomainTag] == ["arxiv", "wikipedia", "wikinews", "other"]


def test_canonical_dumps_is_compact_sorted_and_keeps_unicode():
    out = canonical_dumps({"b": 1, "a": "café"})
    assert out == '{"a":"café","b":1}'


def test_session_config_rejects_nonpositive_depth_budget():
    with pytest.raises(ValueError):
        SessionConfig(mode=Mode.SYSTEM_ONLY, t_max=0)


def test_document_round_trip_exact():
    doc = build_document("d1", DomainTag.WIKIPEDIA, "A café. The naïve dog.")
    again = document_from_dict(document_to_dict(doc))
    assert again == doc
    # spans are byte offsets into the utf-8 encoding
    data = doc.text.encode("utf-8")
    for sent in doc.sentences:
        for tok in sent.tokens:
            assert data[tok.start:tok.end].decode("utf-8") == tok.surface


def test_sentence_text_slices_bytes():
    doc = build_document("d2", DomainTag.OTHER, "Héllo wörld. Next one.")
    assert doc.sentence_text(0) == "Héllo wörld."
    assert doc.sentence_text(1) == "Next one."


def test_edit_id_is_stable_and_content_addressed():
    a = make_edit_id(1, 0, 2, EditKind.REPLACE, ("x",), ("y",))
    b = make_edit_id(1, 0, 2, EditKind.REPLACE, ("x",), ("y",))
    assert a == b
    assert len(a) == 16
    assert int(a, 16) >= 0
    # any field change moves the id
    assert a != make_edit_id(2, 0, 2, EditKind.REPLACE, ("x",), ("y",))
    assert a != make_edit_id(1, 0, 3, EditKind.REPLACE, ("x",), ("y",))
    assert a != make_edit_id(1, 0, 2, EditKind.REPLACE, ("x",), ("z",))


def test_session_round_trip_bytes_identical():
    rng = random.Random(101)
    for k in range(25):
        session = random_session(rng, f"rt-{k:02d}")
        blob = encode_session(session)
        again = decode_session(blob)
        assert again == session
        assert encode_session(again) == blob


def test_session_dict_round_trip_preserves_dict():
    rng = random.Random(102)
    session = random_session(rng, "dict-rt")
    d = session_to_dict(session)
    assert session_to_dict(session_from_dict(d)) == d
    # canonical encoding round-trips through plain json too
    assert json.loads(encode_session(session)) == d


def test_validate_passes_engine_built_sessions():
    rng = random.Random(103)
    for k in range(15):
        session = random_session(rng, f"ok-{k:02d}")
        assert validate_session(session) == []


def _corrupt(session, **edit_overrides):
    d = session_to_dict(session)
    step = next(s for s in d["steps"] if s["proposed_edits"])
    step["proposed_edits"][0].update(edit_overrides)
    return session_from_dict(d)


def _first_edited_session(rng, prefix):
    while True:
        session = random_session(rng, f"{prefix}-{rng.randint(0, 999)}")
        if any(s["proposed_edits"] for s in session_to_dict(session)["steps"]):
            return session


def test_validate_flags_tampered_edit_id():
    rng = random.Random(104)
    session = _first_edited_session(rng, "tamper")
    bad = _corrupt(session, edit_id="0" * 16)
    assert any("edit_id" in v for v in validate_session(bad))


def test_validate_flags_status_decision_mismatch():
    rng = random.Random(105)
    session = _first_edited_session(rng, "status")
    d = session_to_dict(session)
    step = next(s for s in d["steps"] if s["proposed_edits"])
    edit = step["proposed_edits"][0]
    edit["status"] = ("rejected" if edit["status"] == "accepted" else "accepted")
    bad = session_from_dict(d)
    assert validate_session(bad) != []


def test_validate_flags_result_text_drift():
    rng = random.Random(106)
    session = _first_edited_session(rng, "drift")
    d = session_to_dict(session)
    step = d["steps"][0]
    assert step["result"] is not None
    step["result"]["text"] = step["result"]["text"] + " extra."
    bad = session_from_dict(d)
    assert validate_session(bad) != []


def test_validate_flags_token_span_corruption():
    doc = build_document("span", DomainTag.OTHER, "A cat. The dog.")
    d = document_to_dict(doc)
    d["sentences"][0]["tokens"][1]["span"] = [2, 6]
    broken = document_from_dict(d)
    session_d = {
        "session_id": "s-span",
        "original": d,
        "config": {"mode": "system_only", "t_max": 3, "backend_id": "rule",
                   "suppress_previously_rejected": False},
        "steps": [],
        "state": "awaiting_proposal",
    }
    session = session_from_dict(session_d)
    assert session.original == broken
    assert any("surface" in v or "span" in v for v in validate_session(session))


def test_edit_source_span():
    e = Edit(edit_id="e" * 16, sentence_index=0, kind=EditKind.REPLACE,
             old_tokens=("a", "b"), new_tokens=("c",), anchor=3,
             intention=EditIntention.STYLE, status=EditStatus.SUGGESTED)
    assert e.source_span() == (3, 5)


def test_frozen_model_objects_reject_mutation():
    doc = build_document("f", DomainTag.OTHER, "One two.")
    with pytest.raises(AttributeError):
        doc.text = "changed"
    dec = Decision(edit_id="e" * 16, verdict=Verdict.ACCEPT,
                   reviewer_id="r", timestamp="1970-01-01T00:00:00Z")
    with pytest.raises(AttributeError):
        dec.verdict = Verdict.REJECT


def test_documents_compare_by_value():
    a = build_document("same", DomainTag.OTHER, "A cat.")
    b = build_document("same", DomainTag.OTHER, "A cat.")
    assert a == b and a is not b
    assert isinstance(a, Document)
