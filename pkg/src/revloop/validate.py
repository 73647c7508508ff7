"""Structural invariant checks for sessions.

``validate_session`` walks a session and returns a list of human-readable
violations (empty list means the session is well-formed). It never raises:
persistence and the API use it to reject corrupt data with a useful message
instead of failing deep inside the engine.
"""

from __future__ import annotations

from collections import defaultdict

from .diff import apply_decisions, materialize
from .model import (
    Document,
    EditKind,
    EditStatus,
    RevisionSession,
    SessionState,
    Verdict,
    make_edit_id,
)


def _check_document(doc: Document, path: str, out: list[str]):
    data = doc.text.encode("utf-8")
    prev_end = 0
    for k, s in enumerate(doc.sentences):
        where = f"{path}.sentences[{k}]"
        if s.index != k:
            out.append(f"{where}: index {s.index} does not match position {k}")
        if not (0 <= s.start <= s.end <= len(data)):
            out.append(f"{where}: span [{s.start},{s.end}) outside document")
            continue
        if s.start < prev_end:
            out.append(f"{where}: span overlaps previous sentence")
        prev_end = s.end
        t_prev = s.start
        for ti, t in enumerate(s.tokens):
            t_where = f"{where}.tokens[{ti}]"
            if not (s.start <= t.start <= t.end <= s.end):
                out.append(f"{t_where}: span [{t.start},{t.end}) outside sentence")
                continue
            if t.start < t_prev:
                out.append(f"{t_where}: span overlaps previous token")
            t_prev = t.end
            try:
                slice_text = data[t.start:t.end].decode("utf-8")
            except UnicodeDecodeError:
                out.append(f"{t_where}: span does not fall on UTF-8 boundaries")
                continue
            if slice_text != t.surface:
                out.append(
                    f"{t_where}: surface {t.surface!r} != document slice {slice_text!r}")


def _check_edits(step, path: str, out: list[str]):
    src = step.source
    per_sentence = defaultdict(list)
    prev_key = None
    for k, e in enumerate(step.proposed_edits):
        where = f"{path}.proposed_edits[{k}]"
        if not 0 <= e.sentence_index < len(src.sentences):
            out.append(f"{where}: sentence_index {e.sentence_index} out of range")
            continue
        if e.kind is EditKind.INSERT and (e.old_tokens or not e.new_tokens):
            out.append(f"{where}: insert must have empty old_tokens and new tokens")
        if e.kind is EditKind.DELETE and (not e.old_tokens or e.new_tokens):
            out.append(f"{where}: delete must have old tokens and empty new_tokens")
        if e.kind is EditKind.REPLACE and (not e.old_tokens or not e.new_tokens):
            out.append(f"{where}: replace must have both old and new tokens")
        surfaces = src.sentences[e.sentence_index].token_surfaces()
        start, end = e.source_span()
        if not (0 <= start <= end <= len(surfaces)):
            out.append(f"{where}: consumes tokens [{start},{end}) beyond sentence length "
                       f"{len(surfaces)}")
        elif tuple(surfaces[start:end]) != e.old_tokens:
            out.append(f"{where}: old_tokens do not match the source sentence")
        expected_id = make_edit_id(step.depth, e.sentence_index, e.anchor, e.kind,
                                   e.old_tokens, e.new_tokens)
        if e.edit_id != expected_id:
            out.append(f"{where}: edit_id {e.edit_id} does not match content hash")
        key = (e.sentence_index, e.anchor)
        if prev_key is not None and key < prev_key:
            out.append(f"{where}: edits not sorted by (sentence_index, anchor)")
        prev_key = key
        per_sentence[e.sentence_index].append((k, e))

    for sent_idx, entries in per_sentence.items():
        last_end = -1
        for k, e in entries:
            start, end = e.source_span()
            if start < last_end:
                out.append(f"{path}.proposed_edits[{k}]: overlaps another edit in "
                           f"sentence {sent_idx}")
            last_end = max(last_end, end)


def _check_decisions(step, path: str, out: list[str]):
    known = {e.edit_id: e for e in step.proposed_edits}
    seen = set()
    last_verdict: dict[str, Verdict] = {}
    for k, d in enumerate(step.decisions):
        where = f"{path}.decisions[{k}]"
        if d.edit_id not in known:
            out.append(f"{where}: references unknown edit {d.edit_id}")
            continue
        pair = (d.edit_id, d.reviewer_id)
        if pair in seen:
            out.append(f"{where}: duplicate decision by reviewer {d.reviewer_id!r} "
                       f"on edit {d.edit_id}")
        seen.add(pair)
        last_verdict[d.edit_id] = d.verdict

    for k, e in enumerate(step.proposed_edits):
        where = f"{path}.proposed_edits[{k}]"
        if e.edit_id not in last_verdict:
            if e.status is not EditStatus.SUGGESTED:
                out.append(f"{where}: status {e.status.value} but no decision recorded")
        else:
            expected = (EditStatus.ACCEPTED if last_verdict[e.edit_id] is Verdict.ACCEPT
                        else EditStatus.REJECTED)
            if e.status is not expected:
                out.append(f"{where}: status {e.status.value} does not match last "
                           f"verdict {last_verdict[e.edit_id].value}")


def _check_result(step, path: str, out: list[str]):
    undecided = step.undecided_edit_ids()
    if step.result is None:
        if not undecided:
            out.append(f"{path}: all edits decided but result missing")
        return
    if undecided:
        out.append(f"{path}: result present with undecided edits {undecided}")
        return
    edited = defaultdict(list)
    for e in step.proposed_edits:
        edited[e.sentence_index].append(e)
    try:
        results = {}
        for sent_idx, edits in edited.items():
            if any(e.status is EditStatus.ACCEPTED for e in edits):
                results[sent_idx] = apply_decisions(step.source.sentences[sent_idx], edits)
        expected = materialize(step.source, results)
    except Exception as exc:
        out.append(f"{path}: cannot recompute result ({exc})")
        return
    if expected != step.result:
        out.append(f"{path}: result does not equal the source with accepted edits applied")


def validate_session(session: RevisionSession) -> list[str]:
    """All invariant violations in ``session`` (empty list == well-formed)."""
    out: list[str] = []
    _check_document(session.original, "original", out)

    prev_doc = session.original
    for i, step in enumerate(session.steps):
        path = f"steps[{i}]"
        if step.depth != i + 1:
            out.append(f"{path}: depth {step.depth} != {i + 1}")
        if step.source != prev_doc:
            out.append(f"{path}: source is not the previous step's result")
        _check_document(step.source, f"{path}.source", out)
        if step.result is not None:
            _check_document(step.result, f"{path}.result", out)
        _check_edits(step, path, out)
        _check_decisions(step, path, out)
        _check_result(step, path, out)
        prev_doc = step.result if step.result is not None else prev_doc

    if len(session.steps) > session.config.t_max:
        out.append(f"session has {len(session.steps)} steps, t_max is "
                   f"{session.config.t_max}")

    last = session.steps[-1] if session.steps else None
    if session.state is SessionState.COMPLETED:
        if last is None:
            out.append("state completed but no steps recorded")
        elif not last.is_finalized():
            out.append("state completed but the last step is not finalized")
        elif last.proposed_edits and last.depth < session.config.t_max:
            out.append("state completed below t_max with edits still being proposed")
    elif session.state is SessionState.AWAITING_DECISIONS:
        if last is None or last.is_finalized():
            out.append("state awaiting_decisions but no open step")
    elif session.state is SessionState.AWAITING_PROPOSAL:
        if last is not None and not last.is_finalized():
            out.append("state awaiting_proposal but the last step is still open")
        if last is not None and last.is_finalized():
            if not last.proposed_edits:
                out.append("state awaiting_proposal after a zero-edit step "
                           "(session should be completed)")
            elif last.depth >= session.config.t_max:
                out.append("state awaiting_proposal at t_max "
                           "(session should be completed)")
    return out
