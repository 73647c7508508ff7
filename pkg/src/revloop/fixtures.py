"""Bundled reference session logs with known acceptance arithmetic.

Two deterministic session sets are built through the real engine ops
(propose / record_decisions / advance) using a scripted backend:

* depth set — 30 documents revised at depth 1 (177 edits, 87 accepted),
  24 continuing to depth 2 (94 edits, 63 accepted), 20 to depth 3
  (67 edits, 38 accepted), giving per-depth acceptance percentages
  49.1525 / 67.0213 / 56.7164;
* intention set — single-depth sessions totalling fluency 91/41,
  coherence 141/68, clarity 332/195, style 113/73 proposed/accepted,
  giving 45.0549 / 48.2270 / 58.7349 / 64.6018 percent.

Tests assert those exact ratios; the CLI can install both sets into a
store for demos (`revloop fixtures`).
"""

from __future__ import annotations

from .engine import (
    EPOCH_TS,
    Backend,
    advance,
    new_session,
    propose,
    record_decisions,
)
from .model import (
    Decision,
    Document,
    DomainTag,
    EditIntention,
    Mode,
    RevisionSession,
    Sentence,
    SessionConfig,
    SessionState,
    Verdict,
)
from .segment import build_document, render

REVIEWER = "r1"


def _quota(total: int, parts: int) -> list[int]:
    """Split ``total`` into ``parts`` near-equal integer shares."""
    base, rem = divmod(total, parts)
    return [base + 1 if i < rem else base for i in range(parts)]


class ScriptedBackend(Backend):
    """Proposes a planned number of isolated one-token replacements.

    ``plan`` maps (doc_id, depth) to (n_edits, intention); the backend
    replaces the tokens at even positions 0, 2, ... with fresh
    depth-tagged names, so each replacement is a separate edit.
    """

    def __init__(self, plan: dict[tuple[str, int], tuple[int, EditIntention]]):
        self.plan = dict(plan)
        self._doc_id = ""
        self._depth = 0

    def prepare(self, document: Document, depth: int) -> None:
        self._doc_id = document.doc_id
        self._depth = depth

    def _current_plan(self) -> tuple[int, EditIntention] | None:
        return self.plan.get((self._doc_id, self._depth))

    def predict_should_edit(self, sentence: Sentence) -> bool:
        planned = self._current_plan()
        return planned is not None and planned[0] > 0

    def predict_intention(self, sentence: Sentence) -> EditIntention:
        planned = self._current_plan()
        assert planned is not None
        return planned[1]

    def revise(self, sentence: Sentence, intention: EditIntention) -> list[str]:
        planned = self._current_plan()
        assert planned is not None
        tokens = sentence.token_surfaces()
        for k in range(planned[0]):
            tokens[2 * k] = f"d{self._depth}k{k}"
        return tokens


def _base_document(doc_id: str, n_words: int = 16) -> Document:
    tokens = ["W0"] + [f"w{i}" for i in range(1, n_words)] + ["."]
    return build_document(doc_id, DomainTag.OTHER, render(tokens))


def _run_scripted(doc_id: str, t_max: int,
                  per_depth: dict[int, tuple[int, int, EditIntention]]) -> RevisionSession:
    """Drive one session: at each planned depth propose n edits, accept the
    first k, reject the rest."""
    backend = ScriptedBackend({(doc_id, depth): (n, intention)
                               for depth, (n, _k, intention) in per_depth.items()})
    config = SessionConfig(mode=Mode.SYSTEM_HUMAN, t_max=t_max, backend_id="scripted")
    session = new_session(_base_document(doc_id), config, session_id=doc_id)
    while session.state is SessionState.AWAITING_PROPOSAL:
        session, step = propose(session, backend)
        if session.state is not SessionState.AWAITING_DECISIONS:
            break
        _n, accept_k, _intention = per_depth[step.depth]
        decisions = [
            Decision(edit_id=e.edit_id,
                     verdict=Verdict.ACCEPT if i < accept_k else Verdict.REJECT,
                     reviewer_id=REVIEWER, timestamp=EPOCH_TS)
            for i, e in enumerate(step.proposed_edits)
        ]
        session = record_decisions(session, decisions)
        session = advance(session)
    return session


def reference_depth_sessions() -> list[RevisionSession]:
    """30 sessions whose per-depth totals are 177/87, 94/63, and 67/38
    proposed/accepted over 30, 24, and 20 documents."""
    doc_count = [30, 24, 20]
    edit_totals = [177, 94, 67]
    accept_totals = [87, 63, 38]
    quotas = {
        depth + 1: (_quota(edit_totals[depth], doc_count[depth]),
                    _quota(accept_totals[depth], doc_count[depth]))
        for depth in range(3)
    }
    sessions = []
    for d in range(30):
        per_depth = {}
        for depth in (1, 2, 3):
            edits_q, accepts_q = quotas[depth]
            if d < len(edits_q):
                per_depth[depth] = (edits_q[d], accepts_q[d], EditIntention.STYLE)
        sessions.append(_run_scripted(f"depth-doc-{d:02d}", 3, per_depth))
    return sessions


def reference_intention_sessions() -> list[RevisionSession]:
    """Single-depth sessions with per-intention totals fluency 91/41,
    coherence 141/68, clarity 332/195, style 113/73."""
    table = [
        (EditIntention.FLUENCY, 13, 91, 41),
        (EditIntention.COHERENCE, 21, 141, 68),
        (EditIntention.CLARITY, 48, 332, 195),
        (EditIntention.STYLE, 17, 113, 73),
    ]
    sessions = []
    for intention, docs, edit_total, accept_total in table:
        edits_q = _quota(edit_total, docs)
        accepts_q = _quota(accept_total, docs)
        for d in range(docs):
            doc_id = f"intent-{intention.value}-{d:02d}"
            per_depth = {1: (edits_q[d], accepts_q[d], intention)}
            sessions.append(_run_scripted(doc_id, 1, per_depth))
    return sessions


def install_reference_store(store) -> int:
    """Write both reference session sets into a store; returns the count."""
    sessions = reference_depth_sessions() + reference_intention_sessions()
    for session in sessions:
        store.save_session(session)
        for step in session.steps:
            if step.decisions:
                store.append_decisions(session.session_id, step.depth, step.decisions)
    return len(sessions)
