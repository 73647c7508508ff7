"""Core domain types for iterative document revision.

Everything here is an immutable value: documents are snapshots, edits are
atomic token-level operations inside one sentence, and a session is the
ordered history of revision steps over one document. Mutation happens only
by building new values (see the ``with_*`` helpers on ``RevisionSession``).

All types share one canonical JSON encoding (snake_case field names, sorted
keys, no whitespace) which doubles as the persistence and wire format.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from enum import Enum


class DomainTag(str, Enum):
    ARXIV = "arxiv"
    WIKIPEDIA = "wikipedia"
    WIKINEWS = "wikinews"
    OTHER = "other"


class EditIntention(str, Enum):
    FLUENCY = "fluency"
    COHERENCE = "coherence"
    CLARITY = "clarity"
    STYLE = "style"


class EditKind(str, Enum):
    INSERT = "insert"
    DELETE = "delete"
    REPLACE = "replace"


class EditStatus(str, Enum):
    SUGGESTED = "suggested"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Mode(str, Enum):
    HUMAN_HUMAN = "human_human"
    SYSTEM_HUMAN = "system_human"
    SYSTEM_ONLY = "system_only"


class SessionState(str, Enum):
    AWAITING_PROPOSAL = "awaiting_proposal"
    AWAITING_DECISIONS = "awaiting_decisions"
    COMPLETED = "completed"


@dataclass(frozen=True)
class Token:
    """One token of a sentence; ``span`` is a [start, end) byte range into
    the owning document's UTF-8 text and ``surface`` equals that slice."""

    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    """A sentence span of a document plus its tokenization.

    ``start``/``end`` are byte offsets into the document text. Token spans
    are disjoint, increasing, and lie inside the sentence span.
    """

    index: int
    start: int
    end: int
    tokens: tuple[Token, ...]

    def token_surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass(frozen=True)
class Document:
    """An immutable text snapshot with exact sentence/token spans."""

    doc_id: str
    domain_tag: DomainTag
    text: str
    sentences: tuple[Sentence, ...]

    def sentence_text(self, index: int) -> str:
        s = self.sentences[index]
        return self.text.encode("utf-8")[s.start:s.end].decode("utf-8")


@dataclass(frozen=True)
class Edit:
    """One atomic insert/delete/replace of whole tokens within one sentence.

    ``anchor`` is the token offset in the source sentence where the edit
    applies: the first consumed token for delete/replace, the insertion
    point (0..len(tokens)) for insert. ``old_tokens`` is empty iff insert,
    ``new_tokens`` empty iff delete.
    """

    edit_id: str
    sentence_index: int
    kind: EditKind
    old_tokens: tuple[str, ...]
    new_tokens: tuple[str, ...]
    anchor: int
    intention: EditIntention
    status: EditStatus

    def source_span(self) -> tuple[int, int]:
        """Token range [start, end) this edit consumes in the source."""
        return self.anchor, self.anchor + len(self.old_tokens)


@dataclass(frozen=True)
class Decision:
    """A reviewer's verdict on one suggested edit."""

    edit_id: str
    verdict: Verdict
    reviewer_id: str
    timestamp: str


@dataclass(frozen=True)
class RevisionStep:
    """One revision depth: a source snapshot, the proposed edits, the
    review decisions, and (once every edit is decided) the resulting
    snapshot."""

    depth: int
    source: Document
    proposed_edits: tuple[Edit, ...]
    decisions: tuple[Decision, ...]
    result: Document | None

    def is_finalized(self) -> bool:
        return self.result is not None

    def undecided_edit_ids(self) -> list[str]:
        return [e.edit_id for e in self.proposed_edits if e.status is EditStatus.SUGGESTED]


@dataclass(frozen=True)
class SessionConfig:
    mode: Mode
    t_max: int = 3
    backend_id: str = "rule"
    suppress_previously_rejected: bool = False

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")


@dataclass(frozen=True)
class RevisionSession:
    """The full interaction history over one document.

    ``steps[i].depth == i + 1`` and each step's source is the previous
    step's result (the first step starts from ``original``).
    """

    session_id: str
    original: Document
    config: SessionConfig
    steps: tuple[RevisionStep, ...]
    state: SessionState

    def current_document(self) -> Document:
        for step in reversed(self.steps):
            if step.result is not None:
                return step.result
        return self.original

    def current_step(self) -> RevisionStep | None:
        return self.steps[-1] if self.steps else None

    def next_depth(self) -> int:
        return len(self.steps) + 1

    def with_step(self, step: RevisionStep, state: SessionState) -> "RevisionSession":
        return replace(self, steps=self.steps + (step,), state=state)

    def with_last_step(self, step: RevisionStep, state: SessionState) -> "RevisionSession":
        return replace(self, steps=self.steps[:-1] + (step,), state=state)


def make_edit_id(depth: int, sentence_index: int, anchor: int, kind: EditKind,
                 old_tokens: tuple[str, ...], new_tokens: tuple[str, ...]) -> str:
    """Stable edit identity: a hash of what the edit does and where.

    Survives re-serialization so decisions recorded against an id keep
    binding to the same edit.
    """
    payload = json.dumps(
        [depth, sentence_index, anchor, kind.value, list(old_tokens), list(new_tokens)],
        separators=(",", ":"), ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Canonical JSON encoding.
#
# One dict shape per type, snake_case keys. canonical_dumps() is
# deterministic (sorted keys, fixed separators), so encode(decode(x)) is
# byte-identical for canonical input.
# ---------------------------------------------------------------------------

def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def token_to_dict(t: Token) -> dict:
    return {"surface": t.surface, "span": [t.start, t.end]}


def token_from_dict(d: dict) -> Token:
    return Token(surface=d["surface"], start=d["span"][0], end=d["span"][1])


def sentence_to_dict(s: Sentence) -> dict:
    return {
        "index": s.index,
        "span": [s.start, s.end],
        "tokens": [token_to_dict(t) for t in s.tokens],
    }


def sentence_from_dict(d: dict) -> Sentence:
    return Sentence(
        index=d["index"],
        start=d["span"][0],
        end=d["span"][1],
        tokens=tuple(token_from_dict(t) for t in d["tokens"]),
    )


def document_to_dict(doc: Document) -> dict:
    return {
        "doc_id": doc.doc_id,
        "domain_tag": doc.domain_tag.value,
        "text": doc.text,
        "sentences": [sentence_to_dict(s) for s in doc.sentences],
    }


def document_from_dict(d: dict) -> Document:
    return Document(
        doc_id=d["doc_id"],
        domain_tag=DomainTag(d["domain_tag"]),
        text=d["text"],
        sentences=tuple(sentence_from_dict(s) for s in d["sentences"]),
    )


def edit_to_dict(e: Edit) -> dict:
    return {
        "edit_id": e.edit_id,
        "sentence_index": e.sentence_index,
        "kind": e.kind.value,
        "old_tokens": list(e.old_tokens),
        "new_tokens": list(e.new_tokens),
        "anchor": e.anchor,
        "intention": e.intention.value,
        "status": e.status.value,
    }


def edit_from_dict(d: dict) -> Edit:
    return Edit(
        edit_id=d["edit_id"],
        sentence_index=d["sentence_index"],
        kind=EditKind(d["kind"]),
        old_tokens=tuple(d["old_tokens"]),
        new_tokens=tuple(d["new_tokens"]),
        anchor=d["anchor"],
        intention=EditIntention(d["intention"]),
        status=EditStatus(d["status"]),
    )


def decision_to_dict(d: Decision) -> dict:
    return {
        "edit_id": d.edit_id,
        "verdict": d.verdict.value,
        "reviewer_id": d.reviewer_id,
        "timestamp": d.timestamp,
    }


def decision_from_dict(d: dict) -> Decision:
    return Decision(
        edit_id=d["edit_id"],
        verdict=Verdict(d["verdict"]),
        reviewer_id=d["reviewer_id"],
        timestamp=d["timestamp"],
    )


def step_to_dict(s: RevisionStep) -> dict:
    return {
        "depth": s.depth,
        "source": document_to_dict(s.source),
        "proposed_edits": [edit_to_dict(e) for e in s.proposed_edits],
        "decisions": [decision_to_dict(d) for d in s.decisions],
        "result": document_to_dict(s.result) if s.result is not None else None,
    }


def step_from_dict(d: dict) -> RevisionStep:
    return RevisionStep(
        depth=d["depth"],
        source=document_from_dict(d["source"]),
        proposed_edits=tuple(edit_from_dict(e) for e in d["proposed_edits"]),
        decisions=tuple(decision_from_dict(x) for x in d["decisions"]),
        result=document_from_dict(d["result"]) if d["result"] is not None else None,
    )


def config_to_dict(c: SessionConfig) -> dict:
    return {
        "mode": c.mode.value,
        "t_max": c.t_max,
        "backend_id": c.backend_id,
        "suppress_previously_rejected": c.suppress_previously_rejected,
    }


def config_from_dict(d: dict) -> SessionConfig:
    return SessionConfig(
        mode=Mode(d["mode"]),
        t_max=d["t_max"],
        backend_id=d["backend_id"],
        suppress_previously_rejected=d["suppress_previously_rejected"],
    )


def session_to_dict(s: RevisionSession) -> dict:
    return {
        "session_id": s.session_id,
        "original": document_to_dict(s.original),
        "config": config_to_dict(s.config),
        "steps": [step_to_dict(st) for st in s.steps],
        "state": s.state.value,
    }


def session_from_dict(d: dict) -> RevisionSession:
    return RevisionSession(
        session_id=d["session_id"],
        original=document_from_dict(d["original"]),
        config=config_from_dict(d["config"]),
        steps=tuple(step_from_dict(st) for st in d["steps"]),
        state=SessionState(d["state"]),
    )


def encode_session(s: RevisionSession) -> str:
    return canonical_dumps(session_to_dict(s))


def decode_session(raw: str) -> RevisionSession:
    return session_from_dict(json.loads(raw))
