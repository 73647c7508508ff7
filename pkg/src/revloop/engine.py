"""The revision loop: propose edits, collect verdicts, advance depth.

A session is a pure value; every operation returns a new session and never
mutates its input, so callers that serialize operations per session get
linearizable histories for free. Three backends are bundled:

* ``RuleBackend`` — deterministic lexicon rules, one intention per sentence
  per depth (the first priority rule that would change the sentence wins);
* ``ReplayBackend`` — replays a recorded version chain, one depth per
  recorded revision;
* ``RemoteBackend`` — JSON-over-HTTP client for an external model server.
"""

from __future__ import annotations

import uuid
from abc import ABC, abstractmethod
from collections import Counter, defaultdict
from dataclasses import dataclass, replace

import httpx

from .diff import align_versions, apply_decisions, extract_edits, materialize
from .model import (
    Decision,
    Document,
    Edit,
    EditIntention,
    EditStatus,
    Mode,
    RevisionSession,
    RevisionStep,
    Sentence,
    SessionConfig,
    SessionState,
    Verdict,
)
from .segment import render, tokenize

# Timestamp used for machine decisions; real clocks stay out of the engine
# so replays are reproducible.
EPOCH_TS = "1970-01-01T00:00:00Z"


class StateError(Exception):
    """Operation not allowed in the session's current state."""


class DepthExceededError(Exception):
    """A proposal was requested past the configured maximum depth."""


class BackendError(Exception):
    """A backend failed; the depth is aborted with no partial step."""


class AlignmentGapError(BackendError):
    """Replay could not find a recorded counterpart for a sentence."""


class UnknownEditError(Exception):
    """A decision references an edit id not in the current step."""


class UnresolvedEditsError(Exception):
    """Cannot advance while suggested edits remain undecided."""

    def __init__(self, edit_ids: list[str]):
        super().__init__(f"undecided edits: {', '.join(edit_ids)}")
        self.edit_ids = list(edit_ids)


class Backend(ABC):
    """The three-step revision contract: should this sentence change, with
    what intention, and into which tokens."""

    def prepare(self, document: Document, depth: int) -> None:
        """Called once before a depth's sentence sweep; default no-op."""

    @abstractmethod
    def predict_should_edit(self, sentence: Sentence) -> bool: ...

    @abstractmethod
    def predict_intention(self, sentence: Sentence) -> EditIntention: ...

    @abstractmethod
    def revise(self, sentence: Sentence, intention: EditIntention) -> list[str]: ...


def heuristic_intention(src_tokens: list[str], rev_tokens: list[str]) -> EditIntention:
    """Fixed fallback label for sentence pairs without a recorded intention:
    punctuation-only changes are fluency, three or more deleted tokens are
    clarity, everything else is style."""
    removed = Counter(src_tokens) - Counter(rev_tokens)
    added = Counter(rev_tokens) - Counter(src_tokens)
    changed = list(removed.elements()) + list(added.elements())
    if changed and all(not any(c.isalnum() for c in tok) for tok in changed):
        return EditIntention.FLUENCY
    if sum(removed.values()) >= 3:
        return EditIntention.CLARITY
    return EditIntention.STYLE


# ---------------------------------------------------------------------------
# Rule backend
# ---------------------------------------------------------------------------

_DEFAULT_STYLE = (("numerous", "extensive"), ("utilize", "use"), ("a lot of", "many"))
_DEFAULT_CLARITY = ("very", "really", "basically", "in order")
_DEFAULT_COHERENCE = ("we show that", "it is known that", "note that")
_DEFAULT_PRIORITY = (EditIntention.FLUENCY, EditIntention.COHERENCE,
                     EditIntention.CLARITY, EditIntention.STYLE)


@dataclass(frozen=True)
class RuleBackendConfig:
    """Lexicons for the deterministic backend.

    ``style_lexicon`` maps phrases to replacements; the clarity and
    coherence lexicons list phrases to delete outright. ``rule_priority``
    orders the intention rules; the first one that would change a sentence
    is the one proposed for it.
    """

    style_lexicon: tuple[tuple[str, str], ...] = _DEFAULT_STYLE
    clarity_filler_lexicon: tuple[str, ...] = _DEFAULT_CLARITY
    coherence_hedge_lexicon: tuple[str, ...] = _DEFAULT_COHERENCE
    rule_priority: tuple[EditIntention, ...] = _DEFAULT_PRIORITY

    def __post_init__(self):
        if not self.style_lexicon or not self.clarity_filler_lexicon \
                or not self.coherence_hedge_lexicon:
            raise ValueError("rule lexicons must be non-empty")
        if sorted(i.value for i in self.rule_priority) != \
                sorted(i.value for i in EditIntention):
            raise ValueError("rule_priority must be a permutation of the four intentions")


def _phrase_tokens(phrase: str) -> list[str]:
    return [t.surface.lower() for t in tokenize(phrase)]


class RuleBackend(Backend):
    def __init__(self, config: RuleBackendConfig = RuleBackendConfig()):
        self.config = config
        self._style = [(_phrase_tokens(k), [t.surface for t in tokenize(v)])
                       for k, v in config.style_lexicon]
        self._clarity = [_phrase_tokens(p) for p in config.clarity_filler_lexicon]
        self._coherence = [_phrase_tokens(p) for p in config.coherence_hedge_lexicon]

    def _apply_rule(self, intention: EditIntention, tokens: list[str]) -> list[str]:
        if intention is EditIntention.FLUENCY:
            return self._fluency(tokens)
        if intention is EditIntention.COHERENCE:
            return self._drop_phrases(tokens, self._coherence)
        if intention is EditIntention.CLARITY:
            return self._drop_phrases(tokens, self._clarity)
        return self._substitute(tokens, self._style)

    @staticmethod
    def _fluency(tokens: list[str]) -> list[str]:
        out: list[str] = []
        for tok in tokens:
            if out and tok.lower() == out[-1].lower():
                continue
            out.append(tok)
        for i, tok in enumerate(out):
            if tok[:1].isalpha():
                if not tok[:1].isupper():
                    out[i] = tok[:1].upper() + tok[1:]
                break
        return out

    @staticmethod
    def _drop_phrases(tokens: list[str], phrases: list[list[str]]) -> list[str]:
        low = [t.lower() for t in tokens]
        out: list[str] = []
        i = 0
        while i < len(tokens):
            span = 0
            for ph in phrases:
                if low[i:i + len(ph)] == ph:
                    span = len(ph)
                    break
            if span:
                i += span
            else:
                out.append(tokens[i])
                i += 1
        return out

    @staticmethod
    def _substitute(tokens: list[str], rules: list[tuple[list[str], list[str]]]) -> list[str]:
        low = [t.lower() for t in tokens]
        out: list[str] = []
        i = 0
        while i < len(tokens):
            hit = None
            for key, value in rules:
                if low[i:i + len(key)] == key:
                    hit = (len(key), value)
                    break
            if hit:
                out.extend(hit[1])
                i += hit[0]
            else:
                out.append(tokens[i])
                i += 1
        return out

    def _first_firing_rule(self, tokens: list[str]) -> EditIntention | None:
        for intention in self.config.rule_priority:
            if self._apply_rule(intention, tokens) != tokens:
                return intention
        return None

    def predict_should_edit(self, sentence: Sentence) -> bool:
        return self._first_firing_rule(sentence.token_surfaces()) is not None

    def predict_intention(self, sentence: Sentence) -> EditIntention:
        intention = self._first_firing_rule(sentence.token_surfaces())
        if intention is None:
            raise BackendError("no rule applies to this sentence")
        return intention

    def revise(self, sentence: Sentence, intention: EditIntention) -> list[str]:
        return self._apply_rule(intention, sentence.token_surfaces())


# ---------------------------------------------------------------------------
# Replay backend
# ---------------------------------------------------------------------------

class ReplayBackend(Backend):
    """Replays a recorded version chain D^0..D^k one depth at a time.

    ``prepare`` aligns the session's current document against the recorded
    version for the requested depth; sentences with a recorded counterpart
    revise into it, unaligned sentences fall back to identity (kept
    unchanged). Calling ``revise`` directly on an unaligned sentence raises
    AlignmentGapError. ``intentions`` optionally maps (depth,
    source-sentence-index) to a recorded label; pairs without one get the
    fixed heuristic label.
    """

    def __init__(self, chain: list[Document],
                 intentions: dict[tuple[int, int], EditIntention] | None = None):
        if len(chain) < 2:
            raise ValueError("a version chain needs at least two versions")
        self.chain = list(chain)
        self.intentions = dict(intentions or {})
        self._depth = 0
        self._targets: dict[int, list[str]] = {}
        self._gaps: set[int] = set()

    def prepare(self, document: Document, depth: int) -> None:
        self._depth = depth
        self._targets = {}
        self._gaps = set()
        if depth >= len(self.chain):
            return
        target_doc = self.chain[depth]
        for i, j in align_versions(document, target_doc):
            if i is None:
                continue
            if j is None:
                self._gaps.add(i)
            else:
                self._targets[i] = target_doc.sentences[j].token_surfaces()

    def predict_should_edit(self, sentence: Sentence) -> bool:
        target = self._targets.get(sentence.index)
        return target is not None and target != sentence.token_surfaces()

    def predict_intention(self, sentence: Sentence) -> EditIntention:
        recorded = self.intentions.get((self._depth, sentence.index))
        if recorded is not None:
            return recorded
        src = sentence.token_surfaces()
        return heuristic_intention(src, self._targets.get(sentence.index, src))

    def revise(self, sentence: Sentence, intention: EditIntention) -> list[str]:
        if sentence.index in self._gaps:
            raise AlignmentGapError(
                f"sentence {sentence.index} has no recorded counterpart at depth "
                f"{self._depth}")
        target = self._targets.get(sentence.index)
        return sentence.token_surfaces() if target is None else list(target)


# ---------------------------------------------------------------------------
# Remote backend
# ---------------------------------------------------------------------------

class RemoteBackend(Backend):
    """HTTP client for an external revision model.

    Endpoints: POST /v1/should_edit {sentence} -> {edit: bool};
    POST /v1/intention {sentence} -> {intention}; POST /v1/revise
    {sentence, intention} -> {tokens: [...]}. Any transport error, timeout,
    non-2xx status, or malformed body raises BackendError.
    """

    def __init__(self, base_url: str, timeout: float = 5.0,
                 client: httpx.Client | None = None):
        self._client = client or httpx.Client(base_url=base_url, timeout=timeout)

    def _post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
            response.raise_for_status()
            body = response.json()
        except httpx.HTTPError as exc:
            raise BackendError(f"remote backend call {path} failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"remote backend returned non-JSON from {path}") from exc
        if not isinstance(body, dict):
            raise BackendError(f"remote backend returned non-object from {path}")
        return body

    def predict_should_edit(self, sentence: Sentence) -> bool:
        body = self._post("/v1/should_edit",
                          {"sentence": render(sentence.token_surfaces())})
        if not isinstance(body.get("edit"), bool):
            raise BackendError("should_edit response missing boolean 'edit'")
        return body["edit"]

    def predict_intention(self, sentence: Sentence) -> EditIntention:
        body = self._post("/v1/intention",
                          {"sentence": render(sentence.token_surfaces())})
        try:
            return EditIntention(body.get("intention"))
        except ValueError as exc:
            raise BackendError(
                f"intention response carried unknown label {body.get('intention')!r}"
            ) from exc

    def revise(self, sentence: Sentence, intention: EditIntention) -> list[str]:
        body = self._post("/v1/revise",
                          {"sentence": render(sentence.token_surfaces()),
                           "intention": intention.value})
        tokens = body.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise BackendError("revise response missing string list 'tokens'")
        return tokens


# ---------------------------------------------------------------------------
# Session operations
# ---------------------------------------------------------------------------

def new_session(document: Document, config: SessionConfig,
                session_id: str | None = None) -> RevisionSession:
    return RevisionSession(
        session_id=session_id or uuid.uuid4().hex,
        original=document,
        config=config,
        steps=(),
        state=SessionState.AWAITING_PROPOSAL,
    )


def _rejected_keys(session: RevisionSession) -> set[tuple]:
    keys = set()
    for step in session.steps:
        for e in step.proposed_edits:
            if e.status is EditStatus.REJECTED:
                keys.add((step.source.sentence_text(e.sentence_index), e.anchor,
                          e.kind, e.old_tokens, e.new_tokens))
    return keys


def propose(session: RevisionSession,
            backend: Backend) -> tuple[RevisionSession, RevisionStep]:
    """Run one backend sweep and append the resulting step.

    Zero proposed edits finalize the step immediately (result = source) and
    complete the session; otherwise the session awaits decisions.
    """
    if session.state is not SessionState.AWAITING_PROPOSAL:
        raise StateError(f"cannot propose in state {session.state.value}")
    if len(session.steps) >= session.config.t_max:
        raise DepthExceededError(
            f"session already has {len(session.steps)} of {session.config.t_max} steps")

    depth = session.next_depth()
    source = session.current_document()
    suppressed = (_rejected_keys(session)
                  if session.config.suppress_previously_rejected else set())

    edits: list[Edit] = []
    try:
        backend.prepare(source, depth)
        for sentence in source.sentences:
            if not backend.predict_should_edit(sentence):
                continue
            intention = backend.predict_intention(sentence)
            rev_tokens = backend.revise(sentence, intention)
            for e in extract_edits(sentence, rev_tokens, intention, depth=depth):
                key = (source.sentence_text(e.sentence_index), e.anchor, e.kind,
                       e.old_tokens, e.new_tokens)
                if key in suppressed:
                    continue
                edits.append(e)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"backend failed during proposal: {exc}") from exc

    if not edits:
        step = RevisionStep(depth=depth, source=source, proposed_edits=(),
                            decisions=(), result=source)
        return session.with_step(step, SessionState.COMPLETED), step
    step = RevisionStep(depth=depth, source=source, proposed_edits=tuple(edits),
                        decisions=(), result=None)
    return session.with_step(step, SessionState.AWAITING_DECISIONS), step


def record_decisions(session: RevisionSession,
                     decisions: list[Decision]) -> RevisionSession:
    """Fold reviewer verdicts into the open step.

    One log entry per (edit, reviewer): re-submitting an identical decision
    is a no-op, a changed verdict moves that reviewer's entry to the end of
    the log. An edit's status tracks the newest entry that mentions it, so
    conflicting reviewers resolve last-writer-wins with both retained.
    """
    if session.state is not SessionState.AWAITING_DECISIONS:
        raise StateError(f"cannot record decisions in state {session.state.value}")
    step = session.current_step()
    known = {e.edit_id for e in step.proposed_edits}
    for d in decisions:
        if d.edit_id not in known:
            raise UnknownEditError(f"unknown edit {d.edit_id}")

    log = list(step.decisions)
    for d in decisions:
        prior = next((i for i, x in enumerate(log)
                      if x.edit_id == d.edit_id and x.reviewer_id == d.reviewer_id),
                     None)
        if prior is not None:
            if log[prior].verdict is d.verdict:
                continue
            del log[prior]
        log.append(d)

    last_verdict: dict[str, Verdict] = {}
    for entry in log:
        last_verdict[entry.edit_id] = entry.verdict
    new_edits = tuple(
        replace(e, status=(
            EditStatus.SUGGESTED if e.edit_id not in last_verdict
            else EditStatus.ACCEPTED if last_verdict[e.edit_id] is Verdict.ACCEPT
            else EditStatus.REJECTED))
        for e in step.proposed_edits
    )
    new_step = replace(step, proposed_edits=new_edits, decisions=tuple(log))
    return session.with_last_step(new_step, SessionState.AWAITING_DECISIONS)


def advance(session: RevisionSession) -> RevisionSession:
    """Finalize the open step by applying accepted edits; either complete
    the session (at t_max) or await the next proposal."""
    if session.state is not SessionState.AWAITING_DECISIONS:
        raise StateError(f"cannot advance in state {session.state.value}")
    step = session.current_step()
    undecided = step.undecided_edit_ids()
    if undecided:
        raise UnresolvedEditsError(undecided)

    by_sentence = defaultdict(list)
    for e in step.proposed_edits:
        by_sentence[e.sentence_index].append(e)
    results = {}
    for idx, sentence_edits in by_sentence.items():
        if any(e.status is EditStatus.ACCEPTED for e in sentence_edits):
            results[idx] = apply_decisions(step.source.sentences[idx], sentence_edits)
    result = materialize(step.source, results)

    new_step = replace(step, result=result)
    done = step.depth >= session.config.t_max
    state = SessionState.COMPLETED if done else SessionState.AWAITING_PROPOSAL
    return session.with_last_step(new_step, state)


def run_system_only(document: Document, config: SessionConfig, backend: Backend,
                    session_id: str | None = None, reviewer_id: str = "system",
                    timestamp: str = EPOCH_TS) -> RevisionSession:
    """Drive a session to completion accepting every proposed edit."""
    if config.mode is not Mode.SYSTEM_ONLY:
        raise ValueError("run_system_only requires mode system_only")
    session = new_session(document, config, session_id)
    while session.state is SessionState.AWAITING_PROPOSAL:
        session, step = propose(session, backend)
        if session.state is not SessionState.AWAITING_DECISIONS:
            break
        accept_all = [Decision(edit_id=e.edit_id, verdict=Verdict.ACCEPT,
                               reviewer_id=reviewer_id, timestamp=timestamp)
                      for e in step.proposed_edits]
        session = record_decisions(session, accept_all)
        session = advance(session)
    return session
