"""File-backed persistence: sessions, documents, logs, corpora, exports.

Layout under one root directory:

    sessions/<session_id>.json      one canonical-JSON session per file
    documents/<doc_id>.json         documents available to new sessions
    logs/decisions.jsonl            append-only audit log of every verdict
    logs/quality.jsonl              quality judgments per finished session
    corpus/chains.jsonl             ingested version chains (one doc per line)
    export/dataset.jsonl            exported revision records

Writes go through a temp file plus atomic rename, so a crash mid-write
leaves the previous version intact. The decision log is append-only: a
changed verdict appends a new line, nothing is rewritten.

Corpus input is JSON Lines, one object per document:
``{"doc_id": ..., "domain": ..., "versions": [text_0, text_1, ...]}``
where ``versions[t]`` is the document after revision depth t.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .diff import align_versions, apply_all, extract_edits
from .engine import heuristic_intention
from .metrics import CorpusStats, corpus_stats
from .model import (
    Decision,
    Document,
    DomainTag,
    Edit,
    EditIntention,
    RevisionSession,
    canonical_dumps,
    decision_from_dict,
    decision_to_dict,
    decode_session,
    document_from_dict,
    document_to_dict,
    edit_from_dict,
    edit_to_dict,
    encode_session,
)
from .segment import SegmenterConfig, DEFAULT_SEGMENTER, build_document, render


class NotFoundError(Exception):
    """No stored object under the requested id."""


class StorageError(Exception):
    """An I/O failure or a corrupt stored file."""


class ParseError(Exception):
    """A corpus or dataset line failed to parse; names file and line."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


class EmptyCorpusError(Exception):
    """The corpus file contained no documents."""


@dataclass(frozen=True)
class CorpusRecord:
    """One revised sentence at one depth: the before/after texts, the edits
    between them, and any review decisions. ``intention`` is the recorded
    sentence-level label when one exists; the per-edit labels inside
    ``edits`` fall back to a fixed heuristic otherwise."""

    doc_id: str
    domain_tag: DomainTag
    depth: int
    sentence_index: int
    before_sentence: str
    after_sentence: str
    intention: EditIntention | None
    edits: tuple[Edit, ...]
    decisions: tuple[Decision, ...]


def record_to_dict(r: CorpusRecord) -> dict:
    return {
        "doc_id": r.doc_id,
        "domain_tag": r.domain_tag.value,
        "depth": r.depth,
        "sentence_index": r.sentence_index,
        "before_sentence": r.before_sentence,
        "after_sentence": r.after_sentence,
        "intention": r.intention.value if r.intention is not None else None,
        "edits": [edit_to_dict(e) for e in r.edits],
        "decisions": [decision_to_dict(d) for d in r.decisions],
    }


def record_from_dict(d: dict) -> CorpusRecord:
    return CorpusRecord(
        doc_id=d["doc_id"],
        domain_tag=DomainTag(d["domain_tag"]),
        depth=d["depth"],
        sentence_index=d["sentence_index"],
        before_sentence=d["before_sentence"],
        after_sentence=d["after_sentence"],
        intention=(EditIntention(d["intention"])
                   if d["intention"] is not None else None),
        edits=tuple(edit_from_dict(e) for e in d["edits"]),
        decisions=tuple(decision_from_dict(x) for x in d["decisions"]),
    )


# ---------------------------------------------------------------------------
# Corpus parsing and record construction
# ---------------------------------------------------------------------------

def parse_corpus(path, cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> list[list[Document]]:
    """Parse a version-chain corpus file into document chains."""
    chains: list[list[Document]] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "expected a JSON object")
            doc_id = obj.get("doc_id")
            domain = obj.get("domain")
            versions = obj.get("versions")
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError(path, line_no, "missing or empty doc_id")
            if doc_id in seen_ids:
                raise ParseError(path, line_no, f"duplicate doc_id {doc_id!r}")
            try:
                domain_tag = DomainTag(domain)
            except ValueError:
                raise ParseError(path, line_no, f"unknown domain {domain!r}") from None
            if (not isinstance(versions, list) or not versions
                    or not all(isinstance(v, str) and v for v in versions)):
                raise ParseError(path, line_no,
                                 "versions must be a non-empty list of non-empty strings")
            seen_ids.add(doc_id)
            chains.append([build_document(doc_id, domain_tag, text, cfg)
                           for text in versions])
    if not chains:
        raise EmptyCorpusError(f"{path} holds no documents")
    return chains


def records_from_chains(chains: list[list[Document]]) -> list[CorpusRecord]:
    """One record per revised sentence pair across consecutive versions.
    Intentions come from the fixed heuristic (chains carry no labels)."""
    records = []
    for chain in chains:
        for depth, (before, after) in enumerate(zip(chain, chain[1:]), start=1):
            for i, j in align_versions(before, after):
                if i is None or j is None:
                    continue
                src_sentence = before.sentences[i]
                target = after.sentences[j].token_surfaces()
                if src_sentence.token_surfaces() == target:
                    continue
                label = heuristic_intention(src_sentence.token_surfaces(), target)
                edits = extract_edits(src_sentence, target, label, depth=depth)
                records.append(CorpusRecord(
                    doc_id=before.doc_id,
                    domain_tag=before.domain_tag,
                    depth=depth,
                    sentence_index=i,
                    before_sentence=before.sentence_text(i),
                    after_sentence=after.sentence_text(j),
                    intention=None,
                    edits=tuple(edits),
                    decisions=(),
                ))
    return records


def export_records(sessions: Iterable[RevisionSession]) -> list[CorpusRecord]:
    """One record per (depth, edited sentence) across the given sessions.

    ``after_sentence`` renders the full proposed revision (every edit
    applied, verdicts ignored); accept/reject information travels in the
    edits' statuses and the decision entries. Ordering is (doc_id, depth,
    sentence_index).
    """
    records = []
    for session in sessions:
        doc_id = session.original.doc_id
        domain = session.original.domain_tag
        for step in session.steps:
            by_sentence: dict[int, list[Edit]] = {}
            for e in step.proposed_edits:
                by_sentence.setdefault(e.sentence_index, []).append(e)
            for sent_idx, edits in sorted(by_sentence.items()):
                ids = {e.edit_id for e in edits}
                decisions = tuple(d for d in step.decisions if d.edit_id in ids)
                after = render(apply_all(step.source.sentences[sent_idx], edits))
                records.append(CorpusRecord(
                    doc_id=doc_id,
                    domain_tag=domain,
                    depth=step.depth,
                    sentence_index=sent_idx,
                    before_sentence=step.source.sentence_text(sent_idx),
                    after_sentence=after,
                    intention=edits[0].intention,
                    edits=tuple(edits),
                    decisions=decisions,
                ))
    records.sort(key=lambda r: (r.doc_id, r.depth, r.sentence_index))
    return records


def load_dataset(path) -> list[CorpusRecord]:
    """Read an exported dataset file back into records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(record_from_dict(obj))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(path, line_no, f"invalid dataset record ({exc})") from exc
    return records


# ---------------------------------------------------------------------------
# Corpus split
# ---------------------------------------------------------------------------

def split_corpus(doc_ids: Iterable[str], ratios: tuple[int, int, int] = (8, 1, 1),
                 seed: int = 0) -> dict[str, list[str]]:
    """Partition documents into train/validation/test by document id.

    Documents are ordered by a seeded content hash (stable across runs and
    processes), then cut by largest-remainder quotas, so each part's size is
    within one document of its exact proportional share and no document
    appears twice.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive numbers")
    ids = sorted(set(doc_ids),
                 key=lambda i: hashlib.sha256(f"{seed}:{i}".encode()).hexdigest())
    n = len(ids)
    total = sum(ratios)
    shares = [n * r / total for r in ratios]
    counts = [int(s) for s in shares]
    leftover = n - sum(counts)
    by_remainder = sorted(range(3), key=lambda k: (-(shares[k] - counts[k]), k))
    for k in by_remainder[:leftover]:
        counts[k] += 1
    cut1, cut2 = counts[0], counts[0] + counts[1]
    return {
        "train": ids[:cut1],
        "validation": ids[cut1:cut2],
        "test": ids[cut2:],
    }


# ---------------------------------------------------------------------------
# The store
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise StorageError(f"cannot write {path}: {exc}") from exc


def _append_line(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise StorageError(f"cannot append to {path}: {exc}") from exc


class SessionStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths ------------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.json"

    def _document_path(self, doc_id: str) -> Path:
        return self.root / "documents" / f"{doc_id}.json"

    @property
    def decisions_log_path(self) -> Path:
        return self.root / "logs" / "decisions.jsonl"

    @property
    def quality_log_path(self) -> Path:
        return self.root / "logs" / "quality.jsonl"

    @property
    def chains_path(self) -> Path:
        return self.root / "corpus" / "chains.jsonl"

    @property
    def export_path(self) -> Path:
        return self.root / "export" / "dataset.jsonl"

    # -- sessions ----------------------------------------------------------

    def save_session(self, session: RevisionSession):
        _atomic_write(self._session_path(session.session_id), encode_session(session))

    def load_session(self, session_id: str) -> RevisionSession:
        path = self._session_path(session_id)
        if not path.exists():
            raise NotFoundError(f"no session {session_id!r}")
        try:
            return decode_session(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise StorageError(f"corrupt session file {path}: {exc}") from exc

    def list_sessions(self) -> list[str]:
        folder = self.root / "sessions"
        if not folder.is_dir():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))

    def load_all_sessions(self) -> list[RevisionSession]:
        return [self.load_session(sid) for sid in self.list_sessions()]

    # -- documents ----------------------------------------------------------

    def save_document(self, document: Document):
        _atomic_write(self._document_path(document.doc_id),
                      canonical_dumps(document_to_dict(document)))

    def load_document(self, doc_id: str) -> Document:
        path = self._document_path(doc_id)
        if not path.exists():
            raise NotFoundError(f"no document {doc_id!r}")
        try:
            return document_from_dict(json.loads(path.read_text(encoding="utf-8")))
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise StorageError(f"corrupt document file {path}: {exc}") from exc

    def list_documents(self) -> list[Document]:
        folder = self.root / "documents"
        if not folder.is_dir():
            return []
        return [self.load_document(p.stem) for p in sorted(folder.glob("*.json"))]

    # -- logs ----------------------------------------------------------------

    def append_decisions(self, session_id: str, depth: int,
                         decisions: Iterable[Decision]):
        """Audit log: one line per submitted verdict, never rewritten."""
        for d in decisions:
            entry = {"session_id": session_id, "depth": depth}
            entry.update(decision_to_dict(d))
            _append_line(self.decisions_log_path, canonical_dumps(entry))

    def log_quality(self, session_id: str, judgments, mean_score: float):
        entry = {
            "session_id": session_id,
            "judgments": [{"judge_id": j.judge_id, "score": j.score}
                          for j in judgments],
            "mean": mean_score,
        }
        _append_line(self.quality_log_path, canonical_dumps(entry))

    # -- corpus ----------------------------------------------------------------

    def ingest(self, corpus_path,
               cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> CorpusStats:
        """Parse a version-chain corpus, keep a normalized copy, and make
        every chain's original version available as a document."""
        chains = parse_corpus(corpus_path, cfg)
        lines = []
        for chain in chains:
            lines.append(canonical_dumps({
                "doc_id": chain[0].doc_id,
                "domain": chain[0].domain_tag.value,
                "versions": [doc.text for doc in chain],
            }))
        _atomic_write(self.chains_path, "\n".join(lines) + "\n")
        for chain in chains:
            self.save_document(chain[0])
        return corpus_stats(chains)

    def load_chains(self, cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> list[list[Document]]:
        if not self.chains_path.exists():
            return []
        return parse_corpus(self.chains_path, cfg)

    def load_chain(self, doc_id: str,
                   cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> list[Document]:
        for chain in self.load_chains(cfg):
            if chain[0].doc_id == doc_id:
                return chain
        raise NotFoundError(f"no ingested version chain for document {doc_id!r}")

    # -- export ----------------------------------------------------------------

    def export_dataset(self, sessions: Iterable[RevisionSession] | None = None) -> Path:
        """Write the revision dataset for the given sessions (default: all
        stored sessions) and return the file path."""
        if sessions is None:
            sessions = self.load_all_sessions()
        records = export_records(sessions)
        body = "".join(canonical_dumps(record_to_dict(r)) + "\n" for r in records)
        _atomic_write(self.export_path, body)
        return self.export_path
