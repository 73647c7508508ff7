"""Token-level edit extraction and application.

``extract_edits`` aligns a source sentence with a revised token list by
longest common subsequence and turns every maximal run of non-matching
tokens into a single edit: deletions only -> delete, insertions only ->
insert, both -> replace. Edits are whole-token, non-overlapping, sorted by
anchor, and applying all of them reproduces the revision exactly; the total
number of edited tokens is minimal.

``apply_decisions`` replays an edit list over the source, honoring each
edit's accept/reject status, and ``materialize`` rebuilds a full document
from per-sentence results. ``align_versions`` pairs up sentences across two
document versions for replay and corpus ingestion.
"""

from __future__ import annotations

from collections import Counter

from ._kernels import encode_pair, lcs_table
from .model import (
    Document,
    Edit,
    EditIntention,
    EditKind,
    EditStatus,
    Sentence,
    make_edit_id,
)
from .segment import SegmenterConfig, DEFAULT_SEGMENTER, build_document, render


class OverlapError(Exception):
    """Two accepted edits claim the same source token."""


class UnresolvedEditError(Exception):
    """An edit is still suggested; it must be accepted or rejected first."""


def lcs_opcodes(a: list[str], b: list[str]) -> list[tuple[str, int, int]]:
    """Alignment walk over two token lists.

    Returns ("eq"|"del"|"ins", i, j) steps in order. Ties prefer consuming
    the source first (leftmost backtrace), which makes the walk, and
    everything built on it, deterministic.
    """
    a_ids, b_ids = encode_pair(a, b)
    table = lcs_table(a_ids, b_ids)
    m, n = len(a), len(b)
    ops = []
    i = j = 0
    while i < m and j < n:
        if a[i] == b[j] and table[i, j] == table[i + 1, j + 1] + 1:
            ops.append(("eq", i, j))
            i += 1
            j += 1
        elif table[i + 1, j] >= table[i, j + 1]:
            ops.append(("del", i, j))
            i += 1
        else:
            ops.append(("ins", i, j))
            j += 1
    for k in range(i, m):
        ops.append(("del", k, n))
    for k in range(j, n):
        ops.append(("ins", m, k))
    return ops


def extract_edits(src: Sentence, rev_tokens: list[str], intention: EditIntention,
                  depth: int = 0) -> list[Edit]:
    """Minimal edit script from a source sentence to a revised token list.

    Each returned edit carries ``intention`` and status suggested. ``depth``
    only feeds the edit-id hash (pass the revision depth when proposing).
    """
    a = src.token_surfaces()
    b = list(rev_tokens)
    edits: list[Edit] = []

    run_del: list[str] = []
    run_ins: list[str] = []
    run_anchor = 0

    def flush():
        if not run_del and not run_ins:
            return
        anchor = run_anchor
        if run_del and run_ins:
            kind = EditKind.REPLACE
        elif run_del:
            kind = EditKind.DELETE
        else:
            kind = EditKind.INSERT
        old = tuple(run_del)
        new = tuple(run_ins)
        edits.append(Edit(
            edit_id=make_edit_id(depth, src.index, anchor, kind, old, new),
            sentence_index=src.index,
            kind=kind,
            old_tokens=old,
            new_tokens=new,
            anchor=anchor,
            intention=intention,
            status=EditStatus.SUGGESTED,
        ))
        run_del.clear()
        run_ins.clear()

    # The source index does not advance on inserts, so the first op of a run
    # pins the anchor for the whole run.
    for op, i, j in lcs_opcodes(a, b):
        if op == "eq":
            flush()
        elif op == "del":
            if not run_del and not run_ins:
                run_anchor = i
            run_del.append(a[i])
        else:
            if not run_del and not run_ins:
                run_anchor = i
            run_ins.append(b[j])
    flush()
    return edits


def apply_decisions(src: Sentence, edits: list[Edit]) -> list[str]:
    """Apply the accepted subset of ``edits`` to the source tokens.

    Walks the source left to right; accepted edits substitute their new
    tokens for their old ones, rejected edits leave the source untouched.
    """
    for e in edits:
        if e.status is EditStatus.SUGGESTED:
            raise UnresolvedEditError(f"edit {e.edit_id} has no verdict")

    accepted = sorted((e for e in edits if e.status is EditStatus.ACCEPTED),
                      key=lambda e: (e.anchor, e.anchor + len(e.old_tokens)))
    src_tokens = src.token_surfaces()
    out: list[str] = []
    pos = 0
    for e in accepted:
        start, end = e.source_span()
        if start < pos:
            raise OverlapError(
                f"edit {e.edit_id} overlaps a previously applied edit at token {start}")
        if end > len(src_tokens):
            raise OverlapError(
                f"edit {e.edit_id} consumes tokens past the end of the sentence")
        if tuple(src_tokens[start:end]) != e.old_tokens:
            raise ValueError(
                f"edit {e.edit_id} old_tokens do not match the source at anchor {start}")
        out.extend(src_tokens[pos:start])
        out.extend(e.new_tokens)
        pos = end
    out.extend(src_tokens[pos:])
    return out


def apply_all(src: Sentence, edits: list[Edit]) -> list[str]:
    """Apply every edit regardless of status (the full proposed revision)."""
    forced = [Edit(e.edit_id, e.sentence_index, e.kind, e.old_tokens, e.new_tokens,
                   e.anchor, e.intention, EditStatus.ACCEPTED) for e in edits]
    return apply_decisions(src, forced)


def materialize(source_doc: Document, per_sentence_results: dict[int, list[str]],
                cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> Document:
    """Rebuild a document from per-sentence token results.

    Sentences absent from the map keep their original text; present ones are
    rendered from their token lists. The assembled text is re-segmented and
    re-tokenized, so downstream steps always see exact spans.
    """
    n = len(source_doc.sentences)
    for idx in per_sentence_results:
        if not 0 <= idx < n:
            raise IndexError(f"sentence index {idx} out of range for {n} sentences")
    parts = []
    for s in source_doc.sentences:
        if s.index in per_sentence_results:
            parts.append(render(per_sentence_results[s.index]))
        else:
            parts.append(source_doc.sentence_text(s.index))
    text = " ".join(p for p in parts if p)
    return build_document(source_doc.doc_id, source_doc.domain_tag, text, cfg)


def _token_overlap(a: list[str], b: list[str]) -> float:
    """Dice coefficient over lowercased token multisets."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    ca = Counter(t.lower() for t in a)
    cb = Counter(t.lower() for t in b)
    common = sum((ca & cb).values())
    return 2.0 * common / (len(a) + len(b))


def align_versions(doc_a: Document, doc_b: Document,
                   threshold: float = 0.5) -> list[tuple[int | None, int | None]]:
    """Sentence-level alignment between two document versions.

    LCS over sentences where "equal" means token overlap >= ``threshold``;
    unmatched sentences appear with one side None, in document order.
    """
    sents_a = [s.token_surfaces() for s in doc_a.sentences]
    sents_b = [s.token_surfaces() for s in doc_b.sentences]
    m, n = len(sents_a), len(sents_b)

    match = [[_token_overlap(sents_a[i], sents_b[j]) >= threshold for j in range(n)]
             for i in range(m)]
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -1, -1):
            best = max(table[i + 1][j], table[i][j + 1])
            if match[i][j]:
                best = max(best, table[i + 1][j + 1] + 1)
            table[i][j] = best

    pairs: list[tuple[int | None, int | None]] = []
    i = j = 0
    while i < m and j < n:
        if match[i][j] and table[i][j] == table[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            pairs.append((i, None))
            i += 1
        else:
            pairs.append((None, j))
            j += 1
    pairs.extend((k, None) for k in range(i, m))
    pairs.extend((None, k) for k in range(j, n))
    return pairs


def markup(src: Sentence, edits: list[Edit]) -> str:
    """Human-readable edit script: deletions as [-...-], insertions as {+...+}."""
    src_tokens = src.token_surfaces()
    ordered = sorted(edits, key=lambda e: (e.anchor, e.anchor + len(e.old_tokens)))
    out: list[str] = []
    pos = 0
    for e in ordered:
        start, end = e.source_span()
        out.extend(src_tokens[pos:start])
        if e.old_tokens:
            out.append("[-" + " ".join(e.old_tokens) + "-]")
        if e.new_tokens:
            out.append("{+" + " ".join(e.new_tokens) + "+}")
        pos = end
    out.extend(src_tokens[pos:])
    return " ".join(out)
