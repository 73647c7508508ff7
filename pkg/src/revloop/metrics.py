"""Evaluation statistics over revision sessions plus reference text metrics.

Two acceptance tables are computed from session logs:

* by depth — documents are the unit. A document's accept count at one depth
  is the mean over its reviewers (each reviewer's final verdicts), so a
  document read by three reviewers still counts once. Steps that proposed
  zero edits do not contribute. ``pct_accepts`` divides summed accepts by
  summed proposals; it is never an average of ratios.
* by intention — raw edit counts. Every proposed edit counts once and is
  accepted iff its resolved status is accepted.

The ``*_from_records`` variants compute the same tables from exported
dataset records; both routes share one aggregation path so a lossless
export reproduces the session-level numbers exactly.

``bleu``, ``sari`` and ``rouge_l`` are the standard text-generation metrics
(uniform 4-gram BLEU with brevity penalty, SARI as the mean of keep-F1,
add-F1 and delete-precision over n-grams 1..4, ROUGE-L with beta = 1).
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Iterable

from ._kernels import encode_pair, lcs_table
from .diff import align_versions, extract_edits
from .model import Document, EditIntention, EditStatus, RevisionSession, Verdict

_TAXONOMY = (EditIntention.FLUENCY, EditIntention.COHERENCE,
             EditIntention.CLARITY, EditIntention.STYLE)


class EmptyInputError(Exception):
    """A metric received an empty hypothesis, source, or reference."""


class RangeError(Exception):
    """A quality score fell outside [0, 1]."""


@dataclass(frozen=True)
class DepthStats:
    depth: int
    n_docs: int
    avg_edits: float
    avg_accepts: float
    pct_accepts: float | None


@dataclass(frozen=True)
class IntentionStats:
    intention: EditIntention
    n_edits: int
    n_accepts: int
    pct_accepts: float | None


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_depth: float
    n_edits: int


def half_up(value: float, places: int = 2) -> float:
    """Half-up decimal rounding for table display (3.835 -> 3.84)."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# Acceptance tables
# ---------------------------------------------------------------------------

def _depth_table(contributions: Iterable[tuple[str, int, int, Iterable]]) -> list[DepthStats]:
    """Shared aggregation: (doc_id, depth, n_proposed, decisions) tuples in,
    one DepthStats per observed depth out."""
    proposed: dict[tuple[int, str], int] = defaultdict(int)
    accepts: dict[tuple[int, str], Counter] = defaultdict(Counter)
    reviewers: dict[tuple[int, str], set[str]] = defaultdict(set)

    for doc_id, depth, n_proposed, decisions in contributions:
        if n_proposed == 0:
            continue
        key = (depth, doc_id)
        proposed[key] += n_proposed
        for d in decisions:
            reviewers[key].add(d.reviewer_id)
            if d.verdict is Verdict.ACCEPT:
                accepts[key][d.reviewer_id] += 1

    out = []
    for depth in sorted({d for d, _ in proposed}):
        docs = sorted(doc for d, doc in proposed if d == depth)
        total_proposed = 0
        total_accepts = 0.0
        for doc in docs:
            key = (depth, doc)
            total_proposed += proposed[key]
            names = sorted(reviewers[key])
            if names:
                total_accepts += sum(accepts[key][r] for r in names) / len(names)
        pct = 100.0 * total_accepts / total_proposed if total_proposed else None
        out.append(DepthStats(
            depth=depth,
            n_docs=len(docs),
            avg_edits=total_proposed / len(docs),
            avg_accepts=total_accepts / len(docs),
            pct_accepts=pct,
        ))
    return out


def acceptance_by_depth(sessions: Iterable[RevisionSession]) -> list[DepthStats]:
    return _depth_table(
        (s.original.doc_id, step.depth, len(step.proposed_edits), step.decisions)
        for s in sessions for step in s.steps)


def acceptance_by_depth_from_records(records) -> list[DepthStats]:
    """Same table from exported dataset records (one record per edited
    sentence; fields doc_id, depth, edits, decisions)."""
    return _depth_table(
        (r.doc_id, r.depth, len(r.edits), r.decisions) for r in records)


def _intention_table(edits: Iterable) -> list[IntentionStats]:
    n_edits: Counter = Counter()
    n_accepts: Counter = Counter()
    for e in edits:
        n_edits[e.intention] += 1
        if e.status is EditStatus.ACCEPTED:
            n_accepts[e.intention] += 1
    out = []
    for intention in _TAXONOMY:
        if n_edits[intention] == 0:
            continue
        out.append(IntentionStats(
            intention=intention,
            n_edits=n_edits[intention],
            n_accepts=n_accepts[intention],
            pct_accepts=100.0 * n_accepts[intention] / n_edits[intention],
        ))
    return out


def acceptance_by_intention(sessions: Iterable[RevisionSession]) -> list[IntentionStats]:
    return _intention_table(
        e for s in sessions for step in s.steps for e in step.proposed_edits)


def acceptance_by_intention_from_records(records) -> list[IntentionStats]:
    return _intention_table(e for r in records for e in r.edits)


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------

def corpus_stats(chains: list[list[Document]]) -> CorpusStats:
    """Document count, mean revision depth, and total number of revised
    sentence pairs across consecutive versions. Sentences the aligner cannot
    pair (splits, merges, wholesale additions) are not counted as pairs."""
    n_docs = len(chains)
    if n_docs == 0:
        return CorpusStats(n_docs=0, avg_depth=0.0, n_edits=0)
    total_depth = sum(len(chain) - 1 for chain in chains)
    n_edits = 0
    for chain in chains:
        for before, after in zip(chain, chain[1:]):
            for i, j in align_versions(before, after):
                if i is None or j is None:
                    continue
                target = after.sentences[j].token_surfaces()
                if extract_edits(before.sentences[i], target, EditIntention.STYLE):
                    n_edits += 1
    return CorpusStats(n_docs=n_docs, avg_depth=total_depth / n_docs, n_edits=n_edits)


# ---------------------------------------------------------------------------
# Text-generation metrics
# ---------------------------------------------------------------------------

def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypothesis: list[str], references: list[list[str]],
         smooth: bool = False) -> float:
    """BLEU in [0, 100]: geometric mean of clipped n-gram precisions up to
    order min(4, len(hypothesis)), times the brevity penalty against the
    closest reference length (ties break shorter). With ``smooth`` a zero
    numerator becomes 0.01 instead of zeroing the whole score."""
    if not hypothesis or not references or any(not r for r in references):
        raise EmptyInputError("bleu needs a non-empty hypothesis and references")

    max_order = min(4, len(hypothesis))
    log_sum = 0.0
    for n in range(1, max_order + 1):
        hyp_counts = _ngrams(hypothesis, n)
        best_ref = Counter()
        for ref in references:
            for gram, count in _ngrams(ref, n).items():
                if count > best_ref[gram]:
                    best_ref[gram] = count
        clipped = sum(min(c, best_ref[g]) for g, c in hyp_counts.items())
        total = sum(hyp_counts.values())
        if clipped == 0:
            if not smooth:
                return 0.0
            clipped = 0.01
        log_sum += math.log(clipped / total)
    geo_mean = math.exp(log_sum / max_order)

    hyp_len = len(hypothesis)
    ref_len = min((abs(len(r) - hyp_len), len(r)) for r in references)[1]
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * geo_mean


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def sari(source: list[str], hypothesis: list[str],
         references: list[list[str]]) -> float:
    """SARI in [0, 100]: mean over n-grams 1..4 of keep-F1, add-F1 and
    delete-precision.

    Keep and delete run on multisets with each source/hypothesis count
    replicated once per reference; add runs on n-gram sets. An empty
    denominator leaves that precision/recall at its vacuous value 1.
    """
    if not source or not hypothesis or not references or any(not r for r in references):
        raise EmptyInputError("sari needs non-empty source, hypothesis, and references")

    numref = len(references)
    keep_total = add_total = del_total = 0.0
    for n in range(1, 5):
        src = Counter({g: c * numref for g, c in _ngrams(source, n).items()})
        hyp = Counter({g: c * numref for g, c in _ngrams(hypothesis, n).items()})
        ref = Counter()
        for r in references:
            ref.update(_ngrams(r, n))

        kept = src & hyp
        kept_good = kept & ref
        keepable = src & ref
        keep_p = (sum(kept_good.values()) / sum(kept.values())) if kept else 1.0
        keep_r = (sum(kept_good.values()) / sum(keepable.values())) if keepable else 1.0
        keep_total += _f1(keep_p, keep_r)

        src_set = set(_ngrams(source, n))
        hyp_added = set(_ngrams(hypothesis, n)) - src_set
        ref_added = {g for r in references for g in _ngrams(r, n)} - src_set
        add_good = hyp_added & ref_added
        add_p = (len(add_good) / len(hyp_added)) if hyp_added else 1.0
        add_r = (len(add_good) / len(ref_added)) if ref_added else 1.0
        add_total += _f1(add_p, add_r)

        deleted = src - hyp
        deletable = src - ref
        del_good = deleted & deletable
        del_total += (sum(del_good.values()) / sum(deleted.values())) if deleted else 1.0

    return 100.0 * (keep_total + add_total + del_total) / 12.0


def rouge_l(hypothesis: list[str], reference: list[str]) -> float:
    """ROUGE-L F-score in [0, 1] with beta = 1."""
    if not hypothesis or not reference:
        raise EmptyInputError("rouge_l needs non-empty hypothesis and reference")
    a, b = encode_pair(hypothesis, reference)
    lcs = int(lcs_table(a, b)[0, 0])
    precision = lcs / len(hypothesis)
    recall = lcs / len(reference)
    return _f1(precision, recall)


# ---------------------------------------------------------------------------
# Quality judgments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QualityJudgment:
    judge_id: str
    score: float


def quality_log(final_doc: Document, reference_doc: Document,
                judgments: list[QualityJudgment]) -> float:
    """Mean of human quality scores for a finished document against its
    reference. Persisting the judgments is the store's job; this validates
    and averages."""
    if not judgments:
        raise EmptyInputError("quality_log needs at least one judgment")
    for j in judgments:
        if not 0.0 <= j.score <= 1.0:
            raise RangeError(f"score {j.score} by {j.judge_id!r} outside [0, 1]")
    return sum(j.score for j in judgments) / len(judgments)
