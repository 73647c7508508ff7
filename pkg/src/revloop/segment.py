"""Deterministic sentence segmentation and tokenization with exact spans.

The rules are intentionally simple and fully reproducible:

* a sentence boundary occurs after a terminator (``.``, ``!``, ``?``)
  followed by whitespace and then an uppercase letter, unless the text
  ending at the terminator matches a known abbreviation;
* tokens are maximal runs of word characters or single punctuation
  characters;
* ``render`` joins tokens with single spaces and then deletes the spaces
  that English orthography forbids (before closers, after openers).

Spans are byte offsets into the UTF-8 encoding of the input so that
reconstruction invariants hold byte-for-byte with no normalization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .model import Document, DomainTag, Sentence, Token

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

# Punctuation that attaches to the preceding token (no space before it) and
# openers that attach to the following token (no space after them).
NO_SPACE_BEFORE = {".", ",", "!", "?", ";", ":", ")", "]", "''"}
NO_SPACE_AFTER = {"(", "[", "``"}


def load_abbreviations(path) -> frozenset[str]:
    """Read an abbreviation list, one entry per line; '#' lines are comments."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                entries.append(line.lower())
    return frozenset(entries)


def _bundled_abbreviations() -> frozenset[str]:
    ref = resources.files("revloop").joinpath("data/abbreviations.txt")
    with resources.as_file(ref) as path:
        return load_abbreviations(path)


_DEFAULT_ABBREVIATIONS = _bundled_abbreviations()


@dataclass(frozen=True)
class SegmenterConfig:
    """Segmentation knobs: the abbreviation list (lowercase-matched) and the
    sentence terminator set."""

    abbreviations: frozenset[str] = field(default=_DEFAULT_ABBREVIATIONS)
    terminators: frozenset[str] = field(default=frozenset({".", "!", "?"}))

    def __post_init__(self):
        if not self.terminators:
            raise ValueError("terminator set must be non-empty")


DEFAULT_SEGMENTER = SegmenterConfig()


def _is_abbreviation_at(text: str, pos: int, abbreviations: frozenset[str]) -> bool:
    """True if some abbreviation ends exactly at text[pos] (a terminator)."""
    for abbr in abbreviations:
        start = pos + 1 - len(abbr)
        if start < 0:
            continue
        if text[start:pos + 1].lower() != abbr:
            continue
        # Must start at a word boundary, not mid-token ("al." should not
        # swallow the tail of "Hal.").
        if start == 0 or not (text[start - 1].isalnum() or text[start - 1] == "_"):
            return True
    return False


def segment(text: str, cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> list[tuple[int, int]]:
    """Split ``text`` into sentence spans (character offsets, [start, end)).

    Every non-whitespace character lands inside exactly one span; the gaps
    between spans are pure whitespace, so the original text is recoverable
    from spans plus gaps.
    """
    if not text:
        return []

    breaks = []  # positions right after which a new sentence starts
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in cfg.terminators:
            continue
        j = i + 1
        while j < n and text[j].isspace():
            j += 1
        if j == i + 1 or j == n:
            # no whitespace after the terminator, or nothing follows
            continue
        if not text[j].isupper():
            continue
        if ch == "." and _is_abbreviation_at(text, i, cfg.abbreviations):
            continue
        breaks.append(i + 1)

    spans = []
    start = 0
    for brk in breaks + [n]:
        chunk = text[start:brk]
        lstrip = len(chunk) - len(chunk.lstrip())
        rstrip = len(chunk) - len(chunk.rstrip())
        if chunk.strip():
            spans.append((start + lstrip, brk - rstrip))
        start = brk
    return spans


def tokenize(sentence_text: str) -> list[Token]:
    """Tokenize into maximal word-character runs and single punctuation
    marks; spans are character offsets into ``sentence_text``."""
    return [
        Token(surface=m.group(0), start=m.start(), end=m.end())
        for m in _TOKEN_RE.finditer(sentence_text)
    ]


def render(tokens: list[str]) -> str:
    """Join token strings into display text with standard spacing."""
    parts: list[str] = []
    prev = None
    for tok in tokens:
        if parts and tok not in NO_SPACE_BEFORE and prev not in NO_SPACE_AFTER:
            parts.append(" ")
        parts.append(tok)
        prev = tok
    return "".join(parts)


def _char_to_byte_offsets(text: str) -> list[int]:
    """Cumulative UTF-8 byte offset for each character position (len+1 entries)."""
    offsets = [0]
    total = 0
    for ch in text:
        total += len(ch.encode("utf-8"))
        offsets.append(total)
    return offsets


def build_document(doc_id: str, domain_tag: DomainTag, text: str,
                   cfg: SegmenterConfig = DEFAULT_SEGMENTER) -> Document:
    """Segment and tokenize ``text`` into a Document with byte-exact spans."""
    byte_of = _char_to_byte_offsets(text)
    sentences = []
    for idx, (cstart, cend) in enumerate(segment(text, cfg)):
        sent_text = text[cstart:cend]
        tokens = tuple(
            Token(surface=t.surface,
                  start=byte_of[cstart + t.start],
                  end=byte_of[cstart + t.end])
            for t in tokenize(sent_text)
        )
        sentences.append(Sentence(index=idx, start=byte_of[cstart], end=byte_of[cend],
                                  tokens=tokens))
    return Document(doc_id=doc_id, domain_tag=domain_tag, text=text,
                    sentences=tuple(sentences))
