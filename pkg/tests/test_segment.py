import random

from revloop.model import DomainTag
from revloop.segment import (
    DEFAULT_SEGMENTER,
    SegmenterConfig,
    build_document,
    render,
    segment,
    tokenize,
)

from conftest import WORDS


def spans_to_texts(text, spans):
    return [text[a:b] for a, b in spans]


def test_period_space_uppercase_is_a_boundary():
    text = "A cat. The dog."
    assert spans_to_texts(text, segment(text)) == ["A cat.", "The dog."]


def test_lowercase_continuation_is_not_a_boundary():
    text = "It ran fast. then it stopped."
    assert spans_to_texts(text, segment(text)) == ["It ran fast. then it stopped."]


def test_abbreviation_does_not_split():
    text = "See Fig. 3 for details. Next point."
    assert spans_to_texts(text, segment(text)) == [
        "See Fig. 3 for details.", "Next point."]


def test_abbreviation_requires_word_boundary():
    # "racial." is not the abbreviation "al."
    text = "The split was racial. Then it changed."
    assert spans_to_texts(text, segment(text)) == [
        "The split was racial.", "Then it changed."]


def test_question_and_exclamation_terminate():
    text = "Really? Yes! Fine."
    assert spans_to_texts(text, segment(text)) == ["Really?", "Yes!", "Fine."]


def test_trailing_text_without_terminator_is_kept():
    text = "First one. still going"
    assert spans_to_texts(text, segment(text)) == ["First one. still going"]


def test_custom_abbreviations():
    cfg = SegmenterConfig(abbreviations=frozenset({"zz."}))
    text = "About zz. More here. Done."
    assert spans_to_texts(text, segment(text, cfg)) == [
        "About zz. More here.", "Done."]
    assert spans_to_texts(text, segment(text)) == [
        "About zz.", "More here.", "Done."]


def test_tokenize_words_and_punctuation():
    toks = tokenize("Hello, world!")
    assert [t.surface for t in toks] == ["Hello", ",", "world", "!"]
    assert [(t.start, t.end) for t in toks] == [(0, 5), (5, 6), (7, 12), (12, 13)]


def test_tokenize_spans_are_character_offsets_into_the_input():
    text = "Don't stop (yet)."
    for tok in tokenize(text):
        assert text[tok.start:tok.end] == tok.surface


def test_render_spacing_rules():
    assert render(["The", "cat", ",", "sat", "."]) == "The cat, sat."
    assert render(["(", "x", ")", "done", "."]) == "(x) done."
    assert render(["a", ":", "b", ";", "c", "?"]) == "a: b; c?"
    assert render([]) == ""


def test_render_tokenize_round_trip():
    rng = random.Random(7)
    punct = [",", ".", "!", "?", ";", ":"]
    for _ in range(200):
        toks = []
        for _ in range(rng.randint(1, 15)):
            toks.append(rng.choice(WORDS))
            if rng.random() < 0.2:
                toks.append(rng.choice(punct))
        rendered = render(toks)
        assert [t.surface for t in tokenize(rendered)] == toks
        # rendering is a fixed point of tokenize+render
        assert render([t.surface for t in tokenize(rendered)]) == rendered


def test_random_sentence_count_recovery():
    rng = random.Random(8)
    for _ in range(100):
        n = rng.randint(1, 8)
        parts = []
        for _ in range(n):
            words = [rng.choice(WORDS) for _ in range(rng.randint(2, 7))]
            parts.append(words[0].capitalize() + " " + " ".join(words[1:]) + ".")
        text = " ".join(parts)
        assert spans_to_texts(text, segment(text)) == parts


def test_segment_spans_cover_all_non_whitespace():
    texts = [
        "A cat. The dog. It ran!",
        "Multiline one.\nSecond here. Third.",
        "  Leading spaces. And more.  ",
    ]
    for text in texts:
        spans = segment(text)
        covered = set()
        for a, b in spans:
            assert not text[a].isspace() and not text[b - 1].isspace()
            covered.update(range(a, b))
        for i, ch in enumerate(text):
            if not ch.isspace():
                assert i in covered


def test_build_document_byte_spans_non_ascii():
    # 猫 is not an uppercase letter, so the last period opens no boundary
    text = "Héllo wörld. Ünïcode 'test' done. 猫が座った."
    doc = build_document("u1", DomainTag.OTHER, text)
    data = text.encode("utf-8")
    assert len(doc.sentences) == 2
    assert doc.sentence_text(0) == "Héllo wörld."
    for sent in doc.sentences:
        assert data[sent.start:sent.end].decode("utf-8") == doc.sentence_text(sent.index)
        for tok in sent.tokens:
            assert data[tok.start:tok.end].decode("utf-8") == tok.surface


def test_build_document_keeps_original_text():
    text = "Spacing   is   odd. Kept anyway."
    doc = build_document("sp", DomainTag.OTHER, text)
    assert doc.text == text
    assert doc.sentence_text(0) == "Spacing   is   odd."


def test_default_segmenter_bundles_abbreviations():
    assert "fig." in DEFAULT_SEGMENTER.abbreviations
    assert "e.g." in DEFAULT_SEGMENTER.abbreviations
