import pytest

from metachange.corpus import parse_corpus, preprocess, slice_corpus
from metachange.errors import FormatError

from helpers import vertical_text


SIMPLE = vertical_text(
    [
        (
            "a",
            1616,
            [
                [("Das", "das", "ART"), ("Haus", "Haus", "NN"), ("brennt", "brennen", "VVFIN")],
                [("geht", "gehen", "VVFIN"), (".", ".", "$.")],
            ],
        ),
        ("b", 1890, [[("alte", "alt", "ADJA"), ("Feder", "Feder", "NN")]]),
    ]
)


def test_parse_documents_and_sentences():
    docs = parse_corpus(SIMPLE.splitlines())
    assert [d.id for d in docs] == ["a", "b"]
    assert [d.date for d in docs] == [1616, 1890]
    assert len(docs[0].sentences) == 2
    assert docs[0].sentences[0].text == "Das Haus brennt"
    assert docs[0].sentences[1].tokens[0].lemma == "gehen"
    assert docs[1].sentences[0].tokens[1].key == "Feder:NN"


def test_parse_accepts_missing_trailing_blank_line():
    text = "#doc id=x date=1700\nein\tein\tART\nWort\tWort\tNN"
    docs = parse_corpus(text.splitlines())
    assert len(docs) == 1
    assert docs[0].sentences[0].keys() == ("ein:ART", "Wort:NN")


def test_parse_rejects_header_without_date():
    with pytest.raises(FormatError, match="line 1.*date"):
        parse_corpus(["#doc id=x", "Wort\tWort\tNN"])


def test_parse_rejects_unparseable_date():
    with pytest.raises(FormatError, match="line 3"):
        parse_corpus(["#doc id=x date=1600", "", "#doc id=y date=später"])


def test_parse_rejects_short_token_line():
    with pytest.raises(FormatError, match="line 2.*field"):
        parse_corpus(["#doc id=x date=1600", "Wort\tWort"])


def test_parse_rejects_token_before_header():
    with pytest.raises(FormatError, match="line 1"):
        parse_corpus(["Wort\tWort\tNN"])


def test_preprocess_filters_and_rewrites_keys():
    docs = parse_corpus(SIMPLE.splitlines())
    out = preprocess(docs, min_corpus_freq=1)
    # ART and $. go, the rest is rewritten to lemma:{N,V,AD}
    assert out[0].sentences[0].keys() == ("Haus:N", "brennen:V")
    assert out[0].sentences[1].keys() == ("gehen:V",)
    assert out[1].sentences[0].keys() == ("alt:AD", "Feder:N")
    # original sentence text survives for annotation display
    assert out[0].sentences[0].text == "Das Haus brennt"


def test_preprocess_extra_punctuation_tags():
    docs = parse_corpus(vertical_text([("a", 1600, [[("Nun", "nun", "NX"), ("gut", "gut", "ADJD")]])]).splitlines())
    out = preprocess(docs, min_corpus_freq=1, punctuation_tags=("NX",))
    assert out[0].sentences[0].keys() == ("gut:AD",)


def test_preprocess_counts_corpus_wide_before_slicing():
    # "selten" occurs 4 times across both documents, so every occurrence
    # is dropped even though each document alone would also be below 5
    sent = [[("selten", "selten", "NN"), ("häufig", "häufig", "NN")]]
    docs = parse_corpus(
        vertical_text(
            [("a", 1600, sent * 2), ("b", 1800, sent * 2), ("c", 1800, [[("häufig", "häufig", "NN")]])]
        ).splitlines()
    )
    out = preprocess(docs, min_corpus_freq=5)
    kept = [key for doc in out for s in doc.sentences for key in s.keys()]
    assert "selten:N" not in kept
    assert kept.count("häufig:N") == 5


def test_preprocess_retains_emptied_sentences():
    docs = parse_corpus(vertical_text([("a", 1600, [[("und", "und", "KON")]])]).splitlines())
    out = preprocess(docs, min_corpus_freq=1)
    assert len(out[0].sentences) == 1
    assert out[0].sentences[0].tokens == ()


def test_preprocess_is_idempotent():
    docs = parse_corpus(SIMPLE.splitlines())
    once = preprocess(docs, min_corpus_freq=1)
    twice = preprocess(once, min_corpus_freq=1)
    assert once == twice


def test_slice_corpus_half_open_interval():
    docs = parse_corpus(SIMPLE.splitlines())
    pre = preprocess(docs, min_corpus_freq=1)
    early = slice_corpus(pre, 1600, 1700)
    late = slice_corpus(pre, 1700, 1890)
    assert [d.id for d in early.documents] == ["a"]
    assert early.label == "1600-1700"
    assert early.token_count == 3
    # 1890 excluded: end is exclusive
    assert late.documents == ()
    assert late.token_count == 0


def test_slice_corpus_rejects_empty_interval():
    with pytest.raises(ValueError):
        slice_corpus([], 1700, 1700)


def test_document_requires_positive_date():
    with pytest.raises(ValueError):
        parse_corpus(["#doc id=x date=0"])
