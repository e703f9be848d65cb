"""Vertical corpus ingestion, content-word preprocessing, date slicing.

The only ingestion format is line-oriented vertical text: a document header
``#doc id=<text> date=<year>``, one ``surface<TAB>lemma<TAB>pos`` token per
line, and a blank line closing each sentence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import FormatError

#: POS prefixes of content words; everything else is dropped in preprocessing.
CONTENT_POS_PREFIXES = ("N", "V", "AD")


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str

    @property
    def key(self) -> str:
        """Vocabulary key, ``lemma:P`` with P in {N, V, AD} once preprocessed."""
        return f"{self.lemma}:{self.pos}"


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    #: original surface text, kept verbatim for annotation export
    text: str = ""

    def keys(self) -> tuple[str, ...]:
        return tuple(t.key for t in self.tokens)


@dataclass(frozen=True)
class Document:
    id: str
    date: int
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        if self.date <= 0:
            raise ValueError(f"document {self.id!r}: date must be positive, got {self.date}")


@dataclass(frozen=True)
class TimeSlice:
    """A sub-corpus restricted to the date interval [start, end)."""

    label: str
    start: int
    end: int
    documents: tuple[Document, ...]
    #: number of retained tokens, the N used for frequency normalization
    token_count: int

    @property
    def sentences(self) -> Iterator[Sentence]:
        for doc in self.documents:
            yield from doc.sentences


def parse_corpus(lines: Iterable[str]) -> list[Document]:
    """Parse vertical text into documents, preserving corpus order.

    Raises FormatError, with the offending line number, for document headers
    without a parseable date and for token lines with fewer than three
    tab-separated fields.
    """
    documents: list[Document] = []
    header: tuple[str, int] | None = None
    sentences: list[Sentence] = []
    tokens: list[Token] = []

    def close_sentence() -> None:
        nonlocal tokens
        if tokens:
            text = " ".join(t.surface for t in tokens)
            sentences.append(Sentence(tokens=tuple(tokens), text=text))
            tokens = []

    def close_document() -> None:
        nonlocal sentences
        close_sentence()
        if header is not None:
            doc_id, date = header
            documents.append(Document(id=doc_id, date=date, sentences=tuple(sentences)))
        sentences = []

    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#doc"):
            close_document()
            header = _parse_header(line, line_no)
        elif not line.strip():
            close_sentence()
        else:
            if header is None:
                raise FormatError("token line before any document header", line_no)
            fields = line.split("\t")
            if len(fields) < 3:
                raise FormatError(
                    f"token line has {len(fields)} field(s), expected surface<TAB>lemma<TAB>pos",
                    line_no,
                )
            tokens.append(Token(surface=fields[0], lemma=fields[1], pos=fields[2]))
    close_document()
    return documents


def _parse_header(line: str, line_no: int) -> tuple[str, int]:
    attrs = {}
    for part in line[len("#doc"):].split():
        key, sep, value = part.partition("=")
        if sep:
            attrs[key] = value
    if "date" not in attrs:
        raise FormatError("document header is missing a date attribute", line_no)
    try:
        date = int(attrs["date"])
    except ValueError:
        raise FormatError(f"unparseable date {attrs['date']!r} in document header", line_no) from None
    return attrs.get("id", ""), date


def _reduce(token: Token, punct: frozenset[str]) -> Token | None:
    """Map a token to its content-word form, or None if it is dropped."""
    if token.pos.startswith("$") or token.pos in punct:
        return None
    for prefix in CONTENT_POS_PREFIXES:
        if token.pos.startswith(prefix):
            return Token(surface=token.surface, lemma=token.lemma, pos=prefix)
    return None


def preprocess(
    documents: Iterable[Document],
    min_corpus_freq: int = 5,
    punctuation_tags: Iterable[str] = (),
) -> list[Document]:
    """Filter to content words and rewrite tokens to ``lemma:P`` keys.

    Keeps tokens whose POS starts with N, V or AD; drops punctuation (tags
    starting with ``$`` plus ``punctuation_tags``); drops keys whose
    corpus-wide frequency, counted before any date slicing, is below
    ``min_corpus_freq``.  Deletions collapse the sentence, so downstream
    windows span them.  Sentences emptied by filtering are retained empty.
    Applying the function twice gives the same result as applying it once.
    """
    documents = list(documents)
    punct = frozenset(punctuation_tags)

    counts: Counter[str] = Counter()
    for doc in documents:
        for sent in doc.sentences:
            for token in sent.tokens:
                reduced = _reduce(token, punct)
                if reduced is not None:
                    counts[reduced.key] += 1

    out = []
    for doc in documents:
        new_sentences = []
        for sent in doc.sentences:
            kept = tuple(
                reduced
                for token in sent.tokens
                if (reduced := _reduce(token, punct)) is not None
                and counts[reduced.key] >= min_corpus_freq
            )
            new_sentences.append(Sentence(tokens=kept, text=sent.text))
        out.append(Document(id=doc.id, date=doc.date, sentences=tuple(new_sentences)))
    return out


def slice_corpus(
    documents: Iterable[Document],
    start: int,
    end: int,
    label: str | None = None,
) -> TimeSlice:
    """Select documents with start <= date < end, keeping corpus order."""
    if start >= end:
        raise ValueError(f"empty date interval [{start}, {end})")
    chosen = tuple(doc for doc in documents if start <= doc.date < end)
    count = sum(len(sent.tokens) for doc in chosen for sent in doc.sentences)
    return TimeSlice(
        label=label if label is not None else f"{start}-{end}",
        start=start,
        end=end,
        documents=chosen,
        token_count=count,
    )
