"""Shared fixture builders and independent oracles used across test modules.

Oracles here deliberately avoid the package's own code paths so tests compare
two routes to the same quantity.
"""

from __future__ import annotations

import math
import random
from collections import Counter

from metachange.change import TargetSpec
from metachange.corpus import Document, Sentence, TimeSlice, Token

# ---------------------------------------------------------------------------
# corpus builders


def vertical_text(docs):
    """Render (id, date, sentences) triples as vertical corpus text.

    Each sentence is a list of (surface, lemma, pos) triples.
    """
    lines = []
    for doc_id, date, sentences in docs:
        lines.append(f"#doc id={doc_id} date={date}")
        for sent in sentences:
            for surface, lemma, pos in sent:
                lines.append(f"{surface}\t{lemma}\t{pos}")
            lines.append("")
    return "\n".join(lines) + "\n"


def slice_from_units(units, label="test", start=1600, end=1700, date=1650):
    """A TimeSlice built directly from sentences given as lists of keys."""
    sentences = []
    for unit in units:
        tokens = []
        for key in unit:
            lemma, _, pos = key.rpartition(":")
            tokens.append(Token(surface=lemma, lemma=lemma, pos=pos))
        sentences.append(Sentence(tokens=tuple(tokens), text=" ".join(t.surface for t in tokens)))
    doc = Document(id=f"{label}-doc", date=date, sentences=tuple(sentences))
    return TimeSlice(
        label=label, start=start, end=end, documents=(doc,),
        token_count=sum(len(u) for u in units),
    )


# ---------------------------------------------------------------------------
# independent oracles


def brute_counts(units, window):
    """Window co-occurrence counts by enumerating all position pairs."""
    counts = {}
    for unit in units:
        for i, target in enumerate(unit):
            for j, context in enumerate(unit):
                if i != j and abs(i - j) <= window:
                    row = counts.setdefault(target, {})
                    row[context] = row.get(context, 0) + 1
    return counts


def entropy_oracle(row):
    """Direct -sum p log2 p over a count mapping."""
    total = sum(row.values())
    return -sum((c / total) * math.log2(c / total) for c in row.values() if c)


def midranks(values):
    """Average ranks via the counting formula, independent of sorting."""
    return [
        sum(1 for y in values if y < x) + (sum(1 for y in values if y == x) + 1) / 2
        for x in values
    ]


def spearman_tie_oracle(a, b):
    """Tie-corrected textbook formula for Spearman's rho."""
    n = len(a)
    ra, rb = midranks(a), midranks(b)
    d2 = math.fsum((x - y) ** 2 for x, y in zip(ra, rb))

    def tie_term(values):
        tie_sum = sum(t**3 - t for t in Counter(values).values())
        return (n**3 - n) / 12 - tie_sum / 12

    ta, tb = tie_term(a), tie_term(b)
    return (ta + tb - d2) / (2 * math.sqrt(ta * tb))


def normal_equations(xs, ys):
    """Closed-form (alpha, beta) for simple least squares."""
    n = len(xs)
    sx = math.fsum(xs)
    sy = math.fsum(ys)
    sxx = math.fsum(x * x for x in xs)
    sxy = math.fsum(x * y for x, y in zip(xs, ys))
    beta = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    alpha = (sy - beta * sx) / n
    return alpha, beta


# ---------------------------------------------------------------------------
# synthetic corpora

_POS_FOR = {"N": "NN", "V": "VVFIN", "AD": "ADJA"}


def pipeline_corpus_text(targets, per_period=50, seed=0, fillers=30):
    """A parseable corpus giving every target per_period occurrences per period.

    Every occurrence sits in its own document (dates spread over the period)
    inside a sentence long enough for annotation sampling, with an article
    and a punctuation token that preprocessing must drop.
    """
    rng = random.Random(seed)
    filler_words = [f"grund{i}" for i in range(fillers)]
    docs = []
    for target in targets:
        for start, end in (target.period1, target.period2):
            for i in range(per_period):
                date = start + (i * (end - start)) // per_period
                chosen = rng.sample(filler_words, 11)
                position = rng.randrange(len(chosen) + 1)
                sent = [("Der", "der", "ART")]
                sent += [(w, w, "NN") for w in chosen[:position]]
                sent.append((target.lemma, target.lemma, _POS_FOR[target.pos]))
                sent += [(w, w, "NN") for w in chosen[position:]]
                sent.append((".", ".", "$."))
                docs.append((f"{target.lemma}-{start}-{i:03d}", date, [sent]))
    docs.sort(key=lambda d: (d[1], d[0]))
    return vertical_text(docs)


def planted_corpus(seed, n_met=5, n_sta=4, occurrences=200, new_share=0.4):
    """A two-period corpus where met words gain growing disjoint context blocks.

    Returns (text, targets, gold_deltas): gold_deltas maps each lexeme to a
    constructed degree of change (block index for met words, 0 for stable).
    """
    rng = random.Random(seed)
    block_sizes = [8 * 2**k for k in range(n_met)]
    targets = []
    gold = {}
    docs = []
    names = [f"met{k}" for k in range(n_met)] + [f"sta{k}" for k in range(n_sta)]
    for k, name in enumerate(names):
        is_met = k < n_met
        targets.append(
            TargetSpec(
                lexeme=f"{name}:N", pos="N", type="met" if is_met else "sta",
                change_date=1750, period1=(1600, 1700), period2=(1800, 1900),
            )
        )
        gold[f"{name}:N"] = float(k + 1) if is_met else 0.0
        base = [f"{name}alt{j}" for j in range(8)]
        new = [f"{name}neu{j}" for j in range(block_sizes[k])] if is_met else []
        for period_i, (start, end) in enumerate(((1600, 1700), (1800, 1900))):
            sentences = []
            for _ in range(occurrences):
                if period_i == 1 and is_met and rng.random() < new_share:
                    context = rng.choice(new)
                else:
                    context = rng.choice(base)
                sentences.append([(name, name, "NN"), (context, context, "NN")])
            docs.append((f"{name}-{start}", start + 10, sentences))
    return vertical_text(docs), targets, gold
