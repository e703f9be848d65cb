"""Evaluation against human judgments: rank correlation, agreement, sampling.

Covers the full loop: sampling context pairs for annotation, turning raw
judgments into per-target agreement statistics (the gold standard), and
correlating predicted change rankings with the gold ranking.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .change import ChangeScore, Period, parse_period, period_label, rank_targets
from .corpus import TimeSlice
from .errors import (
    FormatError,
    InsufficientDataError,
    KeyMismatchError,
    UndefinedMeasureError,
)
from .measures import Measure
from .seeding import derive_seed

#: printed stand-in for undefined statistics
UNDEFINED_MARK = "-"


# --------------------------------------------------------------------------
# rank correlation


def average_ranks(values: Sequence[float], descending: bool = False) -> list[float]:
    """Ranks starting at 1, ties sharing their average rank."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i], reverse=descending)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = shared
        i = j + 1
    return ranks


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average-tie rank vectors."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise UndefinedMeasureError("rank correlation needs at least two pairs")
    ra = np.asarray(average_ranks(a))
    rb = np.asarray(average_ranks(b))
    ca = ra - ra.mean()
    cb = rb - rb.mean()
    denom = math.sqrt(float(ca @ ca) * float(cb @ cb))
    if denom == 0.0:
        raise UndefinedMeasureError("rank correlation is undefined at zero rank variance")
    return float(ca @ cb) / denom


def spearman_permutation(
    a: Sequence[float],
    b: Sequence[float],
    resamples: int = 100000,
    seed: int = 0,
) -> tuple[float, float]:
    """rho plus a two-sided permutation p-value with add-one correction.

    p = (1 + #{permutations with |rho*| >= |rho|}) / (1 + resamples), so the
    smallest reportable p is 1/(1 + resamples) and p never underflows to 0.
    """
    rho = spearman(a, b)
    ra = np.asarray(average_ranks(a))
    rb = np.asarray(average_ranks(b))
    ca = ra - ra.mean()
    ua = ca / math.sqrt(float(ca @ ca))
    norm_b = math.sqrt(float(((rb - rb.mean()) ** 2).sum()))

    rng = np.random.default_rng(seed)
    hits = 0
    threshold = abs(rho) - 1e-12
    chunk = 20000
    remaining = resamples
    while remaining > 0:
        size = min(chunk, remaining)
        perms = rng.permuted(np.tile(rb, (size, 1)), axis=1)
        rhos = ((perms - rb.mean()) @ ua) / norm_b
        hits += int(np.count_nonzero(np.abs(rhos) >= threshold))
        remaining -= size
    return rho, (1 + hits) / (1 + resamples)


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


# --------------------------------------------------------------------------
# inter-annotator agreement


def fleiss_kappa(labels: Sequence[Sequence[int]]) -> float | None:
    """Fleiss' kappa over binary labels, items x annotators.

    kappa = (Pbar - Pe) / (1 - Pe) where Pbar averages per-item agreement
    P_i = (sum_j n_ij^2 - n) / (n (n - 1)) and Pe = sum_j p_j^2 from the
    pooled category proportions.  Returns None when Pe = 1 (all annotators
    used one category throughout), where chance correction is undefined.
    """
    items = [tuple(item) for item in labels]
    if not items:
        raise UndefinedMeasureError("agreement over zero items is undefined")
    n_raters = len(items[0])
    if n_raters < 2:
        raise ValueError(f"agreement needs at least two annotators, got {n_raters}")
    if any(len(item) != n_raters for item in items):
        raise ValueError("all items must be labeled by the same annotators")
    if any(label not in (0, 1) for item in items for label in item):
        raise ValueError("labels must be 0 or 1")

    per_item = []
    total_ones = 0
    for item in items:
        ones = sum(item)
        total_ones += ones
        zeros = n_raters - ones
        per_item.append((ones * ones + zeros * zeros - n_raters) / (n_raters * (n_raters - 1)))
    p_bar = math.fsum(per_item) / len(items)
    p1 = total_ones / (len(items) * n_raters)
    p_e = p1 * p1 + (1 - p1) * (1 - p1)
    if 1 - p_e < 1e-12:
        return None
    return (p_bar - p_e) / (1 - p_e)


@dataclass(frozen=True)
class AnnotationStats:
    """Agreement statistics for one target-period group of items."""

    #: share of perfect-agreement items labeled metaphoric, None if no such item
    pct_plus: float | None
    #: share of items with perfect agreement
    pct_agree: float
    #: Fleiss' kappa, None when chance correction is undefined
    kappa: float | None
    n_items: int
    n_perfect: int


def annotation_stats(items: Sequence[Sequence[int | None]]) -> AnnotationStats:
    """Summarize one group of judged items; None labels mean skipped.

    Items any annotator skipped are dropped listwise before all statistics.
    """
    kept = [tuple(item) for item in items if None not in item]
    if not kept:
        raise UndefinedMeasureError("all items in the group were skipped")
    perfect = [item for item in kept if len(set(item)) == 1]
    pct_agree = len(perfect) / len(kept)
    if perfect:
        pct_plus = sum(1 for item in perfect if item[0] == 1) / len(perfect)
    else:
        pct_plus = None
    return AnnotationStats(
        pct_plus=pct_plus,
        pct_agree=pct_agree,
        kappa=fleiss_kappa(kept),
        n_items=len(kept),
        n_perfect=len(perfect),
    )


# --------------------------------------------------------------------------
# gold standard entries


@dataclass(frozen=True)
class GoldEntry:
    """One target's judged metaphor share in both periods.

    ``delta_pct_plus`` is late minus early.  Entries computed here satisfy
    that within 1e-9; entries loaded from a file may carry a delta printed
    from unrounded values, so the loader only checks it within +-0.015.
    """

    lexeme: str
    type: str
    earlier_period: Period
    later_period: Period
    pct_plus_early: float | None
    pct_agree_early: float | None
    kappa_early: float | None
    pct_plus_late: float | None
    pct_agree_late: float | None
    kappa_late: float | None
    delta_pct_plus: float | None


def make_gold_entry(
    lexeme: str,
    type_: str,
    earlier_period: Period,
    later_period: Period,
    early: AnnotationStats,
    late: AnnotationStats,
) -> GoldEntry:
    delta = None
    if early.pct_plus is not None and late.pct_plus is not None:
        delta = late.pct_plus - early.pct_plus
    return GoldEntry(
        lexeme=lexeme,
        type=type_,
        earlier_period=earlier_period,
        later_period=later_period,
        pct_plus_early=early.pct_plus,
        pct_agree_early=early.pct_agree,
        kappa_early=early.kappa,
        pct_plus_late=late.pct_plus,
        pct_agree_late=late.pct_agree,
        kappa_late=late.kappa,
        delta_pct_plus=delta,
    )


_GOLD_COLUMNS = (
    "lexeme", "type",
    "time_early", "pct_plus_early", "pct_agree_early", "kappa_early",
    "time_late", "pct_plus_late", "pct_agree_late", "kappa_late",
    "delta_pct_plus",
)


def _fmt_stat(value: float | None) -> str:
    return UNDEFINED_MARK if value is None else f"{value:.2f}"


def _parse_stat(text: str, path: object, line_no: int) -> float | None:
    if text == UNDEFINED_MARK:
        return None
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{path}: unparseable statistic {text!r}", line_no) from None


def format_gold_entry(entry: GoldEntry) -> str:
    return "\t".join(
        (
            entry.lexeme,
            entry.type,
            period_label(entry.earlier_period),
            _fmt_stat(entry.pct_plus_early),
            _fmt_stat(entry.pct_agree_early),
            _fmt_stat(entry.kappa_early),
            period_label(entry.later_period),
            _fmt_stat(entry.pct_plus_late),
            _fmt_stat(entry.pct_agree_late),
            _fmt_stat(entry.kappa_late),
            _fmt_stat(entry.delta_pct_plus),
        )
    )


def load_gold(path: Path | str) -> list[GoldEntry]:
    """Read a gold TSV (columns as written by format_gold_entry).

    Validates that delta matches late minus early within +-0.015, the slack
    two independently rounded two-decimal cells can accumulate.
    """
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != len(_GOLD_COLUMNS):
                raise FormatError(
                    f"{path}: expected {len(_GOLD_COLUMNS)} columns, got {len(fields)}",
                    line_no,
                )
            entry = GoldEntry(
                lexeme=fields[0],
                type=fields[1],
                earlier_period=parse_period(fields[2]),
                later_period=parse_period(fields[6]),
                pct_plus_early=_parse_stat(fields[3], path, line_no),
                pct_agree_early=_parse_stat(fields[4], path, line_no),
                kappa_early=_parse_stat(fields[5], path, line_no),
                pct_plus_late=_parse_stat(fields[7], path, line_no),
                pct_agree_late=_parse_stat(fields[8], path, line_no),
                kappa_late=_parse_stat(fields[9], path, line_no),
                delta_pct_plus=_parse_stat(fields[10], path, line_no),
            )
            if (
                entry.delta_pct_plus is not None
                and entry.pct_plus_early is not None
                and entry.pct_plus_late is not None
            ):
                expected = entry.pct_plus_late - entry.pct_plus_early
                if abs(entry.delta_pct_plus - expected) > 0.015:
                    raise FormatError(
                        f"{path}: delta {entry.delta_pct_plus} contradicts "
                        f"late - early = {expected:.2f} for {entry.lexeme!r}",
                        line_no,
                    )
            entries.append(entry)
    return entries


def gold_header() -> str:
    return "# columns: " + "\t".join(_GOLD_COLUMNS)


# --------------------------------------------------------------------------
# annotation pair sampling


@dataclass(frozen=True)
class ContextRef:
    doc_id: str
    date: int
    text: str


@dataclass(frozen=True)
class ContextPair:
    """One annotation item: the same target in an earlier and a later context.

    ``display_order`` records which context the annotator sees first: "EL"
    shows the earlier context as context 1, "LE" the later one.  Chronology
    is fixed regardless of display order.
    """

    target: str
    earlier: ContextRef
    later: ContextRef
    display_order: str

    def __post_init__(self):
        if self.display_order not in ("EL", "LE"):
            raise ValueError(f"display_order must be 'EL' or 'LE', got {self.display_order!r}")
        if self.earlier.date >= self.later.date:
            raise ValueError(
                f"{self.target}: earlier context ({self.earlier.date}) must predate "
                f"the later one ({self.later.date})"
            )


def eligible_contexts(slice_: TimeSlice, target: str, min_len: int = 10) -> list[ContextRef]:
    """Sentences containing the target with at least min_len surface words.

    Ordered by document date, corpus order within a date.
    """
    found = []
    for doc in slice_.documents:
        for sent in doc.sentences:
            if len(sent.text.split()) < min_len:
                continue
            if any(token.key == target for token in sent.tokens):
                found.append(ContextRef(doc_id=doc.id, date=doc.date, text=sent.text))
    found.sort(key=lambda ref: ref.date)
    return found


def sample_annotation_pairs(
    slice_early: TimeSlice,
    slice_late: TimeSlice,
    target: str,
    per_period: int = 20,
    min_len: int = 10,
    seed: int = 0,
) -> list[ContextPair]:
    """Pick per_period contexts per period, spread evenly over time, and pair them.

    With n eligible contexts the picks are indices floor(i * n / per_period).
    The early side is permuted (seeded per target) before pairing so pair i
    joins early[sigma(i)] with late[i], and every second pair flips the
    display order.
    """
    early = eligible_contexts(slice_early, target, min_len)
    late = eligible_contexts(slice_late, target, min_len)
    if len(early) < per_period or len(late) < per_period:
        raise InsufficientDataError(
            f"target {target!r}: {len(early)} eligible earlier and {len(late)} later "
            f"context(s), need {per_period} in each period"
        )
    picked_early = [early[i * len(early) // per_period] for i in range(per_period)]
    picked_late = [late[i * len(late) // per_period] for i in range(per_period)]
    rng = np.random.default_rng(derive_seed(seed, "annotation", target))
    sigma = rng.permutation(per_period)
    return [
        ContextPair(
            target=target,
            earlier=picked_early[sigma[i]],
            later=picked_late[i],
            display_order="EL" if i % 2 == 0 else "LE",
        )
        for i in range(per_period)
    ]


def shuffle_pairs(pairs: Sequence[ContextPair], seed: int) -> list[ContextPair]:
    """Shuffle pairs across targets so annotators see no target blocks."""
    rng = np.random.default_rng(derive_seed(seed, "annotation", "shuffle"))
    return [pairs[i] for i in rng.permutation(len(pairs))]


# --------------------------------------------------------------------------
# judgments and the agreement table

#: judgment column names; direction is relative to the displayed order
DIRECTIONS = ("M1_of_M2", "M2_of_M1")


@dataclass(frozen=True)
class Judgment:
    item_id: int
    target: str
    annotator: str
    direction: str
    #: 0, 1 or None for skipped
    value: int | None


@dataclass(frozen=True)
class PairRecord:
    """Manifest row tying an exported item back to its chronology."""

    item_id: int
    target: str
    type: str
    earlier_doc: str
    earlier_date: int
    earlier_period: Period
    later_doc: str
    later_date: int
    later_period: Period
    display_order: str

    def later_direction(self) -> str:
        """The judgment column that asks about the later context's meaning."""
        return "M2_of_M1" if self.display_order == "EL" else "M1_of_M2"

    def earlier_direction(self) -> str:
        return "M1_of_M2" if self.display_order == "EL" else "M2_of_M1"


def load_judgments(path: Path | str) -> list[Judgment]:
    """Read judgment rows: item_id, target, annotator, direction, value."""
    judgments = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 5:
                raise FormatError(
                    f"{path}: expected item_id, target, annotator, direction, value", line_no
                )
            item_s, target, annotator, direction, value_s = fields[:5]
            if direction not in DIRECTIONS:
                raise FormatError(f"{path}: unknown direction {direction!r}", line_no)
            if value_s == UNDEFINED_MARK:
                value = None
            elif value_s in ("0", "1"):
                value = int(value_s)
            else:
                raise FormatError(f"{path}: judgment value must be 0, 1 or '-', got {value_s!r}", line_no)
            try:
                item_id = int(item_s)
            except ValueError:
                raise FormatError(f"{path}: unparseable item id {item_s!r}", line_no) from None
            judgments.append(
                Judgment(item_id=item_id, target=target, annotator=annotator,
                         direction=direction, value=value)
            )
    return judgments


def load_pair_records(path: Path | str) -> list[PairRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 10:
                raise FormatError(f"{path}: expected 10 manifest columns", line_no)
            records.append(
                PairRecord(
                    item_id=int(fields[0]),
                    target=fields[1],
                    type=fields[2],
                    earlier_doc=fields[3],
                    earlier_date=int(fields[4]),
                    earlier_period=parse_period(fields[5]),
                    later_doc=fields[6],
                    later_date=int(fields[7]),
                    later_period=parse_period(fields[8]),
                    display_order=fields[9],
                )
            )
    return records


def _lemma(key: str) -> str:
    return key.rsplit(":", 1)[0]


def agreement_table(
    judgments: Iterable[Judgment],
    records: Sequence[PairRecord],
    annotators: Sequence[str] | None = None,
) -> tuple[list[GoldEntry], GoldEntry]:
    """Per-target gold entries plus a pooled overall entry.

    Judgments are display-relative; the manifest restores chronology, so each
    item yields one earlier-period and one later-period label per annotator.
    Missing judgments count as skipped.  An item judged metaphoric in both
    directions contributes to both period columns.  Entries are sorted by
    delta descending, ties by lexeme.
    """
    by_key: dict[tuple[int, str, str], int | None] = {}
    seen_annotators: set[str] = set()
    record_ids = {r.item_id: r for r in records}
    for j in judgments:
        record = record_ids.get(j.item_id)
        if record is None:
            raise KeyMismatchError(
                f"judgment for unknown item {j.item_id}", unexpected=(str(j.item_id),)
            )
        if _lemma(record.target) != _lemma(j.target):
            raise KeyMismatchError(
                f"item {j.item_id}: judgment names target {j.target!r} but the "
                f"manifest says {record.target!r}",
                unexpected=(j.target,),
            )
        by_key[(j.item_id, j.annotator, j.direction)] = j.value
        seen_annotators.add(j.annotator)
    if annotators is None:
        names = sorted(seen_annotators)
    else:
        names = list(annotators)
    if len(names) < 2:
        raise ValueError(f"agreement needs at least two annotators, have {len(names)}")

    grouped: dict[str, list[PairRecord]] = defaultdict(list)
    for record in records:
        grouped[record.target].append(record)

    entries = []
    pooled_early: list[list[int | None]] = []
    pooled_late: list[list[int | None]] = []
    for target in sorted(grouped):
        target_records = grouped[target]
        early_items = [
            [by_key.get((r.item_id, name, r.earlier_direction())) for name in names]
            for r in target_records
        ]
        late_items = [
            [by_key.get((r.item_id, name, r.later_direction())) for name in names]
            for r in target_records
        ]
        pooled_early.extend(early_items)
        pooled_late.extend(late_items)
        first = target_records[0]
        entries.append(
            make_gold_entry(
                lexeme=_lemma(target),
                type_=first.type,
                earlier_period=first.earlier_period,
                later_period=first.later_period,
                early=annotation_stats(early_items),
                late=annotation_stats(late_items),
            )
        )
    entries.sort(
        key=lambda e: (
            -(e.delta_pct_plus if e.delta_pct_plus is not None else -math.inf),
            e.lexeme,
        )
    )
    overall = make_gold_entry(
        lexeme="all",
        type_=UNDEFINED_MARK,
        earlier_period=(0, 1),
        later_period=(1, 2),
        early=annotation_stats(pooled_early),
        late=annotation_stats(pooled_late),
    )
    return entries, overall


# --------------------------------------------------------------------------
# rankings vs gold


@dataclass(frozen=True)
class EvalCell:
    measure: Measure
    subset: str
    n: int
    rho: float | None
    p_value: float | None
    stars: str


@dataclass(frozen=True)
class EvalReport:
    measures: tuple[Measure, ...]
    subsets: tuple[str, ...]
    cells: tuple[EvalCell, ...]

    def cell(self, measure: Measure, subset: str) -> EvalCell:
        for c in self.cells:
            if c.measure is measure and c.subset == subset:
                return c
        raise KeyError((measure, subset))


def evaluate(
    scores: Iterable[ChangeScore],
    gold: Sequence[GoldEntry],
    resamples: int = 100000,
    seed: int = 0,
    subsets: Sequence[str] | None = None,
) -> EvalReport:
    """Correlate each measure's ranking with the gold delta ranking.

    Subsets default to the period-1 labels present in the scores plus "all".
    Predicted ranks use the d-descending lexicographic tie break; gold ranks
    the delta column descending with average ties.  Targets a measure could
    not score are evaluated on the remaining intersection; predictions for
    lexemes the gold file does not cover in that subset are an error.
    """
    scores = list(scores)
    by_measure: dict[Measure, list[ChangeScore]] = defaultdict(list)
    for score in scores:
        by_measure[score.measure].append(score)
    measures = tuple(sorted(by_measure, key=lambda m: m.value))

    if subsets is None:
        labels = sorted({s.target.period1_label for s in scores})
        labels.append("all")
        subsets = labels

    gold_by_lexeme = {g.lexeme: g for g in gold}
    if len(gold_by_lexeme) != len(gold):
        raise KeyMismatchError("duplicate lexemes in the gold standard")

    cells = []
    for measure in measures:
        for subset in subsets:
            ranking = rank_targets(by_measure[measure], subset)
            in_gold_subset = {
                g.lexeme
                for g in gold
                if subset == "all" or period_label(g.earlier_period) == subset
            }
            unexpected = tuple(
                s.target.lemma for s in ranking if s.target.lemma not in in_gold_subset
            )
            if unexpected:
                raise KeyMismatchError(
                    f"{measure.value}/{subset}: predictions for lexemes the gold subset "
                    "does not contain: " + ", ".join(unexpected),
                    unexpected=unexpected,
                )
            kept = [
                s
                for s in ranking
                if gold_by_lexeme[s.target.lemma].delta_pct_plus is not None
            ]
            deltas = [gold_by_lexeme[s.target.lemma].delta_pct_plus for s in kept]
            try:
                rho, p = spearman_permutation(
                    [float(s.rank) for s in kept],
                    average_ranks(deltas, descending=True),
                    resamples=resamples,
                    seed=derive_seed(seed, "spearman", measure.value, subset),
                )
                cells.append(
                    EvalCell(measure=measure, subset=subset, n=len(kept), rho=rho,
                             p_value=p, stars=significance_stars(p))
                )
            except UndefinedMeasureError:
                cells.append(
                    EvalCell(measure=measure, subset=subset, n=len(kept), rho=None,
                             p_value=None, stars="")
                )
    return EvalReport(measures=measures, subsets=tuple(subsets), cells=tuple(cells))


def render_eval_tsv(report: EvalReport) -> list[str]:
    lines = ["# columns: measure\tsubset\tn\trho\tp_value\tstars"]
    for cell in report.cells:
        rho = UNDEFINED_MARK if cell.rho is None else f"{cell.rho:.4f}"
        p = UNDEFINED_MARK if cell.p_value is None else f"{cell.p_value:.6f}"
        lines.append(f"{cell.measure.value}\t{cell.subset}\t{cell.n}\t{rho}\t{p}\t{cell.stars}")
    return lines


def render_eval_text(report: EvalReport) -> list[str]:
    """Fixed-width grid, one row per measure, one column per subset."""
    width = max((len(s) for s in report.subsets), default=8)
    width = max(width, 9)
    header = "measure".ljust(8) + "".join(s.rjust(width + 1) for s in report.subsets)
    lines = [header]
    for measure in report.measures:
        row = measure.value.ljust(8)
        for subset in report.subsets:
            cell = report.cell(measure, subset)
            if cell.rho is None:
                shown = UNDEFINED_MARK
            else:
                shown = f"{cell.rho:.2f}{cell.stars}"
            row += shown.rjust(width + 1)
        lines.append(row)
    return lines
