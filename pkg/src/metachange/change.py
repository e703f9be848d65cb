"""Test-set handling and per-target change scoring between two periods.

A target is tracked across a pair of century-sized time slices; the change
score d is the measure's value in the later period minus the earlier one.
Rankings order targets by d descending, so rank 1 names the word with the
strongest increase.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import TimeSlice
from .errors import FormatError, UndefinedMeasureError
from .matrix import CoocMatrix
from .measures import (
    AssocMetric,
    Measure,
    association,
    entropy,
    freq_n,
    second_order_entropy,
)
from .normalize import MonConfig, mon_entropy, ols_change, ols_delta

Period = tuple[int, int]


def period_label(period: Period) -> str:
    return f"{period[0]}-{period[1]}"


def parse_period(label: str) -> Period:
    start, sep, end = label.partition("-")
    if not sep:
        raise FormatError(f"unparseable period label {label!r}")
    try:
        return int(start), int(end)
    except ValueError:
        raise FormatError(f"unparseable period label {label!r}") from None


def periods_for_change_date(
    date: int,
    late_period: Period = (1850, 1926),
    last_century_start: int = 1800,
) -> tuple[Period, Period]:
    """Century before the change date vs century after it.

    Changes dated in the last covered century get ``late_period`` as the
    later slice because the century after them is not fully covered.
    """
    century = (date // 100) * 100
    period1 = (century - 100, century)
    if century == last_century_start:
        period2 = (late_period[0], late_period[1])
    else:
        period2 = (century + 100, century + 200)
    return period1, period2


@dataclass(frozen=True)
class TargetSpec:
    """One test-set entry.

    ``lexeme`` is the vocabulary key (lemma:P).  Stable entries share the
    change date and periods of the metaphoric entry they are frequency
    matched with; their own date column records first attestation only.
    """

    lexeme: str
    pos: str
    type: str
    change_date: int
    period1: Period
    period2: Period
    gloss: str = ""
    attested_freq: int = 0

    def __post_init__(self):
        if self.type not in ("met", "sta"):
            raise ValueError(f"{self.lexeme}: unknown target type {self.type!r}")
        if self.period1[0] >= self.period1[1] or self.period2[0] >= self.period2[1]:
            raise ValueError(f"{self.lexeme}: empty period")
        if self.period1[1] > self.change_date:
            raise ValueError(
                f"{self.lexeme}: period 1 {period_label(self.period1)} must end by "
                f"the change date {self.change_date}"
            )
        if self.period2[1] <= self.change_date:
            raise ValueError(
                f"{self.lexeme}: period 2 {period_label(self.period2)} ends before "
                f"the change date {self.change_date}"
            )

    @property
    def lemma(self) -> str:
        return self.lexeme.rsplit(":", 1)[0]

    @property
    def period1_label(self) -> str:
        return period_label(self.period1)

    @property
    def period2_label(self) -> str:
        return period_label(self.period2)


def load_testset(
    path: Path | str,
    late_period: Period = (1850, 1926),
    last_century_start: int = 1800,
) -> list[TargetSpec]:
    """Read the TSV test set: lexeme, pos, type, gloss, date, freq.

    Rows alternate met,sta; each sta row inherits periods and effective
    change date from the met row before it.
    """
    targets: list[TargetSpec] = []
    carried: tuple[int, Period, Period] | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 6:
                raise FormatError(
                    f"{path}: expected lexeme, pos, type, gloss, date, freq", line_no
                )
            lemma, pos, type_, gloss, date_s, freq_s = fields[:6]
            try:
                date, freq = int(date_s), int(freq_s)
            except ValueError:
                raise FormatError(f"{path}: unparseable date or freq", line_no) from None
            if type_ == "met":
                period1, period2 = periods_for_change_date(date, late_period, last_century_start)
                carried = (date, period1, period2)
            elif type_ == "sta":
                if carried is None:
                    raise FormatError(
                        f"{path}: stable entry {lemma!r} has no preceding metaphoric entry "
                        "to inherit periods from",
                        line_no,
                    )
                date, period1, period2 = carried
            else:
                raise FormatError(f"{path}: unknown type {type_!r}", line_no)
            targets.append(
                TargetSpec(
                    lexeme=f"{lemma}:{pos}",
                    pos=pos,
                    type=type_,
                    change_date=date,
                    period1=period1,
                    period2=period2,
                    gloss=gloss,
                    attested_freq=freq,
                )
            )
    return targets


@dataclass(frozen=True)
class MeasureParams:
    """Knobs forwarded to the individual measures."""

    window: int = 2
    boundary: str = "sentence"
    h2_top_n: int = 100
    h2_aggregate: str = "median"
    h2_metric: AssocMetric = AssocMetric.PLMI
    #: cap both periods' context lists at the smaller positive count
    h2_symmetric_cap: bool = True
    mon: MonConfig | None = None
    ols_window_n: int = 1000


@dataclass
class PeriodData:
    """Everything score_target may need about one period."""

    matrix: CoocMatrix
    #: required for H_MON only (occurrence multisets live in the slice)
    slice: TimeSlice | None = None
    #: optional all_entropies cache, shared across targets for H_OLS
    entropies: dict[str, float] | None = None


@dataclass(frozen=True)
class ChangeScore:
    target: TargetSpec
    measure: Measure
    value_p1: float
    value_p2: float
    d: float
    rank: int = 0


def score_target(
    target: TargetSpec,
    period1: PeriodData,
    period2: PeriodData,
    measure: Measure,
    params: MeasureParams = MeasureParams(),
) -> ChangeScore:
    """Evaluate ``measure`` for ``target`` in both periods, d = later - earlier.

    Raises the measure's undefined/insufficient-data error when the target is
    not measurable in either period; callers collect those into a coverage
    report instead of dropping targets silently.
    """
    measure = Measure(measure)
    key = target.lexeme
    if measure is Measure.H:
        v1 = entropy(period1.matrix, key)
        v2 = entropy(period2.matrix, key)
    elif measure is Measure.FREQ_N:
        v1 = freq_n(period1.matrix, key)
        v2 = freq_n(period2.matrix, key)
    elif measure is Measure.H2:
        cap = None
        if params.h2_symmetric_cap:
            positive1 = association(period1.matrix, key, params.h2_metric)
            positive2 = association(period2.matrix, key, params.h2_metric)
            cap = min(len(positive1), len(positive2))
        v1 = second_order_entropy(
            period1.matrix, key, top_n=params.h2_top_n, aggregate=params.h2_aggregate,
            metric=params.h2_metric, cap=cap,
        )
        v2 = second_order_entropy(
            period2.matrix, key, top_n=params.h2_top_n, aggregate=params.h2_aggregate,
            metric=params.h2_metric, cap=cap,
        )
    elif measure is Measure.H_MON:
        if params.mon is None or period1.slice is None or period2.slice is None:
            raise ValueError("H_MON needs MonConfig and both time slices")
        v1 = mon_entropy(period1.slice, key, params.mon, window=params.window, boundary=params.boundary)
        v2 = mon_entropy(period2.slice, key, params.mon, window=params.window, boundary=params.boundary)
    elif measure is Measure.H_OLS:
        _, v1 = ols_delta(period1.matrix, key, params.ols_window_n, entropies=period1.entropies)
        _, v2 = ols_delta(period2.matrix, key, params.ols_window_n, entropies=period2.entropies)
        return ChangeScore(target=target, measure=measure, value_p1=v1, value_p2=v2,
                           d=ols_change(v1, v2))
    else:  # pragma: no cover - Measure() above rejects unknown names
        raise ValueError(f"unhandled measure {measure}")
    return ChangeScore(target=target, measure=measure, value_p1=v1, value_p2=v2, d=v2 - v1)


def rank_targets(scores: Iterable[ChangeScore], subset: str = "all") -> list[ChangeScore]:
    """Rank by d descending, ties by lexeme ascending; rank 1 = most change.

    ``subset`` is "all" or a period-1 label such as "1700-1800".
    """
    scores = list(scores)
    measures = {s.measure for s in scores}
    if len(measures) > 1:
        raise ValueError(
            "refusing to rank across measures: " + ", ".join(sorted(m.value for m in measures))
        )
    chosen = [
        s for s in scores if subset == "all" or s.target.period1_label == subset
    ]
    chosen.sort(key=lambda s: (-s.d, s.target.lexeme))
    return [replace(s, rank=i) for i, s in enumerate(chosen, start=1)]


def subset_labels(targets: Sequence[TargetSpec]) -> list[str]:
    """Distinct period-1 labels in the test set, sorted, plus "all"."""
    labels = sorted({t.period1_label for t in targets})
    labels.append("all")
    return labels
