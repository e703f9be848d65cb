"""Per-word scalar measures over one co-occurrence matrix.

Word entropy treats a word's context row as a conditional distribution
p(c|w) = counts[w][c] / row_sum(w) and takes Shannon entropy in bits.
Second-order entropy aggregates the entropies of the word's most strongly
associated contexts, which dampens the direct dependence on the word's own
frequency.
"""

from __future__ import annotations

import math
from enum import Enum
from dataclasses import dataclass
from statistics import median
from typing import Mapping

from .errors import UndefinedMeasureError
from .matrix import CoocMatrix


class Measure(str, Enum):
    H = "H"
    H2 = "H2"
    FREQ_N = "FREQ_N"
    H_MON = "H_MON"
    H_OLS = "H_OLS"


class AssocMetric(str, Enum):
    PPMI = "PPMI"
    PLMI = "PLMI"


@dataclass(frozen=True)
class MeasureValue:
    target: str
    slice_label: str
    measure: Measure
    value: float


@dataclass(frozen=True)
class AssociationScore:
    target: str
    context: str
    metric: AssocMetric
    value: float


def entropy_of_counts(counts: Mapping[str, int]) -> float:
    """Shannon entropy (bits) of the distribution proportional to ``counts``."""
    total = sum(counts.values())
    if total <= 0:
        raise UndefinedMeasureError("entropy of an empty count vector is undefined")
    acc = math.fsum(
        (c / total) * math.log2(c / total) for c in counts.values() if c > 0
    )
    return -acc if acc else 0.0


def entropy(matrix: CoocMatrix, target: str) -> float:
    """Word entropy of ``target``'s context distribution in the matrix."""
    row = matrix.rows.get(target)
    if not row or matrix.row_sums.get(target, 0) <= 0:
        raise UndefinedMeasureError(
            f"{target!r} has no co-occurrences in slice {matrix.slice_label!r}"
        )
    return entropy_of_counts(row)


def all_entropies(matrix: CoocMatrix) -> dict[str, float]:
    """Entropy of every word with at least one co-occurrence."""
    return {
        key: entropy_of_counts(row)
        for key, row in matrix.rows.items()
        if matrix.row_sums[key] > 0
    }


def freq_n(matrix: CoocMatrix, target: str) -> float:
    """Occurrence count of ``target`` normalized by the slice token count."""
    if matrix.n_tokens <= 0:
        raise UndefinedMeasureError(f"slice {matrix.slice_label!r} has no tokens")
    return matrix.token_freq.get(target, 0) / matrix.n_tokens


def association(
    matrix: CoocMatrix, target: str, metric: AssocMetric = AssocMetric.PPMI
) -> list[AssociationScore]:
    """Positively associated contexts of ``target``, sorted (value desc, context asc).

    PMI(w, c) = log2(P(w,c) / (P(w) P(c))) with probabilities estimated from
    pair counts: P(w,c) = counts[w][c] / total_pairs and P(w) = row_sum(w) /
    total_pairs.  PPMI clips PMI at zero; PLMI weights PMI by P(w,c) before
    clipping.  Only strictly positive scores are returned.
    """
    metric = AssocMetric(metric)
    row = matrix.rows.get(target)
    if not row or matrix.row_sums.get(target, 0) <= 0:
        raise UndefinedMeasureError(
            f"{target!r} has no co-occurrences in slice {matrix.slice_label!r}"
        )
    total = matrix.total_pairs
    p_w = matrix.row_sums[target] / total
    scored = []
    for context, pair_count in row.items():
        if pair_count <= 0:
            continue
        p_wc = pair_count / total
        p_c = matrix.row_sums[context] / total
        pmi = math.log2(p_wc / (p_w * p_c))
        value = pmi if metric is AssocMetric.PPMI else p_wc * pmi
        if value > 0:
            scored.append(AssociationScore(target=target, context=context, metric=metric, value=value))
    scored.sort(key=lambda s: (-s.value, s.context))
    return scored


def second_order_entropy(
    matrix: CoocMatrix,
    target: str,
    top_n: int = 100,
    aggregate: str = "median",
    metric: AssocMetric = AssocMetric.PLMI,
    cap: int | None = None,
) -> float:
    """Aggregate entropy of the ``top_n`` most associated contexts of ``target``.

    ``cap`` limits the list further; pairwise comparisons pass the partner
    matrix's positive-context count here so both periods aggregate over
    equally many contexts.
    """
    if aggregate not in ("median", "mean"):
        raise ValueError(f"aggregate must be 'median' or 'mean', got {aggregate!r}")
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    scores = association(matrix, target, metric)
    limit = min(top_n, len(scores)) if cap is None else min(top_n, cap, len(scores))
    if limit < 1:
        raise UndefinedMeasureError(
            f"{target!r} has no positively associated context in slice {matrix.slice_label!r}"
        )
    entropies = [entropy(matrix, score.context) for score in scores[:limit]]
    if aggregate == "median":
        return median(entropies)
    return math.fsum(entropies) / len(entropies)
