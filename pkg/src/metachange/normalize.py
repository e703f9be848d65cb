"""Frequency normalization of word entropy.

Entropy grows with occurrence count, so raw values are not comparable across
periods.  Two corrections are provided: subsampling every target down to a
common occurrence number (MON), and taking the residual of entropy against a
local linear fit on log frequency (OLS).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus import TimeSlice
from .errors import DegenerateFitError, InsufficientDataError, UndefinedMeasureError
from .matrix import CoocMatrix, occurrence_contexts
from .measures import all_entropies, entropy_of_counts


@dataclass(frozen=True)
class MonConfig:
    """Matching-occurrence-number subsampling parameters."""

    n_contexts: int
    k_samples: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.n_contexts < 1:
            raise ValueError(f"n_contexts must be >= 1, got {self.n_contexts}")
        if self.k_samples < 1:
            raise ValueError(f"k_samples must be >= 1, got {self.k_samples}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


def mon_entropy(
    slice_: TimeSlice,
    target: str,
    cfg: MonConfig,
    window: int = 2,
    boundary: str = "sentence",
) -> float:
    """Mean entropy over k count vectors, each pooled from n sampled occurrences.

    Each sample i draws n occurrence-context multisets without replacement
    using its own counter-based stream (Philox keyed by (seed, i)), so the k
    samples are order-independent and safe to compute concurrently.  When the
    target has exactly n occurrences every sample is the full row, so the
    full-row entropy is returned directly.
    """
    occurrences = occurrence_contexts(slice_, target, window=window, boundary=boundary)
    if len(occurrences) < cfg.n_contexts:
        raise InsufficientDataError(
            f"{target!r} occurs {len(occurrences)} time(s) in slice {slice_.label!r}, "
            f"need {cfg.n_contexts} for subsampling"
        )
    if len(occurrences) == cfg.n_contexts:
        pooled: Counter = Counter()
        for ctx in occurrences:
            pooled.update(ctx)
        return entropy_of_counts(pooled)

    values = []
    for i in range(cfg.k_samples):
        rng = np.random.Generator(np.random.Philox(key=(cfg.seed << 64) | i))
        picked = rng.choice(len(occurrences), size=cfg.n_contexts, replace=False)
        pooled = Counter()
        for idx in picked:
            pooled.update(occurrences[idx])
        values.append(entropy_of_counts(pooled))
    return math.fsum(values) / cfg.k_samples


def mon_choose_n(occurrence_counts: Mapping[str, tuple[int, int]]) -> int:
    """Smallest occurrence count over all targets and both their periods.

    ``occurrence_counts`` maps each target to its (period 1, period 2)
    occurrence counts.  Targets absent from either period make the minimum
    meaningless, so they are reported in one error instead.
    """
    if not occurrence_counts:
        raise InsufficientDataError("cannot choose n from an empty target set")
    absent = tuple(sorted(t for t, pair in occurrence_counts.items() if min(pair) < 1))
    if absent:
        raise InsufficientDataError(
            "targets absent from one of their periods: " + ", ".join(absent),
            missing=absent,
        )
    return min(min(pair) for pair in occurrence_counts.values())


@dataclass(frozen=True)
class OlsFit:
    alpha: float
    beta: float
    #: requested fit window size
    window_n: int
    #: the target frequency the window was centred on
    anchor_freq: int
    #: points actually used (smaller than window_n for small vocabularies)
    n_points: int

    def predict(self, freq: int) -> float:
        return self.alpha + self.beta * math.log(freq)


def ols_delta(
    matrix: CoocMatrix,
    target: str,
    window_n: int = 1000,
    entropies: Mapping[str, float] | None = None,
) -> tuple[OlsFit, float]:
    """Residual of the target's entropy from a local fit H ~ alpha + beta ln freq.

    The fit uses the ``window_n`` vocabulary words closest to the target in
    raw frequency (ties broken by key, the target itself excluded).  Pass a
    precomputed ``entropies`` map (see all_entropies) when scoring many
    targets against one matrix.
    """
    if window_n < 2:
        raise ValueError(f"window_n must be >= 2, got {window_n}")
    if entropies is None:
        entropies = all_entropies(matrix)
    if target not in entropies:
        raise UndefinedMeasureError(
            f"{target!r} has no entropy in slice {matrix.slice_label!r}"
        )
    anchor = matrix.token_freq[target]
    pool = sorted(
        (abs(matrix.token_freq[key] - anchor), key) for key in entropies if key != target
    )
    chosen = pool[:window_n]
    if len(chosen) < 2:
        raise DegenerateFitError(
            f"need at least two other vocabulary words to fit, have {len(chosen)}"
        )
    xs = np.log([matrix.token_freq[key] for _, key in chosen])
    ys = np.array([entropies[key] for _, key in chosen])
    if np.all(xs == xs[0]):
        raise DegenerateFitError("all fit points share one frequency, slope is undefined")
    beta, alpha = np.polyfit(xs, ys, 1)
    fit = OlsFit(
        alpha=float(alpha),
        beta=float(beta),
        window_n=window_n,
        anchor_freq=anchor,
        n_points=len(chosen),
    )
    return fit, float(entropies[target] - fit.predict(anchor))


def ols_change(reference_delta: float, focus_delta: float) -> float:
    """Change in the OLS residual from the reference to the focus period."""
    return focus_delta - reference_delta
