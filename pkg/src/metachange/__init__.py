"""Entropy-based detection of metaphoric semantic change in historical corpora."""

from .change import (
    ChangeScore,
    MeasureParams,
    PeriodData,
    TargetSpec,
    load_testset,
    period_label,
    periods_for_change_date,
    rank_targets,
    score_target,
)
from .corpus import Document, Sentence, TimeSlice, Token, parse_corpus, preprocess, slice_corpus
from .errors import (
    DegenerateFitError,
    FormatError,
    InsufficientDataError,
    KeyMismatchError,
    MetachangeError,
    UndefinedMeasureError,
)
from .evaluation import (
    AnnotationStats,
    ContextPair,
    GoldEntry,
    annotation_stats,
    evaluate,
    fleiss_kappa,
    load_gold,
    sample_annotation_pairs,
    spearman,
    spearman_permutation,
)
from .matrix import CoocMatrix, build_matrix, contexts_of, load_matrix, occurrence_contexts, save_matrix
from .measures import (
    AssocMetric,
    Measure,
    association,
    entropy,
    entropy_of_counts,
    freq_n,
    second_order_entropy,
)
from .normalize import MonConfig, OlsFit, mon_choose_n, mon_entropy, ols_change, ols_delta

__version__ = "0.1.0"
