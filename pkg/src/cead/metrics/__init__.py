"""Evaluation metrics: ranking, distributional distance, and reports."""

from .evaluation import (
    capped_indices,
    cf_auroc,
    concept_accuracy,
    concept_hits,
    evaluate_scenario,
    score_indices,
    substitution_auroc,
)
from .fid import (
    RandomConvFeatures,
    fid,
    fid_from_moments,
    gaussian_moments,
    normalized_fid,
)
from .ranking import auroc, rank_by_score, score_distance
from .report import (
    MEAN_ROW,
    METRIC_COLUMNS,
    AggregateRow,
    MetricsRow,
    aggregate,
    read_rows,
    write_rows,
)

__all__ = [
    "auroc",
    "rank_by_score",
    "score_distance",
    "fid",
    "fid_from_moments",
    "gaussian_moments",
    "normalized_fid",
    "RandomConvFeatures",
    "capped_indices",
    "cf_auroc",
    "concept_accuracy",
    "concept_hits",
    "evaluate_scenario",
    "score_indices",
    "substitution_auroc",
    "MetricsRow",
    "AggregateRow",
    "METRIC_COLUMNS",
    "MEAN_ROW",
    "aggregate",
    "read_rows",
    "write_rows",
]
