from .context import (
    CvReport,
    ScoredOccurrence,
    coefficient_of_variation,
    context_sensitivity,
    score_distributions,
    score_occurrences,
)
from .embedding_analysis import embedding_distances, sequence_vs_random_distance
from .metrics import (
    MetricReport,
    accuracy_multiclass,
    f1_at,
    f1_best,
    macro_auc,
    macro_f1,
    mann_whitney_u,
    roc_auc,
    roc_curve_points,
)
from .reports import aggregate_scores, evaluate_binary, evaluate_hostclass, host_probabilities, predict_hosts


__all__ = (
    "CvReport",
    "MetricReport",
    "ScoredOccurrence",
    "accuracy_multiclass",
    "aggregate_scores",
    "coefficient_of_variation",
    "context_sensitivity",
    "embedding_distances",
    "evaluate_binary",
    "evaluate_hostclass",
    "f1_at",
    "f1_best",
    "host_probabilities",
    "macro_auc",
    "macro_f1",
    "mann_whitney_u",
    "predict_hosts",
    "roc_auc",
    "roc_curve_points",
    "score_distributions",
    "score_occurrences",
    "sequence_vs_random_distance",
)
