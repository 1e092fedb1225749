from .cross_validation import cross_validate
from .curves import LossCurve
from .labels import LabelSet, occurrence_key
from .loops import TrainingRun, finetune, load_for_finetuning, pretrain
from .splits import SplitPlan, deal_folds, make_splits, split_temporal, temporal_boundary


__all__ = (
    "LabelSet",
    "LossCurve",
    "SplitPlan",
    "TrainingRun",
    "cross_validate",
    "deal_folds",
    "finetune",
    "load_for_finetuning",
    "make_splits",
    "occurrence_key",
    "pretrain",
    "split_temporal",
    "temporal_boundary",
)
