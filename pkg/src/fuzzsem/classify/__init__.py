from .evaluate import EvalReport, accuracy_over_windows, cross_validate, holdout, stratified_folds
from .metrics import RocCurve, accuracy, confusion, roc_auc
from .models import (
    ArityMismatch,
    ClassifierConfig,
    Kind,
    TrainedModel,
    fit,
    parse_kind,
    predict_scores,
)

__all__ = [
    "ArityMismatch",
    "ClassifierConfig",
    "EvalReport",
    "Kind",
    "RocCurve",
    "TrainedModel",
    "accuracy",
    "accuracy_over_windows",
    "confusion",
    "cross_validate",
    "fit",
    "holdout",
    "parse_kind",
    "predict_scores",
    "roc_auc",
    "stratified_folds",
]
