"""Cross-validated evaluation and the accuracy-versus-horizon sweep."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..features import truncate_matrix
from .metrics import RocCurve, accuracy, confusion, roc_auc
from .models import ClassifierConfig, Kind, fit, parse_kind


@dataclass
class EvalReport:
    kind: str
    accuracy: float
    auc: float
    confusion: np.ndarray
    roc: RocCurve
    protocol: str
    window_accuracy: dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "protocol": self.protocol,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "confusion": self.confusion.tolist(),
            "roc_points": [list(p) for p in self.roc.points],
            "roc_thresholds": [_jsonable(t) for t in self.roc.thresholds.tolist()],
            "window_accuracy": {str(k): v for k, v in self.window_accuracy.items()},
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _jsonable(t: float):
    if np.isinf(t):
        return "inf" if t > 0 else "-inf"
    return t


def stratified_folds(y, n_folds: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per sample; each class is shuffled and dealt round-robin."""
    y = np.asarray(y, dtype=int)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    counts = np.bincount(y, minlength=2)
    if n_folds > counts.min():
        raise ValueError(f"{n_folds} folds exceed the smallest class size {counts.min()}")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=int)
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        folds[idx] = np.arange(len(idx)) % n_folds
    return folds


def stratified_split(y, test_fraction: float = 0.2, seed: int = 0) -> np.ndarray:
    """Boolean test mask holding ``test_fraction`` of each class."""
    y = np.asarray(y, dtype=int)
    rng = np.random.default_rng(seed)
    test = np.zeros(len(y), dtype=bool)
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        test[idx[: int(round(test_fraction * len(idx)))]] = True
    return test


def out_of_fold_scores(kind, x, y, folds, config: ClassifierConfig, seed: int) -> np.ndarray:
    scores = np.empty(len(y))
    for f in np.unique(folds):
        test = folds == f
        model = fit(kind, x[~test], y[~test], config, seed=seed + int(f), fold=int(f))
        scores[test] = model.predict_scores(x[test])
    return scores


def _report(kind, scores, y, threshold, protocol) -> EvalReport:
    pred = (scores >= threshold).astype(int)
    roc = roc_auc(scores, y)
    return EvalReport(
        kind=parse_kind(kind).value,
        accuracy=accuracy(pred, y),
        auc=roc.auc,
        confusion=confusion(pred, y),
        roc=roc,
        protocol=protocol,
    )


def cross_validate(
    kind, x, y, config: ClassifierConfig = ClassifierConfig(), n_folds: int = 5, seed: int = 0
) -> EvalReport:
    """Pooled out-of-fold accuracy, ROC and confusion counts."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    folds = stratified_folds(y, n_folds, seed)
    scores = out_of_fold_scores(kind, x, y, folds, config, seed)
    return _report(kind, scores, y, config.threshold, f"stratified-{n_folds}-fold")


def holdout(kind, x, y, config: ClassifierConfig = ClassifierConfig(), test_fraction=0.2, seed=0) -> EvalReport:
    """Single stratified train/test split."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    test = stratified_split(y, test_fraction, seed)
    model = fit(kind, x[~test], y[~test], config, seed=seed)
    return _report(kind, model.predict_scores(x[test]), y[test], config.threshold, "stratified-holdout")


def accuracy_over_windows(
    kind,
    x,
    y,
    horizons: Sequence[float],
    n_folds: int = 5,
    seed: int = 0,
    config: ClassifierConfig = ClassifierConfig(),
    use_masks: bool = True,
) -> dict[float, float]:
    """CV accuracy on features truncated at each horizon.

    Every horizon uses the same fold assignment so the curve compares
    like with like.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if any(not 0 <= h <= 40 for h in horizons):
        raise ValueError("horizons must lie in [0, 40]")
    folds = stratified_folds(y, n_folds, seed)
    out = {}
    for h in horizons:
        xt = truncate_matrix(x, h, use_masks)
        scores = out_of_fold_scores(kind, xt, y, folds, config, seed)
        out[h] = accuracy((scores >= config.threshold).astype(int), y)
    return out


__all__ = [
    "EvalReport",
    "Kind",
    "accuracy_over_windows",
    "cross_validate",
    "holdout",
    "stratified_folds",
    "stratified_split",
]
