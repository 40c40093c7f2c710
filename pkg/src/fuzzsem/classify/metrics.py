"""ROC curve, AUC and confusion counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # +inf first, -inf last
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_auc(scores, labels) -> RocCurve:
    """ROC over every distinct score; equal scores form one threshold step.

    The curve runs from (0, 0) at threshold +inf to (1, 1) at -inf and the
    area is the trapezoidal integral, which for grouped ties equals the
    Mann-Whitney statistic with ties counted as one half.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes present")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    # +inf admits nothing, -inf admits everything
    thresholds = np.r_[np.inf, s[ends], -np.inf]
    tpr = np.r_[0.0, tp / n_pos, 1.0]
    fpr = np.r_[0.0, fp / n_neg, 1.0]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


def confusion(pred, labels) -> np.ndarray:
    """``[[tn, fp], [fn, tp]]``."""
    p = np.asarray(pred, dtype=int)
    y = np.asarray(labels, dtype=int)
    out = np.zeros((2, 2), dtype=int)
    for t in (0, 1):
        for q in (0, 1):
            out[t, q] = int(np.sum((y == t) & (p == q)))
    return out


def accuracy(pred, labels) -> float:
    return float(np.mean(np.asarray(pred) == np.asarray(labels)))
