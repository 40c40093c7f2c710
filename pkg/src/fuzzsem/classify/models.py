"""Logistic regression, k-nearest neighbours and random forest in numpy.

All three expose scores in [0, 1]; a sample is predicted positive when its
score reaches the model threshold (0.5 by default).
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


class Kind(enum.Enum):
    LOGREG = "logreg"
    KNN = "knn"
    FOREST = "forest"


KIND_ALIASES = {
    "logreg": Kind.LOGREG,
    "logistic-regression": Kind.LOGREG,
    "knn": Kind.KNN,
    "forest": Kind.FOREST,
    "random-forest": Kind.FOREST,
}


def parse_kind(name: str | Kind) -> Kind:
    if isinstance(name, Kind):
        return name
    try:
        return KIND_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown classifier {name!r}") from None


class ArityMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierConfig:
    logreg_lr: float = 0.1
    logreg_epochs: int = 500
    logreg_l2: float = 1e-4
    knn_k: int = 5
    forest_trees: int = 100
    forest_max_features: int | None = None  # default floor(sqrt(n_features))
    forest_min_samples_split: int = 2
    threshold: float = 0.5


@dataclass
class TrainedModel:
    kind: Kind
    params: dict
    n_features: int
    threshold: float = 0.5
    train_meta: dict = field(default_factory=dict)

    def predict_scores(self, x) -> np.ndarray:
        return predict_scores(self, x)

    def predict(self, x) -> np.ndarray:
        return (predict_scores(self, x) >= self.threshold).astype(int)

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {k: plain(w) for k, w in v.items()}
            if isinstance(v, list):
                return [plain(w) for w in v]
            return v

        return {
            "format": "fuzzsem-model/1",
            "kind": self.kind.value,
            "n_features": self.n_features,
            "threshold": self.threshold,
            "train_meta": plain(self.train_meta),
            "params": plain(self.params),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainedModel":
        kind = Kind(doc["kind"])
        p = dict(doc["params"])
        for key in ("mean", "std", "weights", "x_train"):
            if key in p:
                p[key] = np.asarray(p[key], dtype=float)
        if "y_train" in p:
            p["y_train"] = np.asarray(p["y_train"], dtype=int)
        if "trees" in p:
            p["trees"] = [_Tree.from_dict(t) for t in p["trees"]]
        return cls(kind, p, doc["n_features"], doc["threshold"], doc.get("train_meta", {}))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), default=_tree_json) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _tree_json(obj):
    if isinstance(obj, _Tree):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _standardize_stats(x: np.ndarray):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0] = 1.0  # constant columns stay at 0 after centering
    return mean, std


def _check(x, n_features=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ArityMismatch(f"expected a 2-D feature matrix, got shape {x.shape}")
    if n_features is not None and x.shape[1] != n_features:
        raise ArityMismatch(f"model expects {n_features} features, got {x.shape[1]}")
    return x


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _logloss(z, y):
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def fit_logreg(x, y, cfg: ClassifierConfig):
    mean, std = _standardize_stats(x)
    xs = (x - mean) / std
    n, d = xs.shape
    w = np.zeros(d)
    b = 0.0
    losses = []
    for _ in range(cfg.logreg_epochs + 1):
        z = xs @ w + b
        losses.append(_logloss(z, y) + 0.5 * cfg.logreg_l2 * float(w @ w))
        if len(losses) > cfg.logreg_epochs:
            break
        r = _sigmoid(z) - y
        w = w - cfg.logreg_lr * (xs.T @ r / n + cfg.logreg_l2 * w)
        b = b - cfg.logreg_lr * float(r.mean())
    losses = np.array(losses)
    increases = int(np.sum(np.diff(losses) > 1e-9))
    if increases > 0.01 * cfg.logreg_epochs:
        warnings.warn(
            f"logistic regression loss rose on {increases} of {cfg.logreg_epochs} steps; "
            "learning rate too large for this data",
            RuntimeWarning,
            stacklevel=3,
        )
    params = {"mean": mean, "std": std, "weights": w, "bias": b}
    meta = {"loss_trace_start": float(losses[0]), "loss_trace_end": float(losses[-1]), "loss_increases": increases}
    return params, meta, losses


def fit_knn(x, y, cfg: ClassifierConfig):
    k = cfg.knn_k
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd number")
    if k > len(x):
        raise ValueError(f"k={k} exceeds the training size {len(x)}")
    mean, std = _standardize_stats(x)
    return {"mean": mean, "std": std, "x_train": (x - mean) / std, "y_train": y.astype(int), "k": k}


class _Tree:
    """Array-backed binary tree; leaves have ``feature == -1``."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=int)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=int)
        self.right = np.asarray(right, dtype=int)
        self.value = np.asarray(value, dtype=float)

    def apply(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(len(x), dtype=int)
        rows = np.arange(len(x))
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return self.value[node]
            r = rows[inner]
            nd = node[inner]
            go_left = x[r, feat[inner]] <= self.threshold[nd]
            node[inner] = np.where(go_left, self.left[nd], self.right[nd])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "_Tree":
        if isinstance(d, _Tree):
            return d
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])

    @property
    def node_count(self) -> int:
        return len(self.feature)


def _best_split(xn, yn, order_features, max_features):
    """Lowest weighted-Gini split, examining ``max_features`` non-constant features.

    ``order_features`` must list only features that vary within the node.
    """
    m = len(yn)
    total1 = yn.sum()
    best = None
    visited = 0
    for f in order_features:
        if visited >= max_features and best is not None:
            break
        col = xn[:, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        cut = np.flatnonzero(v[1:] > v[:-1])
        visited += 1
        c1 = np.cumsum(yn[order])[cut]
        nl = cut + 1.0
        nr = m - nl
        r1 = total1 - c1
        gl = 1.0 - (c1 / nl) ** 2 - ((nl - c1) / nl) ** 2
        gr = 1.0 - (r1 / nr) ** 2 - ((nr - r1) / nr) ** 2
        score = (nl * gl + nr * gr) / m
        i = int(np.argmin(score))
        if best is None or score[i] < best[0]:
            lo, hi = v[cut[i]], v[cut[i] + 1]
            thr = (lo + hi) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (score[i], f, thr)
    return best


def build_tree(x, y, rng: np.random.Generator, max_features: int, min_samples_split: int = 2) -> _Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)))]
    n_features = x.shape[1]
    while stack:
        node, idx = stack.pop()
        yn = y[idx]
        if len(idx) < min_samples_split or yn.min() == yn.max():
            continue
        xn = x[idx]
        perm = rng.permutation(n_features)
        varying = xn.max(axis=0) > xn.min(axis=0)
        split = _best_split(xn, yn, perm[varying[perm]], max_features)
        if split is None:
            continue
        _, f, thr = split
        go_left = x[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return _Tree(feature, threshold, left, right, value)


def fit_forest(x, y, cfg: ClassifierConfig, seed: int):
    n, d = x.shape
    max_features = cfg.forest_max_features or max(1, int(math.isqrt(d)))
    trees = []
    for child in np.random.SeedSequence(seed).spawn(cfg.forest_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, size=n)
        trees.append(build_tree(x[boot], y[boot], rng, max_features, cfg.forest_min_samples_split))
    return {"trees": trees, "max_features": max_features}


def fit(kind, x, y, config: ClassifierConfig = ClassifierConfig(), seed: int = 0, fold=None) -> TrainedModel:
    """Train a classifier of ``kind`` on ``(x, y)``."""
    kind = parse_kind(kind)
    x = _check(x)
    y = np.asarray(y, dtype=int)
    if len(x) != len(y):
        raise ValueError("features and labels differ in length")
    if set(np.unique(y)) != {0, 1}:
        raise ValueError("training labels must contain both classes 0 and 1")
    if min(np.sum(y == 0), np.sum(y == 1)) < 2:
        raise ValueError("need at least two examples of each class")

    meta = {"seed": seed, "fold": fold, "config": asdict(config), "n_train": len(y)}
    if kind is Kind.LOGREG:
        params, extra, _ = fit_logreg(x, y, config)
        meta.update(extra)
    elif kind is Kind.KNN:
        params = fit_knn(x, y, config)
    else:
        params = fit_forest(x, y, config, seed)
    return TrainedModel(kind, params, x.shape[1], config.threshold, meta)


def knn_neighbours(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """Indices of the k nearest training rows, ties broken by lower index."""
    p = model.params
    xs = (x - p["mean"]) / p["std"]
    diff = xs[:, None, :] - p["x_train"][None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return np.argsort(d2, axis=1, kind="stable")[:, : p["k"]]


def predict_scores(model: TrainedModel, x) -> np.ndarray:
    x = _check(x, model.n_features)
    p = model.params
    if model.kind is Kind.LOGREG:
        return _sigmoid(((x - p["mean"]) / p["std"]) @ p["weights"] + p["bias"])
    if model.kind is Kind.KNN:
        return p["y_train"][knn_neighbours(model, x)].mean(axis=1)
    trees = [_Tree.from_dict(t) for t in p["trees"]]
    return np.mean([t.apply(x) for t in trees], axis=0)
