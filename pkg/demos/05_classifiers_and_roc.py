"""
Three classifiers and their ROC curves
======================================

Logistic regression, k-nearest neighbours and a random forest, all
trained on standardized features and scored with stratified
cross-validation on a toy problem.
"""

import numpy as np

from fuzzsem.classify import ClassifierConfig, cross_validate, roc_auc

rng = np.random.default_rng(3)
n = 120
y = np.arange(n) % 2
# only the first two columns carry signal, and on very different scales
x = rng.normal(size=(n, 8))
x[:, 0] += 1.5 * y
x[:, 1] = 1000 * (x[:, 1] - 1.0 * y)

cfg = ClassifierConfig(forest_trees=50)
for kind in ("logreg", "knn", "forest"):
    rep = cross_validate(kind, x, y, cfg, n_folds=5, seed=0)
    print(f"{kind:<7} accuracy {rep.accuracy:.3f}  AUC {rep.auc:.3f}  confusion {rep.confusion.tolist()}")

# AUC equals the probability that a random positive outscores a random
# negative, with ties counting half.
scores = np.array([0.9, 0.4, 0.4, 0.2, 0.7, 0.1])
labels = np.array([1, 1, 0, 0, 1, 0])
curve = roc_auc(scores, labels)
print("ROC points:", [tuple(round(v, 2) for v in p) for p in curve.points])
print("AUC:", curve.auc)
