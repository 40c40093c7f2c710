"""Per-second centroid-distance features over a projected log file.

Bins are ``T = {0, 4, 5, ..., 40}``: bin 0 pools the connection-attempt
phase ``[0, 4)``, bins 4..39 each cover one second, and bin 40 absorbs
everything from second 40 onward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BINS: tuple[int, ...] = (0,) + tuple(range(4, 41))
N_BINS = len(BINS)  # 38
FEATURE_COLUMNS = [f"d{t}" for t in BINS] + [f"m{t}" for t in BINS]


def bin_index(elapsed_s: int) -> int:
    """Position in :data:`BINS` for an elapsed second."""
    if elapsed_s < 0:
        raise ValueError("elapsed_s must be non-negative")
    if elapsed_s < 4:
        return 0
    return min(int(elapsed_s), 40) - 3


def bin_label(elapsed_s: int) -> int:
    return BINS[bin_index(elapsed_s)]


@dataclass(frozen=True)
class FeatureVector:
    distances: np.ndarray
    present: np.ndarray
    label: int
    duration_s: int | None = None
    source_path: str = ""

    def as_row(self, use_masks: bool = True) -> np.ndarray:
        if use_masks:
            return np.concatenate([self.distances, self.present.astype(float)])
        return self.distances.copy()


def bin_points(points: Iterable[tuple[int, float, float]]) -> dict[int, list[tuple[float, float]]]:
    """Group ``(elapsed_s, y1, y2)`` points by bin label."""
    out: dict[int, list[tuple[float, float]]] = {}
    for elapsed, y1, y2 in points:
        out.setdefault(bin_label(elapsed), []).append((y1, y2))
    return out


def centroid_distance(points: Sequence[tuple[float, float]] | np.ndarray, compat: bool = False) -> float:
    """Distance of the bin centroid from the origin.

    ``compat=True`` evaluates ``sqrt(mean_y1 + mean_y2)`` instead, with a
    negative sum clamped to 0. It exists only to audit against the literal
    formula and is not a distance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("empty bin")
    c1, c2 = pts.mean(axis=0)
    if compat:
        return math.sqrt(max(c1 + c2, 0.0))
    return math.hypot(c1, c2)


def featurize(
    y: np.ndarray,
    elapsed_s: Sequence[int],
    label: int,
    duration_s: int | None = None,
    source_path: str = "",
    compat: bool = False,
) -> FeatureVector:
    """Turn a file's 2-D projection into its 38-bin feature vector."""
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("projection is empty")
    if len(y) != len(elapsed_s):
        raise ValueError("need one elapsed time per projected point")
    idx = np.array([bin_index(e) for e in elapsed_s])
    distances = np.zeros(N_BINS)
    present = np.zeros(N_BINS, dtype=bool)
    for b in np.unique(idx):
        distances[b] = centroid_distance(y[idx == b], compat=compat)
        present[b] = True
    return FeatureVector(distances, present, int(label), duration_s, source_path)


def truncate_to_window(fv: FeatureVector, horizon_s: float) -> FeatureVector:
    """Drop every bin whose label exceeds ``horizon_s``."""
    if not 0 <= horizon_s <= 40:
        raise ValueError("horizon_s must lie in [0, 40]")
    keep = np.array(BINS) <= horizon_s
    return replace(fv, distances=np.where(keep, fv.distances, 0.0), present=fv.present & keep)


def truncate_matrix(x: np.ndarray, horizon_s: float, use_masks: bool = True) -> np.ndarray:
    """Apply :func:`truncate_to_window` to rows laid out by :meth:`FeatureVector.as_row`."""
    if not 0 <= horizon_s <= 40:
        raise ValueError("horizon_s must lie in [0, 40]")
    keep = np.array(BINS) <= horizon_s
    if use_masks:
        keep = np.concatenate([keep, keep])
    return np.where(keep, x, 0.0)


def write_features(path: str | Path, vectors: Sequence[FeatureVector]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source_path", "label", "duration_s"] + FEATURE_COLUMNS)
        for fv in vectors:
            w.writerow(
                [fv.source_path, fv.label, "" if fv.duration_s is None else fv.duration_s]
                + [repr(float(v)) for v in fv.distances]
                + [int(m) for m in fv.present]
            )


def read_features(path: str | Path) -> list[FeatureVector]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[3:] != FEATURE_COLUMNS:
            raise ValueError(f"{path}: unexpected feature columns")
        for row in reader:
            vals = row[3:]
            out.append(
                FeatureVector(
                    distances=np.array([float(v) for v in vals[:N_BINS]]),
                    present=np.array([v == "1" for v in vals[N_BINS:]]),
                    label=int(row[1]),
                    duration_s=int(row[2]) if row[2] != "" else None,
                    source_path=row[0],
                )
            )
    return out


def feature_matrix(vectors: Sequence[FeatureVector], use_masks: bool = True):
    """Stack vectors into ``(X, y)`` for the classifiers."""
    x = np.vstack([fv.as_row(use_masks) for fv in vectors])
    y = np.array([fv.label for fv in vectors], dtype=int)
    return x, y
