"""Keyword ground truth: success/fail label and connection duration."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import ProfilingDocument, elapsed_ms

DEFAULT_KEYWORD = "rrcConnectionSetupComplete"
DEFAULT_TIMEOUT_S = 600.0


@dataclass(frozen=True)
class OutcomeLabel:
    label: int
    matched_at_ms: int | None = None
    duration_s: int | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if (self.label == 1) != (self.matched_at_ms is not None):
            raise ValueError("matched_at_ms must be set exactly when label == 1")
        if (self.label == 1) != (self.duration_s is not None):
            raise ValueError("duration_s must be set exactly when label == 1")


def label_outcome(
    doc: ProfilingDocument,
    keyword: str = DEFAULT_KEYWORD,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> OutcomeLabel:
    """Label a run as success (1) when ``keyword`` appears within the timeout.

    The search is a case-sensitive substring match on the raw record content.
    """
    if not keyword:
        raise ValueError("keyword must be nonempty")
    if timeout_s <= 0:
        raise ValueError("timeout_s must be positive")
    if not doc.records:
        return OutcomeLabel(0)
    first = doc.records[0].timestamp_ms
    limit_ms = timeout_s * 1000.0
    for rec in doc.records:
        if keyword not in rec.content:
            continue
        off = elapsed_ms(first, rec.timestamp_ms)
        if off <= limit_ms:
            return OutcomeLabel(1, matched_at_ms=rec.timestamp_ms, duration_s=off // 1000)
    return OutcomeLabel(0)


def duration_histogram(
    labels: Iterable[OutcomeLabel], bin_width_s: float
) -> dict[tuple[float, float], int]:
    """Count successful durations in fixed-width bins ``[k*w, (k+1)*w)``.

    Only non-empty bins are returned, ordered by their lower edge.
    """
    if bin_width_s <= 0:
        raise ValueError("bin_width_s must be positive")
    counts: dict[int, int] = {}
    for lab in labels:
        if lab.label != 1:
            continue
        k = math.floor(lab.duration_s / bin_width_s)
        counts[k] = counts.get(k, 0) + 1
    return {(k * bin_width_s, (k + 1) * bin_width_s): counts[k] for k in sorted(counts)}


def write_manifest(path: str | Path, rows: Sequence[tuple[str, OutcomeLabel]]) -> None:
    """Write ``source_path,label,duration_s`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source_path", "label", "duration_s"])
        for source, lab in rows:
            w.writerow([source, lab.label, "" if lab.duration_s is None else lab.duration_s])


def read_manifest(path: str | Path) -> dict[str, tuple[int, int | None]]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            dur = row["duration_s"]
            out[row["source_path"]] = (int(row["label"]), int(dur) if dur != "" else None)
    return out
