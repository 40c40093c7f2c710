"""Staged, resumable pipeline over a directory of sidecar artifacts.

Layout under the output directory::

    groups/<stem>.jsonl        event groups (timestamp_ms, elapsed_s, text)
    labels.csv                 source_path,label,duration_s
    embeddings/<stem>.npz      512-d vectors keyed by timestamp_ms
    projections/<stem>.csv     source_path,timestamp_ms,elapsed_s,y1,y2
    features.csv               38 distances + 38 masks per file
    models/<kind>.json         trained model
    reports/<kind>.json        cross-validated evaluation
    sweep.csv                  accuracy per horizon and classifier
"""

from __future__ import annotations

import csv
import glob
import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import embed, tsne
from .classify import ClassifierConfig, Kind, TrainedModel, accuracy_over_windows, cross_validate, fit, holdout
from .classify.models import parse_kind
from .features import feature_matrix, featurize, read_features, write_features
from .groundtruth import (
    DEFAULT_KEYWORD,
    DEFAULT_TIMEOUT_S,
    OutcomeLabel,
    duration_histogram,
    label_outcome,
    write_manifest,
)
from .ingest import EventGroup, parse_file

log = logging.getLogger("fuzzsem")

ALL_KINDS = (Kind.LOGREG, Kind.KNN, Kind.FOREST)


class MissingArtifact(FileNotFoundError):
    """An upstream stage has not produced its output yet."""


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    out: str = "out"
    seed: int = 7
    keyword: str = DEFAULT_KEYWORD
    timeout_s: float = DEFAULT_TIMEOUT_S
    per_second_groups: bool = False
    exclude_keyword: bool = False
    embedder: str = "hashing"
    endpoint: str | None = None
    perplexity: float = 30.0
    iters: int = 1000
    eta: float = 200.0
    classifiers: list[str] = field(default_factory=lambda: [k.value for k in ALL_KINDS])
    folds: int = 5
    holdout: bool = False
    horizons: list[float] = field(default_factory=lambda: [0] + list(range(4, 41)))
    use_masks: bool = True
    compat_distance: bool = False
    workers: int = 1

    def __post_init__(self):
        kinds = [parse_kind(k) for k in self.classifiers]
        self.classifiers = [k.value for k in kinds]
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if any(not 0 <= h <= 40 for h in self.horizons):
            raise ValueError("horizons must lie in [0, 40]")
        if self.embedder not in ("hashing", "remote"):
            raise ValueError("embedder must be 'hashing' or 'remote'")
        if self.embedder == "remote" and not self.endpoint:
            raise ValueError("remote embedder requires --endpoint")
        self.tsne_config()  # validates perplexity, iters, eta

    def tsne_config(self, seed: int | None = None) -> tsne.TsneConfig:
        return tsne.TsneConfig(
            perplexity=self.perplexity, eta=self.eta, iters=self.iters, seed=self.seed if seed is None else seed
        )

    def embedder_spec(self) -> embed.EmbedderSpec:
        if self.embedder == "remote":
            return embed.EmbedderSpec(embed.Backend.REMOTE, remote_endpoint=self.endpoint)
        return embed.EmbedderSpec()

    @classmethod
    def from_mapping(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def progress(stage: str, **info) -> None:
    log.info(json.dumps({"stage": stage, **info}, sort_keys=True))


def expand_inputs(patterns: Sequence[str]) -> list[Path]:
    paths = []
    for pat in patterns:
        p = Path(pat)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.log")))
        else:
            matched = sorted(glob.glob(pat))
            paths.extend(Path(m) for m in matched or [pat])
    stems = [p.stem for p in paths]
    dup = {s for s in stems if stems.count(s) > 1}
    if dup:
        raise ValueError(f"input files share stems: {sorted(dup)}")
    if not paths:
        raise MissingArtifact("no input log files")
    return paths


def file_seed(seed: int, stem: str) -> int:
    """Per-file seed so one file can be re-run in isolation."""
    return int(np.random.SeedSequence([seed, zlib.crc32(stem.encode())]).generate_state(1)[0])


def _need(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifact(f"missing upstream artifact: {path}")
    return path


def _stems(out: Path, sub: str, suffix: str) -> list[str]:
    d = _need(out / sub)
    stems = sorted(p.name[: -len(suffix)] for p in d.glob("*" + suffix))
    if not stems:
        raise MissingArtifact(f"no artifacts in {d}")
    return stems


def _map(fn: Callable, items: list, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- parse -------------------------------------------------------------------

def write_groups(path: Path, source: str, groups: Sequence[EventGroup]) -> None:
    with open(path, "w") as fh:
        for g in groups:
            fh.write(
                json.dumps(
                    {"source_path": source, "timestamp_ms": g.timestamp_ms, "elapsed_s": g.elapsed_s, "text": g.text}
                )
                + "\n"
            )


def read_groups(path: Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def stage_parse(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    (out / "groups").mkdir(parents=True, exist_ok=True)
    exclude = cfg.keyword if cfg.exclude_keyword else None
    for path in expand_inputs(cfg.inputs):
        doc = parse_file(path, per_second=cfg.per_second_groups, exclude=exclude)
        write_groups(out / "groups" / f"{path.stem}.jsonl", str(path), doc.groups)
        progress("parse", file=str(path), records=len(doc.records), groups=len(doc.groups))


def stage_label(cfg: PipelineConfig) -> list[tuple[str, OutcomeLabel]]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in expand_inputs(cfg.inputs):
        lab = label_outcome(parse_file(path), cfg.keyword, cfg.timeout_s)
        rows.append((str(path), lab))
        progress("label", file=str(path), label=lab.label, duration_s=lab.duration_s)
    write_manifest(out / "labels.csv", rows)
    return rows


# -- embed / reduce ----------------------------------------------------------

def stage_embed(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    (out / "embeddings").mkdir(exist_ok=True)
    spec = cfg.embedder_spec()
    for stem in _stems(out, "groups", ".jsonl"):
        groups = read_groups(out / "groups" / f"{stem}.jsonl")
        vectors = embed.embed_texts(spec, [g["text"] for g in groups])
        np.savez(
            out / "embeddings" / f"{stem}.npz",
            vectors=vectors,
            timestamp_ms=np.array([g["timestamp_ms"] for g in groups], dtype=np.int64),
            elapsed_s=np.array([g["elapsed_s"] for g in groups], dtype=np.int64),
            source_path=np.array(groups[0]["source_path"] if groups else stem),
        )
        progress("embed", file=stem, vectors=len(groups))


def _reduce_one(job):
    out, stem, cfg = job
    data = np.load(out / "embeddings" / f"{stem}.npz")
    vectors = data["vectors"]
    seed = file_seed(cfg.seed, stem)
    if len(vectors) >= 3:
        proj = tsne.fit(vectors, cfg.tsne_config(seed))
        y, kl = proj.y, float(proj.kl_trace[-1])
    else:
        # too few points for t-SNE: every event sits at the origin
        y, kl = np.zeros((len(vectors), 2)), float("nan")
    source = str(data["source_path"])
    with open(out / "projections" / f"{stem}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source_path", "timestamp_ms", "elapsed_s", "y1", "y2"])
        for (ts, el), (y1, y2) in zip(zip(data["timestamp_ms"], data["elapsed_s"]), y):
            w.writerow([source, int(ts), int(el), repr(float(y1)), repr(float(y2))])
    return stem, len(vectors), kl


def stage_reduce(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    (out / "projections").mkdir(exist_ok=True)
    jobs = [(out, stem, cfg) for stem in _stems(out, "embeddings", ".npz")]
    for stem, n, kl in _map(_reduce_one, jobs, cfg.workers):
        progress("reduce", file=stem, points=n, kl=kl)


def read_projection(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    y = np.array([[float(r["y1"]), float(r["y2"])] for r in rows]).reshape(-1, 2)
    elapsed = [int(r["elapsed_s"]) for r in rows]
    source = rows[0]["source_path"] if rows else ""
    return y, elapsed, source


# -- features ----------------------------------------------------------------

def stage_featurize(cfg: PipelineConfig):
    out = Path(cfg.out)
    labels = _read_labels(_need(out / "labels.csv"))
    vectors = []
    for stem in _stems(out, "projections", ".csv"):
        y, elapsed, source = read_projection(out / "projections" / f"{stem}.csv")
        if stem not in labels:
            raise MissingArtifact(f"no label for {stem} in labels.csv")
        source_path, label, duration = labels[stem]
        if len(y) == 0:
            fv = featurize(np.zeros((1, 2)), [0], label, duration, source_path)
        else:
            fv = featurize(y, elapsed, label, duration, source_path, compat=cfg.compat_distance)
        vectors.append(fv)
        progress("featurize", file=stem, present_bins=int(fv.present.sum()))
    write_features(out / "features.csv", vectors)
    return vectors


def _read_labels(path: Path) -> dict[str, tuple[str, int, int | None]]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            dur = row["duration_s"]
            out[Path(row["source_path"]).stem] = (
                row["source_path"],
                int(row["label"]),
                int(dur) if dur != "" else None,
            )
    return out


def load_dataset(cfg: PipelineConfig):
    vectors = read_features(_need(Path(cfg.out) / "features.csv"))
    return feature_matrix(vectors, cfg.use_masks)


# -- classify ----------------------------------------------------------------

def stage_train(cfg: PipelineConfig) -> dict[str, TrainedModel]:
    out = Path(cfg.out)
    (out / "models").mkdir(exist_ok=True)
    x, y = load_dataset(cfg)
    models = {}
    for kind in cfg.classifiers:
        model = fit(kind, x, y, ClassifierConfig(), seed=cfg.seed)
        model.train_meta["use_masks"] = cfg.use_masks
        model.save(out / "models" / f"{kind}.json")
        models[kind] = model
        progress("train", classifier=kind, n_train=len(y))
    return models


def stage_evaluate(cfg: PipelineConfig) -> dict:
    out = Path(cfg.out)
    (out / "reports").mkdir(exist_ok=True)
    x, y = load_dataset(cfg)
    reports = {}
    for kind in cfg.classifiers:
        if cfg.holdout:
            rep = holdout(kind, x, y, ClassifierConfig(), seed=cfg.seed)
        else:
            rep = cross_validate(kind, x, y, ClassifierConfig(), n_folds=cfg.folds, seed=cfg.seed)
        rep.save(out / "reports" / f"{kind}.json")
        reports[kind] = rep
        progress("evaluate", classifier=kind, accuracy=rep.accuracy, auc=rep.auc)
    return reports


def stage_sweep(cfg: PipelineConfig) -> dict[str, dict[float, float]]:
    out = Path(cfg.out)
    x, y = load_dataset(cfg)
    table = {}
    for kind in cfg.classifiers:
        table[kind] = accuracy_over_windows(
            kind, x, y, cfg.horizons, n_folds=cfg.folds, seed=cfg.seed, use_masks=cfg.use_masks
        )
        progress("sweep", classifier=kind, horizons=len(cfg.horizons))
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["horizon_s"] + list(table))
        for h in cfg.horizons:
            w.writerow([_num(h)] + [repr(table[k][h]) for k in table])
    return table


def _num(h: float) -> str:
    return str(int(h)) if float(h).is_integer() else repr(float(h))


STAGES = {
    "parse": stage_parse,
    "label": stage_label,
    "embed": stage_embed,
    "reduce": stage_reduce,
    "featurize": stage_featurize,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "sweep": stage_sweep,
}


def run_all(cfg: PipelineConfig) -> None:
    for name in ("parse", "label", "embed", "reduce", "featurize", "train", "evaluate", "sweep"):
        STAGES[name](cfg)
    Path(cfg.out, "config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")


# -- report ------------------------------------------------------------------

def report(out_dir: str | Path) -> str:
    """Summarize evaluation artifacts; also writes plot-data CSVs."""
    out = Path(out_dir)
    rep_dir = _need(out / "reports")
    paths = sorted(rep_dir.glob("*.json"))
    if not paths:
        raise MissingArtifact(f"no evaluation reports in {rep_dir}")
    plots = out / "plots"
    plots.mkdir(exist_ok=True)

    lines = ["classifier  protocol              accuracy  auc"]
    for p in paths:
        rep = json.loads(p.read_text())
        lines.append(f"{rep['kind']:<11} {rep['protocol']:<21} {rep['accuracy']:.4f}    {rep['auc']:.4f}")
        with open(plots / f"roc_{rep['kind']}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fpr", "tpr"])
            w.writerows(rep["roc_points"])

    labels_path = out / "labels.csv"
    if labels_path.exists():
        labs = []
        for _, label, dur in _read_labels(labels_path).values():
            labs.append(OutcomeLabel(label, 0, dur) if label == 1 else OutcomeLabel(0))
        hist = duration_histogram(labs, 5)
        n_ok = sum(l.label for l in labs)
        lines.append("")
        lines.append(f"connections: {n_ok} success / {len(labs) - n_ok} fail")
        for (lo, hi), c in hist.items():
            lines.append(f"  duration [{lo:g}, {hi:g}) s: {c}")

    sweep = out / "sweep.csv"
    if sweep.exists():
        with open(sweep, newline="") as fh:
            rows = list(csv.reader(fh))
        (plots / "sweep.csv").write_text(sweep.read_text())
        lines.append("")
        lines.append("horizon_s " + " ".join(f"{k:>8}" for k in rows[0][1:]))
        for row in rows[1:]:
            lines.append(f"{row[0]:>9} " + " ".join(f"{float(v):8.4f}" for v in row[1:]))
    return "\n".join(lines) + "\n"
