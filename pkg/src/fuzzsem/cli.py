"""Command-line entry point: ``fuzzsem <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline, synth
from .pipeline import PipelineConfig

SUBCOMMANDS = ("parse", "label", "embed", "reduce", "featurize", "train", "evaluate", "sweep", "run-all")


def _horizons(text: str) -> list[float]:
    """Parse ``0,4,5,10`` or ``0,4,...,40`` (an ellipsis fills in whole seconds)."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    out: list[float] = []
    for i, p in enumerate(parts):
        if p in ("...", "…"):
            lo, hi = out[-1], float(parts[i + 1])
            out.extend(float(h) for h in range(int(lo) + 1, int(hi)))
        else:
            out.append(float(p))
    return [int(h) if float(h).is_integer() else h for h in out]


def _classifiers(text: str) -> list[str]:
    if text == "all":
        return [k.value for k in pipeline.ALL_KINDS]
    return [t.strip() for t in text.split(",")]


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    # defaults are None so that only flags given on the command line override the config file
    p.add_argument("--config", help="JSON file with any of the flags below as keys")
    p.add_argument("--input", dest="inputs", action="append", help="log file, glob or directory (repeatable)")
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--keyword")
    p.add_argument("--timeout-s", dest="timeout_s", type=float)
    p.add_argument("--per-second-groups", dest="per_second_groups", action="store_const", const=True)
    p.add_argument(
        "--exclude-keyword",
        dest="exclude_keyword",
        action="store_const",
        const=True,
        help="drop keyword records before embedding",
    )
    p.add_argument("--embedder", choices=["hashing", "remote"])
    p.add_argument("--endpoint")
    p.add_argument("--perplexity", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--classifier", dest="classifiers", type=_classifiers, help="logreg, knn, forest or all")
    p.add_argument("--folds", type=int)
    p.add_argument("--holdout", action="store_const", const=True, help="80/20 stratified split instead of CV")
    p.add_argument("--horizons", type=_horizons)
    p.add_argument("--use-masks", dest="use_masks", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--compat-distance", dest="compat_distance", action="store_const", const=True)
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzsem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _add_pipeline_flags(sub.add_parser(name))

    s = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--n-files", type=int, default=200)
    s.add_argument("--pass-fraction", type=float, default=0.5)
    s.add_argument("--window", default="10,17", help="divergence window START,END in seconds")
    s.add_argument("--events-per-second", type=float, default=3.5)
    s.add_argument("--duration-s", type=int, default=44)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("-v", "--verbose", action="store_true")

    r = sub.add_parser("report", help="summarize evaluation artifacts")
    r.add_argument("--out", required=True)
    r.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    data: dict = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    for key in (
        "inputs",
        "out",
        "seed",
        "keyword",
        "timeout_s",
        "per_second_groups",
        "exclude_keyword",
        "embedder",
        "endpoint",
        "perplexity",
        "iters",
        "eta",
        "classifiers",
        "folds",
        "holdout",
        "horizons",
        "use_masks",
        "compat_distance",
        "workers",
    ):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return PipelineConfig.from_mapping(data)


def _run(args: argparse.Namespace) -> int:
    if args.command == "synth":
        start, end = (int(v) for v in args.window.split(","))
        spec = synth.CorpusSpec(
            n_files=args.n_files,
            pass_fraction=args.pass_fraction,
            divergence_window_s=(start, end),
            events_per_second=args.events_per_second,
            duration_s=args.duration_s,
            seed=args.seed,
        )
        rows = synth.generate_corpus(spec, args.out)
        pipeline.progress("synth", out=args.out, files=len(rows), passed=sum(r[1] for r in rows))
        return 0
    if args.command == "report":
        sys.stdout.write(pipeline.report(args.out))
        return 0

    cfg = config_from_args(args)
    if args.command == "run-all":
        pipeline.run_all(cfg)
        sys.stdout.write(pipeline.report(cfg.out))
    else:
        pipeline.STAGES[args.command](cfg)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return _run(args)
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
