"""
How early does the signal appear?
=================================

A synthetic corpus plants its pass/fail difference between seconds 10 and
17. Truncating the features at growing horizons shows accuracy sitting at
chance until the window opens and saturating once it closes.

This uses a reduced corpus and fewer t-SNE iterations so it finishes in
well under a minute. The command-line ``fuzzsem run-all`` does the same at
full size.
"""

import tempfile
from pathlib import Path

from fuzzsem import pipeline, synth

work = Path(tempfile.mkdtemp())
synth.generate_corpus(synth.CorpusSpec(n_files=60, seed=7), work / "corpus")

cfg = pipeline.PipelineConfig(
    inputs=[str(work / "corpus" / "logs")],
    out=str(work / "out"),
    iters=300,
    classifiers=["logreg", "knn"],
    horizons=[0, 5, 9, 12, 15, 17, 25, 40],
)
for stage in ("parse", "label", "embed", "reduce", "featurize"):
    pipeline.STAGES[stage](cfg)

table = pipeline.stage_sweep(cfg)
print("horizon   logreg   knn")
for h in cfg.horizons:
    print(f"{h:>7}   {table['logreg'][h]:.3f}    {table['knn'][h]:.3f}")
