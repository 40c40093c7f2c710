"""
Per-second centroid distances
=============================

Projected points are binned by elapsed second. Each bin contributes the
distance of its mean position from the origin, giving 38 numbers per run
plus a mask that says which bins held any events.
"""

import numpy as np

from fuzzsem import features

y = np.array([[1.0, 1.0], [-1.0, 1.0], [3.0, 4.0], [0.5, 0.0]])
elapsed = [0, 2, 10, 55]  # seconds 0-3 share a bin; anything past 40 joins bin 40

fv = features.featurize(y, elapsed, label=1, duration_s=6)
for t, d, m in zip(features.BINS, fv.distances, fv.present):
    if m:
        print(f"bin {t:>2}: {d:.3f}")
print("bins with events:", int(fv.present.sum()), "of", features.N_BINS)

# Limiting the view to the first ten seconds blanks out the later bins.
early = features.truncate_to_window(fv, 10)
print("after truncation at 10 s:", [t for t, m in zip(features.BINS, early.present) if m])

# Classifiers see distances followed by mask bits.
print("row length:", len(fv.as_row()), "without masks:", len(fv.as_row(use_masks=False)))
