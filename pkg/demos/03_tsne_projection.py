"""
Projecting event groups to the plane with t-SNE
===============================================

Two tight clouds in 512 dimensions should stay apart after projection.
The KL trace records the objective once early exaggeration ends.
"""

import numpy as np

from fuzzsem import tsne

rng = np.random.default_rng(0)
dim = 512
labels = np.repeat([0, 1], 20)
offset = rng.normal(size=dim)
offset *= 10 / np.linalg.norm(offset)
x = rng.normal(size=(40, dim)) / np.sqrt(dim) + labels[:, None] * offset

# Bandwidths are tuned per point to hit the requested perplexity.
aff = tsne.compute_affinities(x, perplexity=10)
print("P sums to", aff.p.sum(), "with sigma range", aff.sigmas.min().round(3), "to", aff.sigmas.max().round(3))

proj = tsne.fit(x, tsne.TsneConfig(perplexity=10, seed=1))
print(f"KL {proj.kl_trace[0]:.3f} after exaggeration, {proj.kl_trace[-1]:.3f} at the end")

for c in (0, 1):
    centre = proj.y[labels == c].mean(axis=0)
    spread = np.linalg.norm(proj.y[labels == c] - centre, axis=1).mean()
    print(f"cluster {c}: centre {np.round(centre, 2)}, mean radius {spread:.2f}")
