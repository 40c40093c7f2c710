"""
Sentence vectors from feature hashing
=====================================

The offline embedder hashes unigrams and bigrams into 512 signed buckets
and scales the result to unit length. Texts that share tokens land close
together; texts with disjoint vocabularies are nearly orthogonal.
"""

import numpy as np

from fuzzsem import embed

texts = [
    "DRB1 Tx SDU 12 B tx sdu queue len 3",
    "DRB1 Tx SDU 40 B tx sdu queue len 0",
    "Radio link failure detected maxretx reached user plane stalled",
    "",
]
vectors = embed.embed_texts(embed.EmbedderSpec(), texts)
print("shape:", vectors.shape)
print("norms:", np.round(np.linalg.norm(vectors, axis=1), 6))

# Cosine similarity is just a dot product for unit vectors. The empty text
# maps to the zero vector.
print(np.round(vectors @ vectors.T, 3))

# The hashing is keyed and deterministic, so vectors are stable across runs
# and machines.
print("bucket, sign of 'DRB1':", embed.hash64("DRB1") % 512, -1 if embed.hash64("DRB1") >> 63 else 1)
