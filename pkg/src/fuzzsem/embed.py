"""Sentence vectors for event groups.

Two backends share one entry point, :func:`embed_texts`:

* ``hashing``: signed feature hashing of unigrams and bigrams into 512
  buckets, L2-normalized. Deterministic and offline.
* ``remote``: a JSON client for an external sentence-embedding service
  (e.g. a sentence-BERT server).
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

DIMENSION = 512
# blake2b salt; changing it changes every hashing embedding.
HASH_SEED = 0x5EED_F022


class EmbeddingError(RuntimeError):
    pass


class TransportError(EmbeddingError):
    pass


class ResponseError(EmbeddingError):
    """Non-success status or a body that does not follow the wire contract."""


class DimensionMismatch(EmbeddingError):
    pass


class NonFiniteVector(EmbeddingError):
    pass


class Backend(enum.Enum):
    HASHING = "hashing"
    REMOTE = "remote"


@dataclass(frozen=True)
class EmbedderSpec:
    backend: Backend = Backend.HASHING
    remote_endpoint: str | None = None
    dimension: int = DIMENSION
    ngram_range: tuple[int, int] = (1, 2)
    timeout_s: float = 30.0
    batch_size: int = 64
    max_in_flight: int = 4

    def __post_init__(self):
        if self.dimension != DIMENSION:
            raise ValueError(f"dimension is fixed at {DIMENSION}")
        if self.backend is Backend.REMOTE and not self.remote_endpoint:
            raise ValueError("remote backend requires an endpoint")
        if self.ngram_range != (1, 2):
            raise ValueError("hashing embedder uses unigrams and bigrams only")


def hash64(token: str) -> int:
    """Unsigned 64-bit blake2b digest of ``token`` under the fixed salt."""
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=8, salt=HASH_SEED.to_bytes(16, "little")
    ).digest()
    return int.from_bytes(digest, "little")


@lru_cache(maxsize=1 << 16)
def _bucket_sign(token: str) -> tuple[int, float]:
    h = hash64(token)
    return h % DIMENSION, (-1.0 if h >> 63 else 1.0)


def ngrams(text: str) -> list[str]:
    """Unigrams then ``_``-joined bigrams of a space-tokenized string."""
    toks = text.split()
    return toks + [f"{a}_{b}" for a, b in zip(toks, toks[1:])]


def hash_embed(text: str) -> np.ndarray:
    vec = np.zeros(DIMENSION)
    for gram in ngrams(text):
        bucket, sign = _bucket_sign(gram)
        vec[bucket] += sign
    norm = math.sqrt(float(vec @ vec))
    if norm > 0:
        vec /= norm
    return vec


def _validate(rows, expected: int) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != expected:
        raise ResponseError(f"expected {expected} vectors, got {type(rows).__name__}")
    for row in rows:
        if not isinstance(row, list):
            raise ResponseError("each vector must be a JSON array")
        if len(row) != DIMENSION:
            raise DimensionMismatch(f"vector has {len(row)} values, expected {DIMENSION}")
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ResponseError(f"non-numeric vector entries: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise NonFiniteVector("response contains NaN or infinite values")
    return arr.reshape(expected, DIMENSION)


def _post(endpoint: str, texts: Sequence[str], timeout_s: float) -> np.ndarray:
    body = json.dumps({"sentences": list(texts)}).encode("utf-8")
    req = urllib.request.Request(
        endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout_s) as resp:
            payload = resp.read()
    except urllib.error.HTTPError as exc:
        raise ResponseError(f"{endpoint} returned HTTP {exc.code}") from None
    except (urllib.error.URLError, OSError) as exc:
        raise TransportError(f"{endpoint}: {exc}") from None
    try:
        # parse_constant maps NaN/Infinity literals so they reach the finiteness check
        doc = json.loads(payload, parse_constant=float)
    except ValueError as exc:
        raise ResponseError(f"malformed JSON from {endpoint}: {exc}") from None
    if not isinstance(doc, dict) or "vectors" not in doc:
        raise ResponseError("response has no 'vectors' field")
    return _validate(doc["vectors"], len(texts))


def remote_embed(
    endpoint: str,
    texts: Sequence[str],
    timeout_s: float = 30.0,
    batch_size: int = 64,
    max_in_flight: int = 4,
) -> np.ndarray:
    """Embed ``texts`` through the remote service, preserving order."""
    if not texts:
        return np.zeros((0, DIMENSION))
    batches = [texts[i : i + batch_size] for i in range(0, len(texts), batch_size)]
    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        parts = list(pool.map(lambda b: _post(endpoint, b, timeout_s), batches))
    return np.vstack(parts)


def embed_texts(spec: EmbedderSpec, texts: Sequence[str]) -> np.ndarray:
    """Return an ``(len(texts), 512)`` matrix, one row per text."""
    if spec.backend is Backend.REMOTE:
        return remote_embed(
            spec.remote_endpoint,
            texts,
            timeout_s=spec.timeout_s,
            batch_size=spec.batch_size,
            max_in_flight=spec.max_in_flight,
        )
    out = np.zeros((len(texts), DIMENSION))
    for i, text in enumerate(texts):
        out[i] = hash_embed(text)
    return out
