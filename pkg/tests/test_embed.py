import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuzzsem import embed
from fuzzsem.embed import Backend, EmbedderSpec, embed_texts, hash_embed

HASHING = EmbedderSpec()


def reference_embed(text):
    """Independent re-implementation of the hashing scheme."""
    salt = (0x5EED_F022).to_bytes(16, "little")
    toks = text.split()
    grams = toks + [a + "_" + b for a, b in zip(toks, toks[1:])]
    acc = {}
    for g in grams:
        h = int.from_bytes(hashlib.blake2b(g.encode(), digest_size=8, salt=salt).digest(), "little")
        acc[h % 512] = acc.get(h % 512, 0) + (1 if h < 2**63 else -1)
    norm = sum(v * v for v in acc.values()) ** 0.5
    out = [0.0] * 512
    for k, v in acc.items():
        out[k] = v / norm if norm else 0.0
    return out


def test_deterministic():
    a, b = embed_texts(HASHING, ["DRB1 Tx SDU", "DRB1 Tx SDU"])
    assert np.array_equal(a, b)
    assert a.shape == (512,)


def test_empty_text_is_zero_vector():
    (v,) = embed_texts(HASHING, [""])
    assert not v.any()


def test_single_token_one_hot():
    v = hash_embed("DRB1")
    nz = np.flatnonzero(v)
    assert len(nz) == 1 and abs(v[nz[0]]) == 1.0
    assert nz[0] == embed.hash64("DRB1") % 512


def test_two_tokens_against_reference():
    assert np.allclose(hash_embed("x y"), reference_embed("x y"), atol=0, rtol=0)


def test_cosine_matches_reference():
    a, b = embed_texts(HASHING, ["a b", "c d"])
    ra, rb = np.array(reference_embed("a b")), np.array(reference_embed("c d"))
    assert abs(a @ b - ra @ rb) < 1e-12


def test_frozen_vector():
    # any change to the hash, salt or byte order shows up here
    assert embed.hash64("DRB1") == 8981280865371501673
    v = hash_embed("DRB1 Tx SDU")
    assert np.flatnonzero(v).tolist() == [105, 237, 329, 454, 458]
    assert np.allclose(v[[105, 237, 329, 454, 458]], np.array([1, 1, 1, -1, 1]) / 5**0.5, rtol=0, atol=1e-15)


words = st.text(alphabet="abcdefgXYZ0123", min_size=1, max_size=6)
sentences = st.lists(words, max_size=12).map(" ".join)


@given(sentences)
def test_norm_is_zero_or_one(text):
    n = np.linalg.norm(hash_embed(text))
    assert min(abs(n), abs(n - 1.0)) < 1e-12


@given(st.lists(sentences, min_size=1, max_size=8), st.randoms())
def test_permutation_equivariance(texts, rnd):
    perm = list(range(len(texts)))
    rnd.shuffle(perm)
    out = embed_texts(HASHING, texts)
    shuffled = embed_texts(HASHING, [texts[i] for i in perm])
    assert np.array_equal(out[perm], shuffled)


def test_spec_validation():
    with pytest.raises(ValueError):
        EmbedderSpec(Backend.REMOTE)
    with pytest.raises(ValueError):
        EmbedderSpec(dimension=384)


# -- remote backend ----------------------------------------------------------


class _Stub(BaseHTTPRequestHandler):
    mode = "echo"
    requests = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests.append(body)
        sentences = body["sentences"]
        if self.mode == "status":
            self.send_response(503)
            self.end_headers()
            return
        if self.mode == "short":
            payload = {"vectors": [[0.0] * 511 for _ in sentences]}
        elif self.mode == "nan":
            payload = '{"vectors": [[NaN' + ", 0.0" * 511 + "]]}"
        elif self.mode == "garbage":
            payload = "not json"
        else:
            # row i carries the index of the sentence it came from
            payload = {"vectors": [[float(s.split()[-1])] + [0.5] * 511 for s in sentences]}
        raw = payload if isinstance(payload, str) else json.dumps(payload)
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(raw.encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def stub():
    server = HTTPServer(("127.0.0.1", 0), _Stub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Stub.requests = []
    _Stub.mode = "echo"
    yield f"http://127.0.0.1:{server.server_address[1]}/embed"
    server.shutdown()


def test_remote_echo(stub):
    spec = EmbedderSpec(Backend.REMOTE, remote_endpoint=stub)
    (v,) = embed_texts(spec, ["hello 7"])
    assert v[0] == 7.0 and np.all(v[1:] == 0.5)
    assert _Stub.requests == [{"sentences": ["hello 7"]}]


def test_remote_preserves_order_across_batches(stub):
    texts = [f"s {i}" for i in range(23)]
    out = embed.remote_embed(stub, texts, batch_size=4, max_in_flight=3)
    assert out[:, 0].tolist() == list(range(23))
    assert len(_Stub.requests) == 6


@pytest.mark.parametrize(
    "mode, error",
    [
        ("short", embed.DimensionMismatch),
        ("nan", embed.NonFiniteVector),
        ("status", embed.ResponseError),
        ("garbage", embed.ResponseError),
    ],
)
def test_remote_errors(stub, mode, error):
    _Stub.mode = mode
    with pytest.raises(error):
        embed.remote_embed(stub, ["hello 1"])


def test_remote_transport_error():
    with pytest.raises(embed.TransportError):
        embed.remote_embed("http://127.0.0.1:9/embed", ["x"], timeout_s=2)
