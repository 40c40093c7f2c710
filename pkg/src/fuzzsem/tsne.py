"""Exact t-SNE for per-file sets of sentence vectors.

Gaussian conditional affinities with perplexity-calibrated bandwidths,
symmetrized joint probabilities, a Student-t kernel in 2-D, and momentum
gradient descent on KL(P || Q). No Barnes-Hut approximation: files hold a
few hundred event groups at most.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FLOOR = 1e-12


class TsneDivergence(FloatingPointError):
    """Coordinates became non-finite during optimization."""

    def __init__(self, iteration: int, max_gradient: float):
        super().__init__(
            f"non-finite embedding at iteration {iteration} (max |grad| = {max_gradient:.3g})"
        )
        self.iteration = iteration
        self.max_gradient = max_gradient


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    eta: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    iters: int = 1000
    early_exaggeration: float = 4.0
    exaggeration_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.perplexity < 2:
            raise ValueError("perplexity must be >= 2")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class AffinityMatrix:
    p: np.ndarray
    sigmas: np.ndarray
    target_perplexity: float

    @property
    def n(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class Projection2D:
    y: np.ndarray
    kl_trace: np.ndarray
    kl_initial: float
    seed: int
    iters: int
    perplexity: float = field(default=float("nan"))


def effective_perplexity(perplexity: float, n: int) -> float:
    """Clamp the requested perplexity to ``(n - 1) / 3``.

    Tiny inputs would push that bound below 1, which no distribution can
    reach, so the bound never drops under 1.5.
    """
    return min(perplexity, max((n - 1) / 3.0, 1.5))


def _search_rows(d2: np.ndarray, target: float, tol: float = 1e-5, max_steps: int = 50):
    """Vectorized bisection over rows of neighbour distances.

    ``d2`` is (rows, k) squared distances to the k other points. Returns the
    conditional probabilities (rows, k) and the bandwidths.
    """
    d2 = np.asarray(d2, dtype=float)
    rows = d2.shape[0]
    # shifting each row by its minimum leaves the normalized row unchanged
    d = d2 - d2.min(axis=1, keepdims=True)
    degenerate = np.all(d2 == 0.0, axis=1)
    log_target = math.log2(target)

    scale = d.mean(axis=1)
    beta = np.where(scale > 0, 1.0 / np.where(scale > 0, scale, 1.0), 1.0)
    lo = np.zeros(rows)
    hi = np.full(rows, np.inf)
    active = ~degenerate

    def evaluate(b):
        w = np.exp(-d * b[:, None])
        s = w.sum(axis=1)
        p = w / s[:, None]
        h_bits = (np.log(s) + b * (d * p).sum(axis=1)) / math.log(2.0)
        return p, h_bits

    for _ in range(max_steps):
        if not active.any():
            break
        _, h = evaluate(beta)
        diff = h - log_target
        active &= np.abs(diff) > tol
        up = active & (diff > 0)  # too flat: sharpen
        down = active & (diff < 0)
        lo[up] = beta[up]
        beta[up] = np.where(np.isinf(hi[up]), beta[up] * 2.0, (beta[up] + hi[up]) / 2.0)
        hi[down] = beta[down]
        beta[down] = (beta[down] + lo[down]) / 2.0

    beta[degenerate] = 0.5
    p, _ = evaluate(beta)
    p[degenerate] = 1.0 / d.shape[1]
    sigmas = np.sqrt(1.0 / (2.0 * beta))
    return p, sigmas


def bandwidth_search(distances_sq, target_perplexity: float) -> tuple[float, np.ndarray]:
    """Find the Gaussian bandwidth matching ``target_perplexity`` for one point.

    ``distances_sq`` holds squared distances to every *other* point. Returns
    ``(sigma, conditional_row)``.
    """
    row = np.asarray(distances_sq, dtype=float).reshape(1, -1)
    if row.shape[1] < 1:
        raise ValueError("need at least one neighbour")
    p, sigmas = _search_rows(row, target_perplexity)
    return float(sigmas[0]), p[0]


def perplexity_of(row: np.ndarray) -> float:
    """``2 ** H`` of a probability row, in bits."""
    r = row[row > 0]
    return float(2.0 ** (-(r * np.log2(r)).sum()))


def squared_distances(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def compute_affinities(x: np.ndarray, perplexity: float = 30.0) -> AffinityMatrix:
    """Joint probabilities ``p_ij = (p_j|i + p_i|j) / 2n`` with zero diagonal."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"t-SNE needs at least 3 points, got {n}")
    target = effective_perplexity(perplexity, n)
    d2 = squared_distances(x)
    off = ~np.eye(n, dtype=bool)
    rows, sigmas = _search_rows(d2[off].reshape(n, n - 1), target)
    cond = np.zeros((n, n))
    cond[off] = rows.ravel()
    p = (cond + cond.T) / (2.0 * n)
    return AffinityMatrix(p=p, sigmas=sigmas, target_perplexity=target)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """``sum_{i != j} p_ij log(p_ij / q_ij)`` with both sides floored at 1e-12."""
    off = ~np.eye(p.shape[0], dtype=bool)
    pp = np.maximum(p[off], FLOOR)
    qq = np.maximum(q[off], FLOOR)
    return float((pp * np.log(pp / qq)).sum())


def student_t(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(q, w)`` where ``w_ij = (1 + |y_i - y_j|^2)^-1`` off the diagonal."""
    d2 = np.zeros((len(y), len(y)))
    for k in range(y.shape[1]):
        diff = y[:, k, None] - y[None, :, k]
        d2 += diff * diff
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    return w / w.sum(), w


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of KL(P || Q(y)) with respect to ``y``."""
    q, w = student_t(y)
    return _gradient(p, q, w, y)


def _gradient(p, q, w, y):
    g = 4.0 * (p - q) * w
    return g.sum(axis=1)[:, None] * y - g @ y


class _KL:
    """KL(P || Q) for a fixed P with the P-only term precomputed."""

    def __init__(self, p):
        pp = np.maximum(p, FLOOR)
        np.fill_diagonal(pp, 0.0)
        self.pp = pp
        self.const = float((pp[pp > 0] * np.log(pp[pp > 0])).sum())

    def __call__(self, q):
        return self.const - float((self.pp * np.log(np.maximum(q, FLOOR))).sum())


def fit(x: np.ndarray, config: TsneConfig = TsneConfig()) -> Projection2D:
    """Embed the rows of ``x`` in 2-D."""
    aff = compute_affinities(x, config.perplexity)
    p = aff.p
    n = aff.n
    kl = _KL(p)
    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, 1e-2, size=(n, 2))  # covariance 1e-4 I
    prev = y.copy()

    trace = []
    kl_initial = None
    # overflow is detected via the finiteness check below
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for t in range(config.iters):
            q, w = student_t(y)
            if t == 0:
                kl_initial = kl(q)
            if t >= config.exaggeration_iters:
                trace.append(kl(q))
            pt = p * config.early_exaggeration if t < config.exaggeration_iters else p
            grad = _gradient(pt, q, w, y)
            alpha = config.momentum_early if t < config.momentum_switch else config.momentum_late
            y_next = y - config.eta * grad + alpha * (y - prev)
            if not np.all(np.isfinite(y_next)):
                finite = np.abs(grad[np.isfinite(grad)])
                raise TsneDivergence(t, float(finite.max()) if finite.size else float("inf"))
            prev, y = y, y_next

    q, _ = student_t(y)
    trace.append(kl(q))
    kl_trace = np.asarray(trace)
    if kl_trace[-1] > kl_trace[0] + 1e-12:
        raise AssertionError(
            f"KL rose during optimization: {kl_trace[0]:.6g} -> {kl_trace[-1]:.6g}"
        )
    return Projection2D(
        y=y,
        kl_trace=kl_trace,
        kl_initial=kl_initial,
        seed=config.seed,
        iters=config.iters,
        perplexity=aff.target_perplexity,
    )
