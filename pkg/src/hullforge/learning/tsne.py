"""Exact t-SNE for small data; sklearn's Barnes-Hut above ``EXACT_LIMIT`` rows."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IoError, PerplexityError
from .normalize import as_matrix

EXACT_LIMIT = 5000
LEARNING_RATE = 200.0
EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH = 250
MIN_GAIN = 0.01


@dataclass(frozen=True)
class EmbeddingResult:
    coords: np.ndarray  # (n, 2)
    final_kl: float
    perplexity: float
    seed: int
    initial_kl: float = float("nan")

    def write_csv(self, path, labels=None) -> Path:
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["row_id", "tsne_1", "tsne_2"] + (["label"] if labels is not None else []))
                for i, (a, b) in enumerate(self.coords):
                    row = [i, repr(float(a)), repr(float(b))]
                    if labels is not None:
                        row.append(int(labels[i]))
                    w.writerow(row)
        except OSError as exc:
            raise IoError(f"{path}: {exc}") from exc
        return path


def _sq_dists(X):
    s = (X * X).sum(1)
    D = s[:, None] - 2.0 * X @ X.T + s[None, :]
    np.fill_diagonal(D, 0.0)
    return np.maximum(D, 0.0)


def conditional_p(D: np.ndarray, perplexity: float, tol: float = 1e-10, max_iter: int = 200):
    """Row-wise Gaussian conditionals whose perplexity matches the target.

    Bisection on log(beta) for all rows at once. Returns (P, beta).
    """
    n = len(D)
    target = np.log(perplexity)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    beta = np.ones(n)
    off = ~np.eye(n, dtype=bool)
    # shift by the nearest-neighbour distance for numerical range
    Dn = np.where(off, D, np.inf)
    dmin = Dn.min(axis=1, keepdims=True)
    Ds = np.where(off, D - dmin, 0.0)
    for _ in range(max_iter):
        W = np.where(off, np.exp(-Ds * beta[:, None]), 0.0)
        s = W.sum(1)
        P = W / s[:, None]
        H = np.log(s) + beta * (P * Ds).sum(1)
        diff = H - target
        if np.all(np.abs(diff) < tol):
            break
        up = diff > 0  # entropy too high: narrow the kernel
        lo = np.where(up, beta, lo)
        hi = np.where(up, hi, beta)
        beta = np.where(
            up,
            np.where(np.isinf(hi), beta * 2.0, 0.5 * (beta + hi)),
            np.where(np.isinf(lo), beta / 2.0, 0.5 * (beta + lo)),
        )
    return P, beta


def perplexities(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        H = -np.where(P > 0, P * np.log(P), 0.0).sum(1)
    return np.exp(H)


def joint_p(data, perplexity: float) -> np.ndarray:
    X = as_matrix(data)
    P, _ = conditional_p(_sq_dists(X), perplexity)
    P = P + P.T
    return P / P.sum()


def _q_and_kl(P, Y):
    num = 1.0 / (1.0 + _sq_dists(Y))
    np.fill_diagonal(num, 0.0)
    Q = num / num.sum()
    mask = P > 0
    kl = float((P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))).sum())
    return Q, num, kl


def kl_divergence(P, Y) -> float:
    return _q_and_kl(P, Y)[2]


def tsne_embed(data, perplexity: float = 30.0, iters: int = 1000, seed: int = 0) -> EmbeddingResult:
    X = as_matrix(data)
    n = len(X)
    if n < 3 * perplexity:
        raise PerplexityError(f"n={n} too small for perplexity {perplexity} (need n >= {3 * perplexity:g})")
    if n > EXACT_LIMIT:
        return _barnes_hut(X, perplexity, iters, seed)

    P = joint_p(X, perplexity)
    rng = np.random.default_rng(seed)
    Y = 1e-4 * rng.standard_normal((n, 2))
    initial_kl = kl_divergence(P, Y)
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    for it in range(iters):
        exag = EXAGGERATION if it < EXAGGERATION_ITERS else 1.0
        momentum = 0.5 if it < MOMENTUM_SWITCH else 0.8
        Q, num, _ = _q_and_kl(P, Y)
        M = (exag * P - Q) * num
        grad = 4.0 * (M.sum(1)[:, None] * Y - M @ Y)
        same = np.sign(grad) == np.sign(update)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, MIN_GAIN)
        update = momentum * update - LEARNING_RATE * gains * grad
        Y = Y + update
        Y = Y - Y.mean(0)
    return EmbeddingResult(Y, kl_divergence(P, Y), float(perplexity), int(seed), initial_kl)


def _barnes_hut(X, perplexity, iters, seed):
    from sklearn.manifold import TSNE

    model = TSNE(
        n_components=2,
        perplexity=perplexity,
        learning_rate=LEARNING_RATE,
        early_exaggeration=EXAGGERATION,
        max_iter=max(iters, 250),
        init="random",
        method="barnes_hut",
        angle=0.5,
        random_state=seed,
    )
    Y = model.fit_transform(X)
    return EmbeddingResult(Y, float(model.kl_divergence_), float(perplexity), int(seed))
