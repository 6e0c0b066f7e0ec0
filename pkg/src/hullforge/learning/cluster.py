"""K-means, elbow detection and silhouette scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import KRangeError, SingleClusterError
from .normalize import as_matrix

CHUNK = 1024


def sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    labels: np.ndarray
    wcss: float
    history: tuple = field(default=())  # wcss after each Lloyd assignment
    n_iter: int = 0


def wcss_of(X, centroids, labels) -> float:
    diff = X - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _plusplus(X, k, rng):
    n = len(X)
    centers = [int(rng.integers(n))]
    d = sq_dists(X, X[centers[0]][None, :])[:, 0]
    for _ in range(1, k):
        total = d.sum()
        if total <= 0:
            # every remaining point coincides with a centre
            rest = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(rest))
        else:
            nxt = int(rng.choice(n, p=d / total))
        centers.append(nxt)
        d = np.minimum(d, sq_dists(X, X[nxt][None, :])[:, 0])
    return X[centers].copy()


def _lloyd(X, C, max_iter):
    history = []
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        D = sq_dists(X, C)
        new = np.argmin(D, axis=1)
        history.append(wcss_of(X, C, new))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        counts = np.bincount(labels, minlength=len(C))
        sums = np.zeros_like(C)
        np.add.at(sums, labels, X)
        empty = counts == 0
        C = np.where(empty[:, None], C, sums / np.maximum(counts, 1)[:, None])
        if np.any(empty):
            # move empty centroids onto the worst-fit points
            far = np.argsort(-D[np.arange(len(X)), labels], kind="stable")
            C[empty] = X[far[: int(empty.sum())]]
    return C, labels, history, it


def kmeans(data, k: int, seed: int = 0, max_iter: int = 300, n_init: int = 1, init=None) -> KMeansModel:
    """Lloyd iterations from k-means++ seeding; best of ``n_init`` runs."""
    X = as_matrix(data)
    n = len(X)
    if not 1 <= k <= n:
        raise KRangeError(f"k={k} outside [1, {n}]")
    rng = np.random.default_rng(seed)
    best = None
    starts = [np.asarray(init, dtype=float)] if init is not None else []
    starts += [None] * max(0, n_init - len(starts))
    for start in starts:
        C0 = _plusplus(X, k, rng) if start is None else start.copy()
        C, labels, hist, it = _lloyd(X, C0, max_iter)
        w = wcss_of(X, C, labels)
        if best is None or w < best.wcss:
            best = KMeansModel(k, C, labels, w, tuple(hist), it)
    return best


@dataclass(frozen=True)
class ElbowResult:
    ks: np.ndarray
    wcss: np.ndarray
    suggested_k: int
    low_confidence: bool
    second_diff: np.ndarray
    models: tuple = field(default=(), repr=False)


def elbow_scan(data, k_max: int, seed: int = 0, n_init: int = 4, max_iter: int = 300) -> ElbowResult:
    """WCSS for k = 1..k_max and the k with the largest second difference.

    Each k is also warm-started from the (k-1) solution plus its worst-fit
    point, which keeps the curve non-increasing.
    """
    X = as_matrix(data)
    if k_max < 3:
        raise KRangeError("elbow_scan needs k_max >= 3")
    if k_max > len(X):
        raise KRangeError(f"k_max={k_max} exceeds n={len(X)}")
    ks = np.arange(1, k_max + 1)
    wcss = []
    models = []
    prev = None
    for k in ks:
        init = None
        if prev is not None:
            worst = np.argmax(((X - prev.centroids[prev.labels]) ** 2).sum(1))
            init = np.vstack([prev.centroids, X[worst]])
        m = kmeans(X, int(k), seed=seed + int(k), max_iter=max_iter, n_init=n_init + (init is not None), init=init)
        wcss.append(m.wcss)
        models.append(m)
        prev = m
    wcss = np.array(wcss)
    d2 = wcss[:-2] - 2.0 * wcss[1:-1] + wcss[2:]  # at k = 2..k_max-1
    order = np.argsort(-d2, kind="stable")
    top = d2[order[0]]
    runner = d2[order[1]] if len(d2) > 1 else 0.0
    low = not (top > 0 and top >= 3.0 * max(runner, 0.0))
    return ElbowResult(ks, wcss, int(ks[1 + order[0]]), bool(low), d2, tuple(models))


def silhouette_samples(data, labels) -> np.ndarray:
    """Per-point silhouette; singletons and 0/0 cases score 0."""
    X = as_matrix(data)
    labels = np.asarray(labels)
    uniq, lab = np.unique(labels, return_inverse=True)
    if len(uniq) < 2:
        raise SingleClusterError("silhouette needs at least two clusters")
    n, k = len(X), len(uniq)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), lab] = 1.0
    counts = onehot.sum(0)
    sq = (X * X).sum(1)
    s = np.zeros(n)
    for a0 in range(0, n, CHUNK):
        sl = slice(a0, min(n, a0 + CHUNK))
        D = np.sqrt(np.maximum(sq[sl, None] - 2.0 * X[sl] @ X.T + sq[None, :], 0.0))
        rows = np.arange(sl.start, sl.stop)
        D[rows - a0, rows] = 0.0
        sums = D @ onehot
        own = lab[sl]
        own_n = counts[own]
        a = np.where(own_n > 1, sums[np.arange(len(own)), own] / np.maximum(own_n - 1, 1), 0.0)
        mean_other = sums / counts[None, :]
        mean_other[np.arange(len(own)), own] = np.inf
        b = mean_other.min(axis=1)
        m = np.maximum(a, b)
        val = np.divide(b - a, m, out=np.zeros_like(m), where=m > 0)
        s[sl] = np.where(own_n > 1, val, 0.0)
    return np.clip(s, -1.0, 1.0)


def silhouette_score(data, labels) -> tuple[float, np.ndarray]:
    s = silhouette_samples(data, labels)
    return float(s.mean()), s


@dataclass(frozen=True)
class ClusterReport:
    elbow: ElbowResult
    silhouette: dict  # k -> mean score
    silhouette_k: int


def cluster_report(data, k_max: int = 10, seed: int = 0, n_init: int = 4) -> ClusterReport:
    X = as_matrix(data)
    elbow = elbow_scan(X, k_max, seed=seed, n_init=n_init)
    sil = {}
    for m in elbow.models[1:]:
        k = m.k
        if len(np.unique(m.labels)) < 2:
            continue
        sil[k] = silhouette_score(X, m.labels)[0]
    best = max(sil, key=lambda k: (sil[k], -k))
    return ClusterReport(elbow, sil, int(best))
