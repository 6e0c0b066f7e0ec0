"""Full-covariance Gaussian mixtures fitted by EM, and what we do with them."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from ..errors import DegenerateComponentError, IoError, KRangeError, ParseError, SamplingError, ValidationError
from ..params import FLAG_INDICES, LOWER, N_PARAMS, UPPER, snap_flags, validate_params
from .cluster import kmeans
from .normalize import Normalizer, as_matrix

FLOOR_SCALE = 1e-6
N_RESTARTS = 3
MAX_DRAWS = 1000  # per requested sample


@dataclass(frozen=True)
class GmmModel:
    k: int
    weights: np.ndarray
    means: np.ndarray  # (k, d), normalized space
    covariances: np.ndarray  # (k, d, d)
    train_loglik: float
    normalizer: Normalizer
    seed: int = 0
    history: tuple = field(default=())  # average log-likelihood per EM iteration
    converged: bool = True
    floor: float = 0.0

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_free_params(self) -> int:
        d = self.dim
        return (self.k - 1) + self.k * d + self.k * d * (d + 1) // 2

    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.covariances)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "weights": self.weights.tolist(),
            "means": self.means.ravel().tolist(),
            "covariances": self.covariances.ravel().tolist(),
            "train_loglik": self.train_loglik,
            "normalizer": self.normalizer.to_dict(),
            "seed": self.seed,
            "converged": self.converged,
            "floor": self.floor,
            "history": list(self.history),
        }

    @classmethod
    def from_dict(cls, d) -> "GmmModel":
        try:
            k = int(d["k"])
            means = np.array(d["means"], dtype=float).reshape(k, -1)
            dim = means.shape[1]
            return cls(
                k=k,
                weights=np.array(d["weights"], dtype=float),
                means=means,
                covariances=np.array(d["covariances"], dtype=float).reshape(k, dim, dim),
                train_loglik=float(d["train_loglik"]),
                normalizer=Normalizer.from_dict(d["normalizer"]),
                seed=int(d.get("seed", 0)),
                history=tuple(d.get("history", ())),
                converged=bool(d.get("converged", True)),
                floor=float(d.get("floor", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(0, f"bad model document: {exc}") from exc

    def save(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(json.dumps(self.to_dict()))
        except OSError as exc:
            raise IoError(f"{path}: {exc}") from exc
        return path

    @classmethod
    def load(cls, path) -> "GmmModel":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IoError(f"{path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.lineno, exc.msg) from exc


# --- densities ---------------------------------------------------------------


def _component_logpdf(U, means, chol):
    """log N(u | mean_j, L_j L_j^T) for every row and component -> (n, k)."""
    n, d = U.shape
    out = np.empty((n, len(means)))
    for j, (mu, L) in enumerate(zip(means, chol)):
        z = solve_triangular(L, (U - mu).T, lower=True, check_finite=False)
        logdet = 2.0 * np.log(np.diag(L)).sum()
        out[:, j] = -0.5 * (d * math.log(2 * math.pi) + logdet + (z * z).sum(0))
    return out


def _weighted_logpdf(U, weights, means, covs):
    with np.errstate(divide="ignore"):
        return _component_logpdf(U, means, np.linalg.cholesky(covs)) + np.log(weights)[None, :]


def log_density(model: GmmModel, data, normalized: bool = False) -> np.ndarray:
    U = as_matrix(data)
    if not normalized:
        U = model.normalizer.apply(U)
    return logsumexp(_weighted_logpdf(U, model.weights, model.means, model.covariances), axis=1)


def responsibilities(model: GmmModel, x, normalized: bool = False) -> np.ndarray:
    """Posterior component probabilities; a 1-d input gives a k-vector."""
    x = np.asarray(x, dtype=float)
    U = as_matrix(x)
    if not normalized:
        U = model.normalizer.apply(U)
    lp = _weighted_logpdf(U, model.weights, model.means, model.covariances)
    r = np.exp(lp - logsumexp(lp, axis=1, keepdims=True))
    r /= r.sum(axis=1, keepdims=True)
    return r[0] if x.ndim == 1 else r


# --- EM --------------------------------------------------------------------


def _floor_cov(S, floor):
    """Raise eigenvalues below ``floor`` to ``floor``; untouched otherwise."""
    S = 0.5 * (S + S.T)
    w = np.linalg.eigvalsh(S)
    if w[0] >= floor:
        return S
    w, V = np.linalg.eigh(S)
    return (V * np.maximum(w, floor)) @ V.T


def _m_step(U, R, floor):
    Nk = R.sum(0)
    weights = Nk / Nk.sum()
    safe = np.maximum(Nk, np.finfo(float).tiny)
    means = (R.T @ U) / safe[:, None]
    covs = np.empty((len(Nk), U.shape[1], U.shape[1]))
    for j in range(len(Nk)):
        D = U - means[j]
        covs[j] = _floor_cov((R[:, j, None] * D).T @ D / safe[j], floor)
    return weights, means, covs, Nk


def _em_run(U, k, floor, tol, max_iter, kseed):
    n, d = U.shape
    km = kmeans(U, k, seed=kseed, max_iter=100)
    R = np.zeros((n, k))
    R[np.arange(n), km.labels] = 1.0
    weights, means, covs, Nk = _m_step(U, R, floor)
    history = []
    reseeded = False
    converged = False
    for _ in range(max_iter):
        lp = _weighted_logpdf(U, weights, means, covs)
        ll_rows = logsumexp(lp, axis=1)
        history.append(float(ll_rows.mean()))
        if len(history) > 1 and abs(history[-1] - history[-2]) <= tol * abs(history[-2]):
            converged = True
            break
        R = np.exp(lp - ll_rows[:, None])
        weights, means, covs, Nk = _m_step(U, R, floor)
        dead = Nk < 1e-3 / n
        if np.any(dead):
            if reseeded:
                raise DegenerateComponentError(f"component(s) {np.flatnonzero(dead).tolist()} collapsed twice")
            reseeded = True
            # re-seed on the least likely points with the pooled covariance
            worst = np.argsort(ll_rows, kind="stable")[: int(dead.sum())]
            pooled = _floor_cov(np.cov(U, rowvar=False, bias=True).reshape(d, d), floor)
            means[dead] = U[worst]
            covs[dead] = pooled
            weights[dead] = 1.0 / n
            weights /= weights.sum()
            history = []  # the likelihood path restarts here
    return weights, means, covs, history, converged


def fit_gmm(
    data,
    k: int,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 500,
    normalizer: Normalizer | None = None,
    restarts: int = N_RESTARTS,
) -> GmmModel:
    """EM from k-means starts; the best of ``restarts`` runs is kept.

    ``data`` is in raw units; it is min-max normalized first unless a
    normalizer is supplied.
    """
    X = as_matrix(data, min_rows=2)
    n, d = X.shape
    if not 1 <= k <= n:
        raise KRangeError(f"k={k} outside [1, {n}]")
    if n <= k * d:
        warnings.warn(f"n={n} <= k*d={k * d}: covariances will lean on the floor", stacklevel=2)
    norm = normalizer or Normalizer.fit(X)
    U = norm.apply(X)
    floor = FLOOR_SCALE * float(np.mean(np.var(U, axis=0)))
    floor = floor if floor > 0 else FLOOR_SCALE
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        kseed = int(rng.integers(2**31))
        w, m, c, hist, conv = _em_run(U, k, floor, tol, max_iter, kseed)
        if best is None or hist[-1] > best[3][-1]:
            best = (w, m, c, hist, conv)
    w, m, c, hist, conv = best
    return GmmModel(k, w, m, c, hist[-1], norm, seed, tuple(hist), conv, floor)


def bic(model: GmmModel, data) -> float:
    X = as_matrix(data)
    ll = float(log_density(model, X).sum())
    return model.n_free_params * math.log(len(X)) - 2.0 * ll


def select_k(data, k_range=range(1, 13), seed: int = 0, **kw) -> tuple[GmmModel, dict]:
    """Fit every k and keep the lowest BIC.

    Only k with n >= k * (d + 1) are tried: below that, components sit on the
    covariance floor and their spiky likelihoods swamp the penalty term.
    """
    X = as_matrix(data, min_rows=2)
    n, d = X.shape
    scores = {}
    best = None
    for k in k_range:
        if k > 1 and n < k * (d + 1):
            break
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = fit_gmm(X, k, seed=seed, **kw)
        scores[k] = bic(m, X)
        if best is None or scores[k] < scores[best.k]:
            best = m
    return best, scores


# --- sampling and design extraction -----------------------------------------


def sample_normalized(model: GmmModel, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    comp = rng.choice(model.k, size=n, p=model.weights)
    z = rng.standard_normal((n, model.dim))
    L = model.cholesky()
    U = model.means[comp] + np.einsum("nij,nj->ni", L[comp], z)
    return U, comp


def sample_gmm(model: GmmModel, n: int, seed: int = 0, return_components: bool = False):
    """Draw ``n`` points in raw units (no snapping, no range checks)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    U, comp = sample_normalized(model, n, np.random.default_rng(seed))
    X = model.normalizer.invert(U)
    return (X, comp) if return_components else X


def hull_row_ok(row: np.ndarray) -> bool:
    cont = np.ones(N_PARAMS, dtype=bool)
    cont[list(FLAG_INDICES)] = False
    return bool(np.all((row[cont] > LOWER[cont]) & (row[cont] < UPPER[cont])))


def sample_hulls(model: GmmModel, n: int, seed: int = 0, loa: float | None = None, max_draws: int = MAX_DRAWS):
    """Draw ``n`` in-range hull vectors: flags snapped, out-of-range draws redrawn.

    Returns (rows, draws) where ``draws[i]`` counts the candidates slot i used.
    """
    if model.dim != N_PARAMS:
        raise ValueError(f"model has dim {model.dim}, hull vectors need {N_PARAMS}")
    rng = np.random.default_rng(seed)
    out = np.empty((n, N_PARAMS))
    draws = np.zeros(n, dtype=int)
    pending = np.arange(n)
    while len(pending):
        U, _ = sample_normalized(model, len(pending), rng)
        X = model.normalizer.invert(U)
        if loa is not None:
            X[:, 0] = loa
        X = np.array([snap_flags(r) for r in X])
        draws[pending] += 1
        ok = np.array([hull_row_ok(r) for r in X])
        out[pending[ok]] = X[ok]
        pending = pending[~ok]
        if len(pending) and draws[pending].max() >= max_draws:
            raise SamplingError(f"no in-range draw after {max_draws} attempts for {len(pending)} sample(s)")
    return out, draws


def component_prototypes(model: GmmModel) -> np.ndarray:
    return model.normalizer.invert(model.means)


def prototype_report(model: GmmModel, data) -> list[tuple[int, int]]:
    """(component, dimension) pairs where a prototype leaves the data's bounding box."""
    X = as_matrix(data)
    P = component_prototypes(model)
    lo, hi = X.min(0), X.max(0)
    bad = np.argwhere((P < lo) | (P > hi))
    return [(int(i), int(j)) for i, j in bad]


def interpolate_designs(a, b, t: float) -> np.ndarray:
    """Blend two hull vectors; flags take the nearer endpoint's value.

    Min-max scaling is affine, so blending raw values equals blending in
    normalized space and keeps the endpoints exact.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    out = (1.0 - t) * a + t * b
    for i in FLAG_INDICES:
        out[i] = a[i] if t <= 0.5 else b[i]
    try:
        validate_params(out)
    except ValidationError as exc:
        raise exc.violations[0] from None
    return out


@dataclass(frozen=True)
class OutlierReport:
    scores: np.ndarray  # per-row log density
    indices: np.ndarray  # rows in the bottom quantile, lowest first
    q: float


def outlier_scores(model: GmmModel, data, q: float = 0.01) -> OutlierReport:
    scores = log_density(model, data)
    m = int(math.ceil(q * len(scores) - 1e-9))
    order = np.argsort(scores, kind="stable")[:m]
    return OutlierReport(scores, order, q)


def novelty_check(sample, training, epsilon: float = 1e-6, normalizer: Normalizer | None = None) -> tuple[float, bool]:
    """Nearest-neighbour distance in normalized space and whether it exceeds ``epsilon``."""
    T = as_matrix(training)
    s = np.asarray(sample, dtype=float)[None, :]
    if normalizer is not None:
        T, s = normalizer.apply(T), normalizer.apply(s)
    d = float(np.sqrt(((T - s) ** 2).sum(1)).min())
    return d, d > epsilon


__all__ = [
    "GmmModel",
    "bic",
    "component_prototypes",
    "fit_gmm",
    "interpolate_designs",
    "log_density",
    "novelty_check",
    "outlier_scores",
    "responsibilities",
    "sample_gmm",
    "sample_hulls",
    "select_k",
]
