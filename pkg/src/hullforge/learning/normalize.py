from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDataError, NonFiniteError


def as_matrix(data, min_rows: int = 1) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] < min_rows or X.shape[1] == 0:
        raise EmptyDataError(f"need a 2-d array with at least {min_rows} rows, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("data contains non-finite values")
    return X


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension min-max scaling onto [0, 1].

    Constant dimensions map to 0.5 and invert back to their constant value.
    """

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, data) -> "Normalizer":
        X = as_matrix(data, min_rows=2)
        return cls(X.min(axis=0), X.max(axis=0))

    @classmethod
    def identity(cls, d: int) -> "Normalizer":
        return cls(np.zeros(d), np.ones(d))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        span = self.span
        flat = span == 0
        out = (x - self.lo) / np.where(flat, 1.0, span)
        return np.where(flat, 0.5, out)

    def invert(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.where(self.span == 0, self.lo, self.lo + u * self.span)

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d) -> "Normalizer":
        return cls(np.array(d["lo"], dtype=float), np.array(d["hi"], dtype=float))


def fit_normalizer(data) -> Normalizer:
    return Normalizer.fit(data)
