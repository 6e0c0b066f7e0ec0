"""The 45-term hull parameter vector and its range table."""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ArityError, NonFiniteError, RangeViolation, ValidationError

INF = math.inf


class ParamSpec(NamedTuple):
    column: str  # CSV header name
    attr: str
    lo: float
    hi: float
    flag: bool = False


# Open intervals; flags take the values {0, 1}. Order is the CSV column order.
PARAM_SPECS: tuple[ParamSpec, ...] = (
    ParamSpec("LOA", "loa", 0.0, INF),
    ParamSpec("Lb", "lb", 0.05, 0.9),
    ParamSpec("Ls", "ls", 0.0, 0.9),
    ParamSpec("Bd", "bd", 0.0833, 0.333),
    ParamSpec("Dd", "dd", 0.05, 0.25),
    ParamSpec("Bs", "bs", 0.0, 1.0),
    ParamSpec("WL", "wl", 0.0, 1.0),
    ParamSpec("Bc", "bc", 0.05, 0.5),
    ParamSpec("Beta", "beta", 0.0, 45.0),
    ParamSpec("Rc", "rc", 0.0, 1.0),
    ParamSpec("Rk", "rk", -1.0, 1.0),
    ParamSpec("BOW(A)", "bow_a", -4.0, 4.0),
    ParamSpec("BOW(B)", "bow_b", -4.0, 4.0),
    ParamSpec("BK", "bk", 0.0, 1.0),
    ParamSpec("Kappa_BOW", "kappa_bow", 0.0, 1.0),
    ParamSpec("DELTA_BOW(A)", "delta_bow_a", -4.0, 4.0),
    ParamSpec("DELTA_BOW(B)", "delta_bow_b", -4.0, 4.0),
    ParamSpec("DRIFT(A)", "drift_a", -4.0, 4.0),
    ParamSpec("DRIFT(B)", "drift_b", -4.0, 4.0),
    ParamSpec("DRIFT(C)", "drift_c", 0.0, 60.0),
    ParamSpec("bit_EP_S", "bit_ep_s", 0.0, 1.0, True),
    ParamSpec("bit_EP_T", "bit_ep_t", 0.0, 1.0, True),
    ParamSpec("TRANS(A)", "trans_a", -3.0, 5.0),
    ParamSpec("SK", "sk", 0.0, 1.0),
    ParamSpec("Kappa_STERN", "kappa_stern", 0.0, 1.0),
    ParamSpec("DELTA_STERN(A)", "delta_stern_a", -4.0, 4.0),
    ParamSpec("DELTA_STERN(B)", "delta_stern_b", -4.0, 4.0),
    ParamSpec("Beta_trans", "beta_trans", 0.0, 60.0),
    ParamSpec("Bc_trans", "bc_trans", 0.0, 0.5),
    ParamSpec("Rc_trans", "rc_trans", 0.0, 0.5),
    ParamSpec("Rk_trans", "rk_trans", -1.0, 1.0),
    ParamSpec("bit_BB", "bit_bb", 0.0, 1.0, True),
    ParamSpec("bit_SB", "bit_sb", 0.0, 1.0, True),
    ParamSpec("Lbb", "lbb", 0.0, 0.2),
    ParamSpec("Hbb", "hbb", 0.0, 1.0),
    ParamSpec("Bbb", "bbb", 0.0, 1.0),
    ParamSpec("Lbbm", "lbbm", -1.0, 1.0),
    ParamSpec("Rbb", "rbb", 0.05, 0.33),
    ParamSpec("Kappa_SB", "kappa_sb", 0.0, 1.0),
    ParamSpec("Lsb", "lsb", 0.0, 0.2),
    ParamSpec("HsboA", "hsboa", 0.0, 1.0),
    ParamSpec("Hsb", "hsb", 0.0, 1.0),
    ParamSpec("Bsb", "bsb", 0.0, 1.0),
    ParamSpec("Lsbm", "lsbm", -1.0, 1.0),
    ParamSpec("Rsb", "rsb", 0.05, 0.33),
)

N_PARAMS = len(PARAM_SPECS)
COLUMNS: tuple[str, ...] = tuple(s.column for s in PARAM_SPECS)
FLAG_INDICES: tuple[int, ...] = tuple(i for i, s in enumerate(PARAM_SPECS) if s.flag)
LOWER = np.array([s.lo for s in PARAM_SPECS])
UPPER = np.array([s.hi for s in PARAM_SPECS])

FLAG_TOL = 1e-9

assert N_PARAMS == 45


@dataclass(frozen=True)
class HullParameters:
    loa: float
    lb: float
    ls: float
    bd: float
    dd: float
    bs: float
    wl: float
    bc: float
    beta: float
    rc: float
    rk: float
    bow_a: float
    bow_b: float
    bk: float
    kappa_bow: float
    delta_bow_a: float
    delta_bow_b: float
    drift_a: float
    drift_b: float
    drift_c: float
    bit_ep_s: int
    bit_ep_t: int
    trans_a: float
    sk: float
    kappa_stern: float
    delta_stern_a: float
    delta_stern_b: float
    beta_trans: float
    bc_trans: float
    rc_trans: float
    rk_trans: float
    bit_bb: int
    bit_sb: int
    lbb: float
    hbb: float
    bbb: float
    lbbm: float
    rbb: float
    kappa_sb: float
    lsb: float
    hsboa: float
    hsb: float
    bsb: float
    lsbm: float
    rsb: float

    def to_vector(self) -> np.ndarray:
        return np.array([float(getattr(self, s.attr)) for s in PARAM_SPECS])

    def replace(self, **changes) -> "HullParameters":
        return dataclasses.replace(self, **changes)

    @property
    def depth(self) -> float:
        """Hull depth in meters."""
        return self.dd * self.loa

    def digest(self) -> str:
        """Stable hash of the parameter values (used for mesh provenance and caching)."""
        return hashlib.sha256(self.to_vector().tobytes()).hexdigest()[:16]


def in_range(value: float, spec: ParamSpec) -> bool:
    if spec.flag:
        return value in (0.0, 1.0)
    return spec.lo < value < spec.hi


def snap_flags(row: np.ndarray) -> np.ndarray:
    """Round flag columns to the nearer of {0, 1}."""
    out = np.array(row, dtype=float, copy=True)
    for i in FLAG_INDICES:
        out[i] = 1.0 if out[i] >= 0.5 else 0.0
    return out


def validate_params(raw: Sequence[float], loa: float | None = None) -> HullParameters:
    """Check a raw 45-vector against the range table and return typed parameters.

    ``loa`` overrides the first entry when given. All range violations are
    collected and raised together.
    """
    values = np.asarray(raw, dtype=float).ravel()
    if values.size != N_PARAMS:
        raise ArityError(f"expected {N_PARAMS} parameters, got {values.size}")
    if loa is not None:
        values = values.copy()
        values[0] = float(loa)
    if not np.all(np.isfinite(values)):
        bad = [COLUMNS[i] for i in np.flatnonzero(~np.isfinite(values))]
        raise NonFiniteError(f"non-finite values in {', '.join(bad)}")

    violations = []
    kwargs = {}
    for spec, value in zip(PARAM_SPECS, values):
        if spec.flag:
            nearest = round(value)
            if nearest in (0, 1) and abs(value - nearest) <= FLAG_TOL:
                kwargs[spec.attr] = int(nearest)
                continue
            violations.append(RangeViolation(spec.column, float(value), spec.lo, spec.hi))
            continue
        if not spec.lo < value < spec.hi:
            violations.append(RangeViolation(spec.column, float(value), spec.lo, spec.hi))
        kwargs[spec.attr] = float(value)
    if violations:
        raise ValidationError(violations)
    return HullParameters(**kwargs)


def midrange_vector(loa: float = 10.0) -> np.ndarray:
    """A vector with every continuous field at the centre of its range."""
    v = np.empty(N_PARAMS)
    for i, s in enumerate(PARAM_SPECS):
        v[i] = 0.0 if s.flag else 0.5 * (s.lo + s.hi)
    v[0] = loa
    return v


def uniform_vector(rng: np.random.Generator, loa: float = 10.0, bounds: dict | None = None) -> np.ndarray:
    """Draw one vector uniformly from the range table (flags fair coin flips).

    ``bounds`` maps attribute names to narrower (lo, hi) boxes.
    """
    bounds = bounds or {}
    v = np.empty(N_PARAMS)
    for i, s in enumerate(PARAM_SPECS):
        if s.flag:
            v[i] = float(rng.integers(0, 2))
            continue
        lo, hi = bounds.get(s.attr, (s.lo, s.hi))
        v[i] = rng.uniform(lo, hi) if math.isfinite(hi) else loa
    v[0] = loa
    return v
