"""Thin-ship wave resistance, ITTC friction and the Cw lookup table."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    ExtrapolationError,
    HullforgeError,
    IoError,
    ParseError,
    QuadratureError,
    ReynoldsError,
)
from .geometry.grid import PointGrid, point_grid, waterline_length
from .geometry.hydrostatics import hydrostatics
from .geometry.surface import as_surface

KNOT = 0.514444  # m/s
FROUDE_NUMBERS = tuple(float(f) for f in np.linspace(0.10, 1.00, 8))
DRAFT_FRACTIONS = (0.25, 0.50, 0.75, 1.00)

LAMBDA_CAP = 12.0
TAIL_EPS = 1e-12
GL_ORDER = 16  # nodes per panel
MIN_PANELS = 16  # 256 nodes by default
MAX_NODES = 1 << 16


def knots(v: float) -> float:
    return v * KNOT


@dataclass(frozen=True)
class FluidEnvironment:
    rho: float = 1025.0
    nu: float = 1.1892e-6
    g: float = 9.80665

    def __post_init__(self):
        for name in ("rho", "nu", "g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v}")


# --- Michell integral ------------------------------------------------------


def _phi(theta):
    """Weights of a linear hat against e^{theta s} on [0, 1].

    Returns (w_left, w_right) with w_left = int (1-s) e^{theta s} ds and
    w_right = int s e^{theta s} ds. Assumes Re(theta) <= 0.
    """
    theta = np.asarray(theta)
    small = np.abs(theta) < 0.25
    t = np.where(small, 1.0, theta)
    e = np.exp(t)
    em1 = e - 1.0
    t2 = t * t
    w_l = em1 / t2 - 1.0 / t
    w_r = e / t - em1 / t2
    if np.any(small):
        ts = theta[small]
        sl = np.zeros_like(ts)
        sr = np.zeros_like(ts)
        term = np.ones_like(ts)
        fact = 2.0
        for n in range(12):
            # theta^n / (n+2)!
            sl = sl + term / fact
            sr = sr + (n + 1) * term / fact
            term = term * ts
            fact *= n + 3
        w_l[small] = sl
        w_r[small] = sr
    return w_l, w_r


def _linear_weights(t, c):
    """Quadrature weights W[l, k] so that sum_k W[l, k] f_k integrates the
    piecewise-linear interpolant of f against exp(c_l t) exactly.

    ``t`` ascending, Re(c) <= 0.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(c)[:, None]
    h = np.diff(t)[None, :]
    e0 = np.exp(c * t[None, :-1])
    if np.ptp(h) <= 1e-12 * h[0, 0]:
        w_l, w_r = _phi(c * h[0, 0])  # uniform spacing: one column suffices
    else:
        w_l, w_r = _phi(c * h)
    W = np.zeros((c.shape[0], len(t)), dtype=np.result_type(c, float))
    W[:, :-1] += h * e0 * w_l
    W[:, 1:] += h * e0 * w_r
    return W


def _gl_panels(u_max, lam_max, n_panels):
    """Composite Gauss-Legendre nodes/weights in u = arccosh(lambda).

    Panel edges are equally spaced in lambda so oscillation is spread evenly.
    """
    xg, wg = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.arccosh(np.linspace(1.0, lam_max, n_panels + 1))
    edges[-1] = u_max
    a, b = edges[:-1, None], edges[1:, None]
    u = 0.5 * (b - a) * xg[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg[None, :]
    return u.ravel(), w.ravel()


def _source_spectrum(grid: PointGrid, k0: float, lam: np.ndarray) -> np.ndarray:
    """Complex amplitude  I + iJ  at each lambda (up to conjugation)."""
    x, z, y = grid.x, grid.z, grid.y
    slope = np.gradient(y, x, axis=0)
    Wx = _linear_weights(x, -1j * k0 * lam)
    # integrate z from the surface downward: s = -z ascending
    s = -z[::-1]
    Wz = _linear_weights(s, -k0 * lam * lam)[:, ::-1]
    return np.sum((Wx @ slope) * Wz, axis=1)


def lambda_limit(grid: PointGrid, k0: float) -> float:
    z_eff = abs(float(grid.z[-2])) if len(grid.z) > 1 else 0.0
    if z_eff <= 0:
        return LAMBDA_CAP
    return float(min(LAMBDA_CAP, max(1.0 + 1e-6, math.sqrt(math.log(1.0 / TAIL_EPS) / (k0 * z_eff)))))


def wave_resistance(
    grid: PointGrid,
    speed: float,
    env: FluidEnvironment | None = None,
    *,
    rtol: float = 1e-7,
    max_nodes: int = MAX_NODES,
    min_panels: int = MIN_PANELS,
) -> float:
    """Michell wave resistance in newtons.

    The lambda rule starts at ``min_panels`` (or more for short waves) and
    doubles until successive estimates agree to ``rtol``.
    """
    env = env or FluidEnvironment()
    if not speed > 0:
        raise DomainError(f"speed must be positive, got {speed}")
    if not np.any(grid.y):
        return 0.0
    k0 = env.g / speed**2
    lam_max = lambda_limit(grid, k0)
    u_max = math.acosh(lam_max)
    span = float(grid.x[-1] - grid.x[0])
    # ~1 period of exp(i k0 lambda x) per panel
    n_panels = max(min_panels, int(math.ceil(k0 * span * (lam_max - 1.0) / (2 * math.pi))))

    def integral(n):
        u, w = _gl_panels(u_max, lam_max, n)
        lam = np.cosh(u)
        F = _source_spectrum(grid, k0, lam)
        return float(np.sum(w * (F.real**2 + F.imag**2) * lam * lam))

    prev, err = integral(n_panels), float("nan")
    while True:
        n_panels *= 2
        if n_panels * GL_ORDER > max_nodes:
            raise QuadratureError(f"lambda integral not converged within {max_nodes} nodes", achieved=err)
        cur = integral(n_panels)
        err = abs(cur - prev) / max(abs(cur), 1e-300)
        if err <= rtol:
            break
        prev = cur
    return 4.0 * env.rho * env.g**2 / (math.pi * speed**2) * cur


def michell_cw(grid: PointGrid, speed: float, env: FluidEnvironment | None = None, **kw) -> float:
    """Cw = Rw / (0.5 rho U^2 LOA^2)."""
    env = env or FluidEnvironment()
    rw = wave_resistance(grid, speed, env, **kw)
    return rw / (0.5 * env.rho * speed**2 * grid.loa**2)


# --- friction ----------------------------------------------------------------


def calc_cf(speed: float, lwl: float, env: FluidEnvironment | None = None) -> float:
    env = env or FluidEnvironment()
    return ittc_cf(speed * lwl / env.nu)


def ittc_cf(re: float) -> float:
    if not re > 1000.0:
        raise ReynoldsError(f"Re={re} must exceed 1000")
    return 0.075 / (math.log10(re) - 2.0) ** 2


# --- drag table --------------------------------------------------------------


@dataclass(frozen=True)
class DragTable:
    froude_numbers: tuple
    draft_fractions: tuple
    cw: np.ndarray  # (8, 4)
    loa_ref: float
    dd_ref: float
    provenance: str = ""

    def __post_init__(self):
        cw = np.asarray(self.cw, dtype=float)
        fn = np.asarray(self.froude_numbers, dtype=float)
        df = np.asarray(self.draft_fractions, dtype=float)
        if cw.shape != (len(fn), len(df)):
            raise DomainError(f"cw shape {cw.shape} does not match grid {len(fn)}x{len(df)}")
        if np.any(np.diff(fn) <= 0) or np.any(np.diff(df) <= 0):
            raise DomainError("table grids must be strictly ascending")
        if not np.all(np.isfinite(cw)) or np.any(cw < 0):
            raise DomainError("cw entries must be finite and non-negative")
        object.__setattr__(self, "cw", cw)
        object.__setattr__(self, "froude_numbers", tuple(float(v) for v in fn))
        object.__setattr__(self, "draft_fractions", tuple(float(v) for v in df))

    def to_dict(self) -> dict:
        return {
            "froude_numbers": list(self.froude_numbers),
            "draft_fractions": list(self.draft_fractions),
            "cw": self.cw.ravel().tolist(),
            "loa_ref": self.loa_ref,
            "dd_ref": self.dd_ref,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DragTable":
        try:
            fn, df = d["froude_numbers"], d["draft_fractions"]
            cw = np.array(d["cw"], dtype=float).reshape(len(fn), len(df))
            return cls(tuple(fn), tuple(df), cw, float(d["loa_ref"]), float(d["dd_ref"]), d.get("provenance", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(0, f"bad drag table: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def save(self, path) -> Path:
        path = Path(path)
        try:
            path.write_text(self.dumps())
        except OSError as exc:
            raise IoError(f"{path}: {exc}") from exc
        return path

    @classmethod
    def load(cls, path) -> "DragTable":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IoError(f"{path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.lineno, exc.msg) from exc


def build_drag_table(
    p,
    env: FluidEnvironment | None = None,
    *,
    nx: int = 50,
    nz: int = 25,
    froude_numbers=FROUDE_NUMBERS,
    draft_fractions=DRAFT_FRACTIONS,
) -> DragTable:
    """Cw at every (Fn, draft fraction) pair.

    Speeds are set per draft from that draft's waterline length, so a cell's
    Fn means the same thing as the Fn computed in :func:`calc_drag`.
    """
    env = env or FluidEnvironment()
    surface = as_surface(p)
    cw = np.zeros((len(froude_numbers), len(draft_fractions)))
    for j, frac in enumerate(draft_fractions):
        grid = point_grid(surface, nx, nz, frac * surface.depth)
        lref = grid.lwl if grid.lwl > 0 else surface.loa
        for i, fn in enumerate(froude_numbers):
            speed = fn * math.sqrt(env.g * lref)
            try:
                cw[i, j] = michell_cw(grid, speed, env)
            except QuadratureError as exc:
                raise QuadratureError(f"cell ({i}, {j}): {exc}", exc.achieved, (i, j)) from exc
    digest = surface.params.digest() if hasattr(surface, "params") else ""
    return DragTable(tuple(froude_numbers), tuple(draft_fractions), cw, surface.loa, surface.depth / surface.loa, digest)


def _bracket(grid, v, name):
    grid = np.asarray(grid)
    if not grid[0] <= v <= grid[-1]:
        raise ExtrapolationError(f"{name}={v} outside [{grid[0]}, {grid[-1]}]")
    i = int(np.clip(np.searchsorted(grid, v, side="right") - 1, 0, len(grid) - 2))
    t = (v - grid[i]) / (grid[i + 1] - grid[i])
    return i, t


def interp_cw(table: DragTable, fn: float, draft_frac: float) -> float:
    """Bilinear lookup; exact at nodes, no extrapolation."""
    i, t = _bracket(table.froude_numbers, fn, "Fn")
    j, s = _bracket(table.draft_fractions, draft_frac, "draft_frac")
    c = table.cw
    return float(
        c[i, j] * (1 - t) * (1 - s) + c[i + 1, j] * t * (1 - s) + c[i, j + 1] * (1 - t) * s + c[i + 1, j + 1] * t * s
    )


# --- total drag --------------------------------------------------------------


@dataclass(frozen=True)
class DragResult:
    rt: float
    rw: float
    rf: float
    fn: float
    cw: float
    cf: float
    re: float
    wetted_surface: float = field(default=float("nan"))
    lwl: float = field(default=float("nan"))


def calc_drag(
    p, table: DragTable, speed: float, draft: float, env: FluidEnvironment | None = None, *, mesh=None
) -> DragResult:
    env = env or FluidEnvironment()
    if not speed > 0:
        raise DomainError(f"speed must be positive, got {speed}")
    surface = as_surface(p)
    hs = hydrostatics(surface, draft, mesh=mesh)
    lwl = hs.waterline_length
    if lwl <= 0:
        raise HullforgeError("empty waterplane at this draft")
    re = speed * lwl / env.nu
    cf = ittc_cf(re)
    fn = speed / math.sqrt(env.g * lwl)
    cw = interp_cw(table, fn, draft / surface.depth)
    q = 0.5 * env.rho * speed**2
    rw = q * surface.loa**2 * cw
    rf = q * hs.wetted_surface * cf
    return DragResult(rw + rf, rw, rf, fn, cw, cf, re, hs.wetted_surface, lwl)
