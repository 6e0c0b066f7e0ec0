"""Submerged centreplane offset grids for the wave solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DraftError
from .surface import as_surface

POSITIVE = 1e-9  # offsets below this fraction of loa count as zero


@dataclass(frozen=True)
class PointGrid:
    """Offsets over the submerged centreplane.

    ``x`` starts at 0 at the aft end of the submerged hull; ``z`` runs from
    ``-draft`` to 0 (waterline); ``y[i, j]`` is the half-breadth at
    ``(x[i], z[j])``.
    """

    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    draft: float
    lwl: float
    loa: float

    def scaled(self, s: float) -> "PointGrid":
        return PointGrid(self.x, self.z, s * self.y, self.draft, self.lwl, self.loa)


def _bisect_boundary(surface, inside_x, outside_x, z, tol_h, iters=36):
    """Refine the x where h drops to zero between paired inside/outside points."""
    a = np.array(inside_x, dtype=float)
    b = np.array(outside_x, dtype=float)
    for _ in range(iters):
        m = 0.5 * (a + b)
        pos = surface.half_breadth_array(m, z) > tol_h
        a = np.where(pos, m, a)
        b = np.where(pos, b, m)
    return a


def x_extent(surface, zs, n: int = 1025):
    """Fore/aft extent of positive half-breadth at each height in ``zs``.

    Returns (lo, hi) arrays; NaN where the waterline at that height is empty.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    xs = np.linspace(0.0, surface.loa, n)
    tol_h = POSITIVE * surface.loa
    h = surface.half_breadth_array(xs[None, :], zs[:, None])
    pos = h > tol_h
    has = pos.any(axis=1)
    first = np.argmax(pos, axis=1)
    last = n - 1 - np.argmax(pos[:, ::-1], axis=1)

    lo = xs[first].copy()
    hi = xs[last].copy()
    need_lo = has & (first > 0)
    if np.any(need_lo):
        lo[need_lo] = _bisect_boundary(
            surface, xs[first[need_lo]], xs[first[need_lo] - 1], zs[need_lo], tol_h
        )
    need_hi = has & (last < n - 1)
    if np.any(need_hi):
        hi[need_hi] = _bisect_boundary(
            surface, xs[last[need_hi]], xs[last[need_hi] + 1], zs[need_hi], tol_h
        )
    lo[~has] = np.nan
    hi[~has] = np.nan
    return lo, hi


def waterline_length(hull, draft: float) -> float:
    """Length of the waterplane at ``draft`` (0 if the waterplane is empty)."""
    surface = as_surface(hull)
    lo, hi = x_extent(surface, [draft])
    if np.isnan(lo[0]):
        return 0.0
    return float(hi[0] - lo[0])


def _check_draft(surface, draft):
    if not 0.0 < draft <= surface.depth * (1 + 1e-12):
        raise DraftError(f"draft {draft} outside (0, {surface.depth}]")


def point_grid(hull, nx: int = 50, nz: int = 25, draft: float | None = None) -> PointGrid:
    """Sample the submerged hull on an ``nx`` x ``nz`` grid."""
    if nx < 4 or nz < 3:
        raise ValueError("point_grid needs nx >= 4 and nz >= 3")
    surface = as_surface(hull)
    if draft is None:
        raise DraftError("draft is required")
    _check_draft(surface, draft)
    draft = min(draft, surface.depth)

    lo, hi = x_extent(surface, np.linspace(0.0, draft, 65))
    if np.all(np.isnan(lo)):
        x0, x1 = 0.0, surface.loa
    else:
        x0, x1 = float(np.nanmin(lo)), float(np.nanmax(hi))

    X = np.linspace(0.0, x1 - x0, nx)
    Z = np.linspace(-draft, 0.0, nz)
    Y = surface.half_breadth_array((x0 + X)[:, None], (draft + Z)[None, :])
    Y = np.where(Y > POSITIVE * surface.loa, Y, 0.0)
    return PointGrid(X, Z, Y, float(draft), waterline_length(surface, draft), float(surface.loa))
