from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import _check_draft, waterline_length
from .mesh import build_mesh
from .surface import as_surface


@dataclass(frozen=True)
class Hydrostatics:
    wetted_surface: float  # m^2, both sides
    waterline_length: float  # m
    displaced_volume: float  # m^3
    draft: float  # m


def displaced_volume(hull, draft: float, nx: int = 401, nz: int = 101) -> float:
    """Volume below ``draft`` by trapezoidal integration of sectional areas."""
    surface = as_surface(hull)
    x0, x1 = surface.x_bounds()
    xs = np.linspace(x0, x1, nx)
    zs = np.linspace(0.0, draft, nz)
    h = surface.half_breadth_array(xs[:, None], zs[None, :])
    areas = 2.0 * np.trapezoid(h, zs, axis=1)
    return float(np.trapezoid(areas, xs))


def hydrostatics(
    hull, draft: float, *, nx: int = 401, nz: int = 101, mesh_nx: int = 80, mesh_nz: int = 40, mesh=None
) -> Hydrostatics:
    """Wetted surface (clipped mesh area), waterline length and displacement.

    A prebuilt ``mesh`` of the same hull may be passed to skip meshing.
    """
    surface = as_surface(hull)
    _check_draft(surface, draft)
    draft = min(draft, surface.depth)
    if mesh is None:
        mesh = build_mesh(surface, mesh_nx, mesh_nz)
    cut = draft * (1.0 - 1e-12)
    return Hydrostatics(
        wetted_surface=mesh.area_below(cut),
        waterline_length=waterline_length(surface, draft),
        displaced_volume=displaced_volume(surface, draft, nx, nz),
        draft=float(draft),
    )
