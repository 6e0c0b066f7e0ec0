"""Hull geometry: surface evaluation, offset grids, meshes, feasibility, hydrostatics."""

from .feasibility import FeasibilityReport, algebraic_violations, feasibility_check
from .grid import PointGrid, point_grid, waterline_length, x_extent
from .hydrostatics import Hydrostatics, displaced_volume, hydrostatics
from .mesh import TriMesh, build_mesh, read_stl, stl_bytes, write_stl
from .surface import HullSurface, half_breadth

__all__ = [
    "FeasibilityReport",
    "HullSurface",
    "Hydrostatics",
    "PointGrid",
    "TriMesh",
    "algebraic_violations",
    "build_mesh",
    "displaced_volume",
    "feasibility_check",
    "half_breadth",
    "hydrostatics",
    "point_grid",
    "read_stl",
    "stl_bytes",
    "waterline_length",
    "write_stl",
    "x_extent",
]
