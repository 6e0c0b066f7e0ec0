"""Algebraic feasibility checklist plus a mesh-closure confirmation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshError
from ..params import HullParameters
from .mesh import TriMesh, build_mesh
from .surface import HullSurface, as_surface

# Checks whose failure means the surface folds through itself; the rest are
# about the surface being closed.
SELF_INTERSECTION_CHECKS = frozenset(
    {
        "tapers_disjoint",
        "midship_section_single_valued",
        "transom_section_single_valued",
        "bow_taper_width",
        "stern_taper_width",
        "bow_leading_edge_monotone",
        "bow_keel_rise",
        "stern_keel_rise",
    }
)
WATERTIGHT_CHECKS = frozenset(
    {"offsets_nonnegative", "bow_bulb_extent", "stern_bulb_extent", "transom_extent", "mesh_closure"}
)

_MARGIN = 1e-6


@dataclass(frozen=True)
class FeasibilityReport:
    watertight: bool
    self_intersection_free: bool
    violated_checks: tuple[str, ...] = field(default_factory=tuple)
    mesh: TriMesh | None = field(default=None, compare=False, repr=False)

    @property
    def feasible(self) -> bool:
        return self.watertight and self.self_intersection_free and not self.violated_checks


def algebraic_violations(p: HullParameters, surface: HullSurface | None = None) -> list[str]:
    s = surface or HullSurface(p)
    L, D = s.loa, s.depth
    tol = _MARGIN * L
    bad = []

    if p.lb + p.ls >= 1.0:
        bad.append("tapers_disjoint")
    if not s.midship.single_valued:
        bad.append("midship_section_single_valued")
    if not s.transom.single_valued:
        bad.append("transom_section_single_valued")
    if s._dbow_max - s._dbow_min >= 0.98 * 4.0:
        bad.append("bow_taper_width")
    if s._dstern_max - s._dstern_min >= 0.98 * 4.0:
        bad.append("stern_taper_width")
    # setback derivative 2*A*zeta + B must be <= 0 on [BK, 1]
    if max(2 * p.bow_a * p.bk + p.bow_b, 2 * p.bow_a + p.bow_b) > 0.0:
        bad.append("bow_leading_edge_monotone")
    if not (s.x_bow_junction + tol < s.x_bk and 0.0 <= p.bk * D <= D):
        bad.append("bow_keel_rise")
    if not (s.x_sk + tol < s.x_stern_junction and 0.0 <= s.z_transom <= D):
        bad.append("stern_keel_rise")

    zs = np.linspace(0.0, D, 65)
    xs = np.linspace(0.0, L, 129)
    if np.min(s.half_breadth_array(xs[:, None], zs[None, :])) < 0.0:
        bad.append("offsets_nonnegative")
    if s.bow_bulb is not None:
        b = s.bow_bulb
        if not (b.z_c - b.a_lo >= -tol and b.z_c + b.a_up <= D + tol and b.beam >= 0 and b.tip <= L + tol):
            bad.append("bow_bulb_extent")
    if s.stern_bulb is not None:
        b = s.stern_bulb
        if not (b.z_c - b.a_lo >= -tol and b.z_c + b.a_up <= D + tol and b.beam >= 0 and b.tip >= -tol):
            bad.append("stern_bulb_extent")
    zt = np.linspace(s.z_transom, D, 17)
    xt = s._transom_x(zt)
    if np.max(xt) >= s.x_stern_junction - tol or np.min(xt) < -tol:
        bad.append("transom_extent")
    return bad


def feasibility_check(p, nx: int = 80, nz: int = 40) -> FeasibilityReport:
    """Run the checklist; the mesh confirmation only runs if the algebra passes.

    ``p`` may be parameters or an already built surface.
    """
    surface = as_surface(p)
    bad = algebraic_violations(surface.params, surface)
    mesh = None
    if not bad:
        try:
            mesh = build_mesh(surface, nx, nz)
        except MeshError:
            bad.append("mesh_closure")
    return FeasibilityReport(
        watertight=not any(b in WATERTIGHT_CHECKS for b in bad),
        self_intersection_free=not any(b in SELF_INTERSECTION_CHECKS for b in bad),
        violated_checks=tuple(bad),
        mesh=mesh,
    )
