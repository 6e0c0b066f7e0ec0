"""Closed triangle meshes of the full (port + starboard) hull and STL I/O."""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IoError, MeshError
from .grid import POSITIVE
from .surface import as_surface

STL_HEADER = b"hullforge"
APEX = 1e-5  # section widths below this fraction of loa collapse to the centreline


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray  # (V, 3)
    triangles: np.ndarray  # (F, 3) int
    provenance: str = ""

    def edge_counts(self) -> Counter:
        t = self.triangles
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        edges.sort(axis=1)
        return Counter(map(tuple, edges.tolist()))

    def is_closed_manifold(self) -> bool:
        return all(c == 2 for c in self.edge_counts().values())

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edge_counts()) + len(self.triangles)

    def signed_volume(self) -> float:
        v = self.vertices[self.triangles]
        return float(np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0)

    def area(self) -> float:
        v = self.vertices[self.triangles]
        return float(0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1).sum())

    def area_below(self, z_cut: float) -> float:
        """Surface area of the part of the mesh strictly below ``z = z_cut``."""
        return float(_clipped_areas(self.vertices[self.triangles], z_cut).sum())


def _tri_area(a, b, c):
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1)


def _clipped_areas(tris: np.ndarray, z_cut: float) -> np.ndarray:
    """Per-triangle area below the plane, (F, 3, 3) -> (F,)."""
    d = tris[:, :, 2] - z_cut
    below = d < 0
    nb = below.sum(axis=1)
    out = np.where(nb == 3, _tri_area(tris[:, 0], tris[:, 1], tris[:, 2]), 0.0)
    for count in (1, 2):
        sel = nb == count
        if not np.any(sel):
            continue
        t, dd, bl = tris[sel], d[sel], below[sel]
        # rotate so the odd vertex (the lone below / lone above one) is first
        odd = np.argmax(bl if count == 1 else ~bl, axis=1)
        idx = (odd[:, None] + np.arange(3)[None, :]) % 3
        t = np.take_along_axis(t, idx[:, :, None], axis=1)
        dd = np.take_along_axis(dd, idx, axis=1)
        a, b, c = t[:, 0], t[:, 1], t[:, 2]
        pab = a + (b - a) * (dd[:, 0] / (dd[:, 0] - dd[:, 1]))[:, None]
        pac = a + (c - a) * (dd[:, 0] / (dd[:, 0] - dd[:, 2]))[:, None]
        corner = _tri_area(a, pab, pac)
        out[sel] = corner if count == 1 else _tri_area(a, b, c) - corner
    return out


# --- sections --------------------------------------------------------------


def section_intervals(surface, xs, n: int = 257):
    """Vertical extent [z_lo, z_hi] of each station.

    Returns (z_lo, z_hi, runs) where ``runs`` counts the separate wetted
    intervals found at each station; the hull is only meshable where every
    non-empty station has exactly one.
    """
    xs = np.asarray(xs, dtype=float)
    zs = np.linspace(0.0, surface.depth, n)
    tol_h = POSITIVE * surface.loa
    pos = surface.half_breadth_array(xs[:, None], zs[None, :]) > tol_h
    starts = pos[:, 1:] & ~pos[:, :-1]
    runs = starts.sum(axis=1) + pos[:, 0]
    has = pos.any(axis=1)
    first = np.argmax(pos, axis=1)
    last = n - 1 - np.argmax(pos[:, ::-1], axis=1)

    def refine(inside, outside, x):
        a, b = inside.copy(), outside.copy()
        for _ in range(50):
            m = 0.5 * (a + b)
            ok = surface.half_breadth_array(x, m) > tol_h
            a = np.where(ok, m, a)
            b = np.where(ok, b, m)
        return a

    z_lo = zs[first].copy()
    z_hi = zs[last].copy()
    sel = has & (first > 0)
    if np.any(sel):
        z_lo[sel] = refine(zs[first[sel]], zs[first[sel] - 1], xs[sel])
    sel = has & (last < n - 1)
    if np.any(sel):
        z_hi[sel] = refine(zs[last[sel]], zs[last[sel] + 1], xs[sel])
    z_lo[~has] = np.nan
    z_hi[~has] = np.nan
    return z_lo, z_hi, runs


def _stations(surface, nx):
    x0, x1 = surface.x_bounds()
    t = np.linspace(0.002, 0.998, nx)
    return x0 + (x1 - x0) * 0.5 * (1.0 - np.cos(np.pi * t))


def _zipper(a, b):
    """Triangulate the band between two closed rings with aligned starts."""
    na, nb = len(a), len(b)
    tris = []
    i = j = 0
    while i < na or j < nb:
        if j == nb or (i < na and (i + 1) / na <= (j + 1) / nb):
            tris.append((a[i], a[(i + 1) % na], b[j % nb]))
            i += 1
        else:
            tris.append((a[i % na], b[(j + 1) % nb], b[j]))
            j += 1
    return tris


def _cap(ring):
    """Triangulate a section polygon level by level."""
    s, p, bot, top = ring["s"], ring["p"], ring["bot"], ring["top"]
    tris = []
    if bot is not None:
        tris.append((bot, p[0], s[0]))
    for k in range(len(s) - 1):
        tris.append((s[k], p[k], p[k + 1]))
        tris.append((s[k], p[k + 1], s[k + 1]))
    if top is not None:
        tris.append((s[-1], p[-1], top))
    return tris


def build_mesh(hull, nx: int = 80, nz: int = 40) -> TriMesh:
    """Closed, outward-wound triangle mesh of the hull up to the deck."""
    if nx < 3 or nz < 3:
        raise ValueError("build_mesh needs nx >= 3 and nz >= 3")
    surface = as_surface(hull)
    provenance = surface.params.digest() if hasattr(surface, "params") else ""
    xs = _stations(surface, nx)
    z_lo, z_hi, runs = section_intervals(surface, xs)
    keep = ~np.isnan(z_lo) & (z_hi > z_lo)
    if np.any(runs[keep] > 1):
        bad = xs[keep][runs[keep] > 1]
        raise MeshError(f"section split into several pieces at x={bad[0]:.4g}")
    xs, z_lo, z_hi = xs[keep], z_lo[keep], z_hi[keep]
    if len(xs) < 2:
        raise MeshError("hull has fewer than two non-empty stations")

    frac = np.linspace(0.0, 1.0, nz)
    zz = z_lo[:, None] + (z_hi - z_lo)[:, None] * frac[None, :]
    hh = surface.half_breadth_array(np.broadcast_to(xs[:, None], zz.shape), zz)
    apex_tol = APEX * surface.loa
    gap_tol = POSITIVE * surface.loa

    verts = []
    rings = []
    for i, x in enumerate(xs):
        h = hh[i]
        bot = h[0] < apex_tol
        top = h[-1] < apex_tol
        js = list(range(1 if bot else 0, nz - 1 if top else nz))
        if np.any(h[js] <= gap_tol):
            raise MeshError(f"pinched section at x={x:.4g}")
        ring = {"bot": None, "top": None, "s": [], "p": []}
        if bot:
            ring["bot"] = len(verts)
            verts.append((x, 0.0, zz[i, 0]))
        for j in js:
            ring["s"].append(len(verts))
            verts.append((x, h[j], zz[i, j]))
        if top:
            ring["top"] = len(verts)
            verts.append((x, 0.0, zz[i, -1]))
        for j in js:
            ring["p"].append(len(verts))
            verts.append((x, -h[j], zz[i, j]))
        cyc = ([ring["bot"]] if bot else []) + ring["s"]
        cyc += ([ring["top"]] if top else []) + ring["p"][::-1]
        ring["cycle"] = cyc
        rings.append(ring)

    tris = []
    for a, b in zip(rings[:-1], rings[1:]):
        tris.extend(_zipper(a["cycle"], b["cycle"]))
    strip_edges = {(t[k], t[(k + 1) % 3]) for t in tris for k in range(3)}

    for ring in (rings[0], rings[-1]):
        cap = _cap(ring)
        cap_edges = {(t[k], t[(k + 1) % 3]) for t in cap for k in range(3)}
        if cap_edges & strip_edges:
            cap = [(t[0], t[2], t[1]) for t in cap]
        tris.extend(cap)

    mesh = TriMesh(np.array(verts, dtype=float), np.array(tris, dtype=np.int64), provenance)
    if mesh.signed_volume() < 0:
        mesh = TriMesh(mesh.vertices, mesh.triangles[:, ::-1].copy(), provenance)
    if not mesh.is_closed_manifold():
        raise MeshError("triangulation produced a non-manifold edge")
    return mesh


# --- STL -------------------------------------------------------------------


def _normals(v: np.ndarray) -> np.ndarray:
    n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)


def stl_bytes(mesh: TriMesh) -> bytes:
    v = mesh.vertices[mesh.triangles]
    records = np.zeros(len(v), dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    records["n"] = _normals(v)
    records["v"] = v
    header = STL_HEADER.ljust(80, b"\0")
    return header + struct.pack("<I", len(v)) + records.tobytes()


def write_stl(mesh: TriMesh, path) -> Path:
    path = Path(path)
    try:
        path.write_bytes(stl_bytes(mesh))
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    return path


def read_stl(path_or_bytes) -> TriMesh:
    """Read a binary STL and weld identical vertices."""
    data = path_or_bytes if isinstance(path_or_bytes, bytes) else Path(path_or_bytes).read_bytes()
    (count,) = struct.unpack_from("<I", data, 80)
    records = np.frombuffer(
        data, dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")], count=count, offset=84
    )
    corners = records["v"].reshape(-1, 3)
    uniq, inverse = np.unique(corners, axis=0, return_inverse=True)
    return TriMesh(uniq.astype(float), inverse.reshape(-1, 3).astype(np.int64))
