"""Parametric hull surface: half-breadth y(x, z) from the 45 parameters.

Coordinates: x runs forward from the aft end (0) to the bow (loa); z runs up
from the baseline (0) to the deck (depth). The hull is symmetric about y = 0
and only the starboard half-breadth is stored.

The construction is piecewise:

* a midship section (deadrise bottom, chine fillet, straight side to deck);
* a bow taper that scales the midship section by a width factor which falls
  from 1 to 0 between the full-beam station and the leading edge, with the
  entrance slope set by the drift-angle curve;
* a stern taper that morphs the midship section toward the transom section,
  using elliptic or parabolic blending per the stern bits;
* optional bow/stern bulbs (super-ellipsoids) unioned with a fillet.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from ..params import HullParameters

# Upper limit of the drift-driven entrance slope; keeps the cubic width
# factor monotone on [0, 1].
MAX_ENTRANCE_SLOPE = 3.0
# Divisors mapping the +-4 quadratic constants onto taper fractions.
BOW_SCALE = 8.0
DELTA_SCALE = 4.0
_CHINE_CLAMP = 0.98


def _quad_range(a: float, b: float, lo: float = 0.0, hi: float = 1.0) -> tuple[float, float]:
    """Min and max of a*s**2 + b*s on [lo, hi]."""
    pts = [lo, hi]
    if a != 0.0:
        s = -b / (2.0 * a)
        if lo < s < hi:
            pts.append(s)
    vals = [a * s * s + b * s for s in pts]
    return min(vals), max(vals)


class Section:
    """One hull cross-section y(z') with z' measured up from its own keel."""

    def __init__(self, depth, y_chine, y_deck, beta_deg, fillet, rk):
        self.depth = float(depth)
        self.y_chine = float(y_chine)
        self.y_deck = float(y_deck)
        self.beta = math.radians(beta_deg)
        self.fillet = float(fillet)
        self.q = 2.0 ** float(rk)

        self.z_chine_raw = self.y_chine * math.tan(self.beta)
        zc = min(self.z_chine_raw, _CHINE_CLAMP * self.depth)
        self.z_chine = zc

        len_bottom = math.hypot(self.y_chine, zc)
        len_side = math.hypot(self.y_deck - self.y_chine, self.depth - zc)
        fb = min(0.45, self.fillet / len_bottom) if len_bottom > 0 else 0.0
        fs = min(0.45, self.fillet / len_side) if len_side > 0 else 0.0
        if zc > 0.0:
            self.z0 = zc * (1.0 - fb)
            self.y0 = self._bottom(self.z0)
        else:
            self.z0 = 0.0
            self.y0 = self.y_chine * (1.0 - fb)
        self.z2 = zc + fs * (self.depth - zc)
        self.y2 = self._side(self.z2)

    @property
    def single_valued(self) -> bool:
        return 0.0 <= self.z_chine_raw < self.depth

    def _bottom(self, z):
        return self.y_chine * np.power(np.clip(z / self.z_chine, 0.0, 1.0), 1.0 / self.q)

    def _side(self, z):
        return self.y_chine + (self.y_deck - self.y_chine) * (z - self.z_chine) / (
            self.depth - self.z_chine
        )

    def __call__(self, zr):
        zr = np.asarray(zr, dtype=float)
        out = np.zeros_like(zr)
        inside = (zr >= 0.0) & (zr <= self.depth)

        if self.z_chine > 0.0:
            m = inside & (zr < self.z0)
            out[m] = self._bottom(zr[m])

        m = inside & (zr >= self.z0) & (zr <= self.z2)
        if np.any(m):
            z = zr[m]
            a = self.z0 - 2.0 * self.z_chine + self.z2
            b = 2.0 * (self.z_chine - self.z0)
            c = self.z0 - z
            disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
            denom = b + disc
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(denom > 0.0, -2.0 * c / denom, 0.0)
            t = np.clip(t, 0.0, 1.0)
            out[m] = (1 - t) ** 2 * self.y0 + 2 * t * (1 - t) * self.y_chine + t * t * self.y2

        m = inside & (zr > self.z2)
        out[m] = self._side(zr[m])
        return np.maximum(out, 0.0)


def _smooth_union(a, b, k):
    """max(a, b) plus a fillet of size k where both bodies are present."""
    m = np.maximum(a, b)
    if k <= 0.0:
        return m
    hh = np.clip(k - np.abs(a - b), 0.0, None) / k
    return m + 0.25 * k * hh * hh * np.clip(np.minimum(a, b) / k, 0.0, 1.0)


class _Bulb:
    def __init__(self, x_ext, len_out, len_in, direction, z_c, a_lo, a_up, beam, exponent, fillet):
        self.x_ext = x_ext
        self.len_out = len_out
        self.len_in = max(len_in, 1e-9)
        self.direction = direction  # +1 protrudes forward, -1 aft
        self.z_c = z_c
        self.a_lo = max(a_lo, 1e-12)
        self.a_up = max(a_up, 1e-12)
        self.beam = beam
        self.exponent = exponent
        self.fillet = fillet

    @property
    def tip(self) -> float:
        return self.x_ext + self.direction * self.len_out

    def __call__(self, x, z, interval=None):
        s = self.direction * (x - self.x_ext)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(s >= 0.0, s / self.len_out if self.len_out > 0 else np.inf, -s / self.len_in)
        u = np.where(np.isnan(u), 0.0, u)
        g = np.sqrt(np.clip(1.0 - np.abs(u) ** self.exponent, 0.0, None))
        up = self.a_up * g
        lo = self.a_lo * g
        if interval is not None:
            # fair the bulb into the hull profile where the two would not touch
            sel = g > 0
            if np.any(sel):
                zl, zu, has = interval(x[sel])
                overlap = 0.05 * (self.a_lo + self.a_up)
                u_s, l_s = up[sel], lo[sel]
                up[sel] = np.where(has & (zl > self.z_c + u_s), zl - self.z_c + overlap, u_s)
                lo[sel] = np.where(has & (zu < self.z_c - l_s), self.z_c - zu + overlap, l_s)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(z >= self.z_c, (z - self.z_c) / up, (self.z_c - z) / lo)
        v = np.minimum(np.nan_to_num(v, nan=2.0), 2.0)
        return self.beam * g * np.sqrt(np.clip(1.0 - v * v, 0.0, None))


class HullSurface:
    """Evaluates the half-breadth of a parametric hull."""

    def __init__(self, p: HullParameters):
        self.params = p
        L = self.loa = p.loa
        D = self.depth = p.dd * p.loa

        self.midship = Section(D, p.bc * L / 2, p.bd * L / 2, p.beta, p.rc * p.bc * L, p.rk)
        self.z_transom = p.sk * D
        self.transom = Section(
            D - self.z_transom,
            p.bc_trans * L / 2,
            p.bs * p.bd * L / 2,
            p.beta_trans,
            p.rc_trans * p.bc_trans * L,
            p.rk_trans,
        )

        self.x_bow_junction = L * (1.0 - p.lb)
        self.x_stern_junction = L * p.ls

        # bow profile: setback of the leading edge from x = loa
        self._bow_min, self._bow_max = _quad_range(p.bow_a, p.bow_b, p.bk, 1.0)
        self.x_bk = self._leading_edge(p.bk * D)
        self.x_kr = self.x_bow_junction + p.kappa_bow * (self.x_bk - self.x_bow_junction)

        # stern profile: linear transom, min position 0
        span = D - self.z_transom
        self._trans_b = max(0.0, -p.trans_a * span)
        self.x_sk = self._transom_x(self.z_transom)
        self.x_ks = self.x_stern_junction - p.kappa_stern * (self.x_stern_junction - self.x_sk)

        self._dbow_min, self._dbow_max = _quad_range(p.delta_bow_a, p.delta_bow_b)
        self._dstern_min, self._dstern_max = _quad_range(p.delta_stern_a, p.delta_stern_b)

        self._zt = np.linspace(0.0, D, 257)
        self._aft_t = self.aft_extent(self._zt)
        self._fore_t = self.fore_extent(self._zt)

        self.bow_bulb = None
        self.stern_bulb = None
        if p.bit_bb:
            z_c = p.hbb * p.wl * D
            x_ext = float(self.fore_extent(np.array([z_c]))[0])
            self.bow_bulb = _Bulb(
                x_ext,
                min(p.lbb * L, L - x_ext),
                p.lbb * L,
                +1,
                z_c,
                z_c,
                p.wl * D - z_c,
                p.bbb * float(self.midship(np.array([z_c]))[0]),
                2.0 * 2.0**p.lbbm,
                p.rbb * p.lbb * L,
            )
        if p.bit_sb:
            z_top = p.hsboa * p.wl * D
            z_c = p.hsb * z_top
            x_ext = float(self.aft_extent(np.array([z_c]))[0])
            self.stern_bulb = _Bulb(
                x_ext,
                min(p.lsb * L, x_ext),
                p.kappa_sb * p.ls * L,
                -1,
                z_c,
                z_c,
                z_top - z_c,
                p.bsb * float(self.midship(np.array([z_c]))[0]),
                2.0 * 2.0**p.lsbm,
                p.rsb * p.lsb * L,
            )

    def _profile_interval(self, x):
        """Lowest/highest z of the bulb-free profile at each x (sampled)."""
        x = np.asarray(x, dtype=float)
        inside = (self._aft_t <= x[..., None]) & (x[..., None] <= self._fore_t)
        has = inside.any(axis=-1)
        zl = np.where(inside, self._zt, np.inf).min(axis=-1)
        zu = np.where(inside, self._zt, -np.inf).max(axis=-1)
        dz = self._zt[1]
        return np.where(has, zl - dz, 0.0), np.where(has, zu + dz, self.depth), has

    # --- profile curves -----------------------------------------------------

    def _setback(self, zeta):
        p = self.params
        return (p.bow_a * zeta**2 + p.bow_b * zeta - self._bow_min) / BOW_SCALE * p.lb * self.loa

    def _leading_edge(self, z):
        return self.loa - self._setback(np.asarray(z) / self.depth)

    def _transom_x(self, z):
        return self.params.trans_a * (self.depth - np.asarray(z)) + self._trans_b

    def fore_extent(self, z):
        """Forward end of the (bulb-free) hull at height z."""
        z = np.asarray(z, dtype=float)
        zbk = self.params.bk * self.depth
        le = self._leading_edge(z)
        s = np.clip(1.0 - z / zbk, 0.0, 1.0) if zbk > 0 else np.zeros_like(z)
        rise = self.x_kr + (self.x_bk - self.x_kr) * np.sqrt(1.0 - s * s)
        return np.where(z >= zbk, le, rise)

    def aft_extent(self, z):
        """Aft end of the (bulb-free) hull at height z."""
        z = np.asarray(z, dtype=float)
        zsk = self.z_transom
        tr = self._transom_x(z)
        s = np.clip(1.0 - z / zsk, 0.0, 1.0) if zsk > 0 else np.zeros_like(z)
        rise = self.x_ks - (self.x_ks - self.x_sk) * np.sqrt(1.0 - s * s)
        return np.where(z >= zsk, tr, rise)

    def delta_bow(self, zeta):
        p = self.params
        return (p.delta_bow_a * zeta**2 + p.delta_bow_b * zeta - self._dbow_min) / DELTA_SCALE

    def delta_stern(self, zeta):
        p = self.params
        return (p.delta_stern_a * zeta**2 + p.delta_stern_b * zeta - self._dstern_min) / DELTA_SCALE

    def drift_deg(self, zeta):
        p = self.params
        return p.drift_a * zeta**2 + p.drift_b * zeta + p.drift_c

    # --- surface ------------------------------------------------------------

    def half_breadth_array(self, x, z):
        """Vectorised half-breadth; no domain checking."""
        x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
        p = self.params
        zeta = z / self.depth
        mid = self.midship(z)
        fore = self.fore_extent(z)
        aft = self.aft_extent(z)
        out = mid.copy()

        # bow taper
        bow = x >= self.x_bow_junction
        if np.any(bow):
            xb, zb, mb, fb = x[bow], zeta[bow], mid[bow], fore[bow]
            frac = np.clip(self.delta_bow(zb), 0.0, 0.999)
            xmid = self.x_bow_junction + frac * (fb - self.x_bow_junction)
            run = np.maximum(fb - xmid, 1e-12)
            eta = np.clip((xb - xmid) / run, 0.0, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = np.tan(np.radians(np.clip(self.drift_deg(zb), 0.0, 89.0))) * run / mb
            slope = np.clip(np.nan_to_num(slope, nan=0.0, posinf=MAX_ENTRANCE_SLOPE), 0.0, MAX_ENTRANCE_SLOPE)
            w = 2 * eta**3 - 3 * eta**2 + 1 - slope * (eta**3 - eta**2)
            out[bow] = mb * np.clip(w, 0.0, 1.0)

        # stern taper
        stern = (~bow) & (x <= self.x_stern_junction)
        if np.any(stern):
            xs, zs, ms, afs = x[stern], z[stern], mid[stern], aft[stern]
            frac = np.clip(self.delta_stern(zeta[stern]), 0.0, 0.999)
            xmid = self.x_stern_junction - frac * (self.x_stern_junction - afs)
            run = np.maximum(xmid - afs, 1e-12)
            eta = np.clip((xmid - xs) / run, 0.0, 1.0)
            upper = zs >= self.z_transom
            end = np.where(upper, self.transom(zs - self.z_transom), 0.0)
            elliptic = np.where(upper, p.bit_ep_t, p.bit_ep_s).astype(bool)
            w = np.where(elliptic, np.sqrt(np.clip(1.0 - eta**2, 0.0, None)), 1.0 - eta**2)
            out[stern] = end + (ms - end) * w

        out = np.where((x > fore) | (x < aft), 0.0, out)

        for bulb in (self.bow_bulb, self.stern_bulb):
            if bulb is not None:
                out = _smooth_union(out, bulb(x, z, self._profile_interval), bulb.fillet)
        return np.maximum(out, 0.0)

    def half_breadth(self, x: float, z: float) -> float:
        tol = 1e-12 * self.loa
        if not (-tol <= x <= self.loa + tol and -tol <= z <= self.depth + tol):
            raise DomainError(f"(x={x}, z={z}) outside [0, {self.loa}] x [0, {self.depth}]")
        return float(self.half_breadth_array(np.array([x]), np.array([z]))[0])

    # --- extents -----------------------------------------------------------

    def x_bounds(self) -> tuple[float, float]:
        """Longitudinal extent of the whole hull, bulbs included."""
        zs = np.linspace(0.0, self.depth, 513)
        lo = float(np.min(self.aft_extent(zs)))
        hi = float(np.max(self.fore_extent(zs)))
        if self.bow_bulb is not None:
            hi = max(hi, self.bow_bulb.tip)
        if self.stern_bulb is not None:
            lo = min(lo, self.stern_bulb.tip)
        return max(lo, 0.0), min(hi, self.loa)


def as_surface(hull) -> "HullSurface":
    """Accept parameters or anything exposing ``half_breadth_array``."""
    if isinstance(hull, HullParameters):
        return HullSurface(hull)
    return hull


def half_breadth(p: HullParameters, x: float, z: float) -> float:
    """Half-breadth of the hull at (x, z), meters."""
    return HullSurface(p).half_breadth(x, z)
