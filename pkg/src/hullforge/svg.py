"""Minimal static SVG 1.1 plots: line, bar and scatter."""

from __future__ import annotations

from html import escape

import numpy as np

W, H = 640, 420
PAD_L, PAD_R, PAD_T, PAD_B = 70, 20, 40, 55
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi <= ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def x(self, v):
        return PAD_L + (v - self.xlo) / (self.xhi - self.xlo) * (W - PAD_L - PAD_R)

    def y(self, v):
        return H - PAD_B - (v - self.ylo) / (self.yhi - self.ylo) * (H - PAD_T - PAD_B)


def _doc(body: list[str], title: str, xlabel: str = "", ylabel: str = "") -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<line x1="{PAD_L}" y1="{H - PAD_B}" x2="{W - PAD_R}" y2="{H - PAD_B}" stroke="black"/>',
        f'<line x1="{PAD_L}" y1="{PAD_T}" x2="{PAD_L}" y2="{H - PAD_B}" stroke="black"/>',
    ]
    if xlabel:
        head.append(
            f'<text x="{(PAD_L + W - PAD_R) / 2}" y="{H - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>'
        )
    if ylabel:
        cy = (PAD_T + H - PAD_B) / 2
        head.append(
            f'<text x="16" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {cy})">{escape(ylabel)}</text>'
        )
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _ticks(fr: _Frame, xs=None, n=5) -> list[str]:
    out = []
    for v in np.linspace(fr.ylo, fr.yhi, n):
        y = _f(fr.y(v))
        out.append(f'<text x="{PAD_L - 6}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="10">{v:.3g}</text>')
    for v in xs if xs is not None else np.linspace(fr.xlo, fr.xhi, n):
        x = _f(fr.x(v))
        out.append(
            f'<text x="{x}" y="{H - PAD_B + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{v:.3g}</text>'
        )
    return out


def line_svg(xs, ys, title: str, xlabel: str = "", ylabel: str = "", mark=None) -> str:
    """Polyline with point markers; ``mark`` highlights one x value."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fr = _Frame(xs.min(), xs.max(), min(0.0, ys.min()), ys.max())
    pts = " ".join(f"{_f(fr.x(a))},{_f(fr.y(b))}" for a, b in zip(xs, ys))
    body = _ticks(fr, xs) + [f'<polyline points="{pts}" fill="none" stroke="{PALETTE[0]}" stroke-width="2"/>']
    for a, b in zip(xs, ys):
        hit = mark is not None and a == mark
        body.append(
            f'<circle cx="{_f(fr.x(a))}" cy="{_f(fr.y(b))}" r="{5 if hit else 3}" fill="{PALETTE[1] if hit else PALETTE[0]}"/>'
        )
    return _doc(body, title, xlabel, ylabel)


def bar_svg(labels, values, title: str, xlabel: str = "", ylabel: str = "", mark=None) -> str:
    values = np.asarray(values, dtype=float)
    n = len(values)
    fr = _Frame(-0.5, n - 0.5, min(0.0, values.min()), max(values.max(), 0.0))
    bw = 0.7 * (W - PAD_L - PAD_R) / max(n, 1)
    body = _ticks(fr, xs=[])
    for i, (lab, v) in enumerate(zip(labels, values)):
        x = fr.x(i) - bw / 2
        y0, y1 = fr.y(max(v, 0.0)), fr.y(min(v, 0.0))
        color = PALETTE[1] if mark is not None and lab == mark else PALETTE[0]
        body.append(f'<rect x="{_f(x)}" y="{_f(y0)}" width="{_f(bw)}" height="{_f(y1 - y0)}" fill="{color}"/>')
        body.append(
            f'<text x="{_f(fr.x(i))}" y="{H - PAD_B + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="10">{escape(str(lab))}</text>'
        )
    return _doc(body, title, xlabel, ylabel)


def scatter_svg(coords, labels=None, names=None, title: str = "") -> str:
    """2-d scatter, one colour per label, with a legend."""
    P = np.asarray(coords, dtype=float)
    labels = np.zeros(len(P), int) if labels is None else np.asarray(labels)
    groups = sorted(set(labels.tolist()))
    fr = _Frame(P[:, 0].min(), P[:, 0].max(), P[:, 1].min(), P[:, 1].max())
    body = []
    for gi, g in enumerate(groups):
        color = PALETTE[gi % len(PALETTE)]
        for a, b in P[labels == g]:
            body.append(f'<circle cx="{_f(fr.x(a))}" cy="{_f(fr.y(b))}" r="2.5" fill="{color}" fill-opacity="0.7"/>')
        name = names[gi] if names is not None and gi < len(names) else str(g)
        ly = PAD_T + 14 * gi
        body.append(f'<circle cx="{W - PAD_R - 110}" cy="{ly}" r="4" fill="{color}"/>')
        body.append(
            f'<text x="{W - PAD_R - 100}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(name)}</text>'
        )
    return _doc(body, title, "dim 1", "dim 2")
