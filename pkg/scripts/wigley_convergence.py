"""Grid and quadrature convergence of the thin-ship solver on a Wigley hull.

Tabulates Cw over Froude number for a ladder of offset grids and writes a
CSV plus one SVG curve per grid.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from hullforge.geometry import PointGrid
from hullforge.hydro import FluidEnvironment, michell_cw
from hullforge.io import fmt, write_text
from hullforge.svg import line_svg


def wigley(nx, nz, L, B, T):
    x = np.linspace(0.0, L, nx)
    z = np.linspace(-T, 0.0, nz)
    y = 0.5 * B * (1 - (2 * x / L - 1) ** 2)[:, None] * (1 - (z / T) ** 2)[None, :]
    return PointGrid(x, z, y, T, L, L)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=float, default=10.0)
    ap.add_argument("--beam", type=float, default=1.0)
    ap.add_argument("--draft", type=float, default=0.625)
    ap.add_argument("--fn", type=float, nargs="+", default=[0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6])
    ap.add_argument("--grids", nargs="+", default=["25x13", "50x25", "100x50", "200x100"])
    ap.add_argument("--out-dir", type=Path, default=Path("runs/wigley"))
    args = ap.parse_args(argv)

    env = FluidEnvironment()
    shapes = [tuple(int(s) for s in g.split("x")) for g in args.grids]
    table = np.empty((len(args.fn), len(shapes)))
    for j, (nx, nz) in enumerate(shapes):
        g = wigley(nx, nz, args.length, args.beam, args.draft)
        for i, fn in enumerate(args.fn):
            table[i, j] = michell_cw(g, fn * math.sqrt(env.g * args.length), env)

    ref = table[:, -1]
    print("Fn," + ",".join(args.grids) + ",rel_change_last_two")
    lines = ["Fn," + ",".join(f"cw_{g}" for g in args.grids)]
    for i, fn in enumerate(args.fn):
        change = abs(table[i, -1] - table[i, -2]) / ref[i]
        print(f"{fn:.3f}," + ",".join(f"{c:.6e}" for c in table[i]) + f",{change:.2e}")
        lines.append(fmt(fn) + "," + ",".join(fmt(c) for c in table[i]))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_text(args.out_dir / "wigley_cw.csv", "\n".join(lines) + "\n")
    for j, g in enumerate(args.grids):
        write_text(args.out_dir / f"wigley_cw_{g}.svg", line_svg(args.fn, table[:, j], f"Wigley Cw, grid {g}", "Fn", "Cw"))


if __name__ == "__main__":
    main()
