"""Build the bundled desk-scale training CSV.

Uniform draws from the range table (beam and depth restricted to a slender
sub-box) are kept only if they pass the full feasibility check.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from hullforge.geometry import algebraic_violations, feasibility_check
from hullforge.io import write_hull_csv
from hullforge.params import uniform_vector, validate_params

SLENDER = {"bd": (0.0833, 0.17), "dd": (0.05, 0.11)}
DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "hullforge" / "data" / "synthetic_train.csv"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--full-box", action="store_true", help="use the full Bd/Dd ranges")
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    bounds = None if args.full_box else SLENDER
    rows, draws = [], 0
    t0 = time.time()
    while len(rows) < args.rows:
        v = uniform_vector(rng, 10.0, bounds)
        draws += 1
        p = validate_params(v)
        if algebraic_violations(p):
            continue
        if feasibility_check(p).feasible:
            rows.append(v)
    write_hull_csv(args.out, rows)
    print(f"rows={len(rows)} draws={draws} seconds={time.time() - t0:.1f} out={args.out}")


if __name__ == "__main__":
    main()
