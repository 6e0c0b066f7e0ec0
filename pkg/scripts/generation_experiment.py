"""Reproduce the low-drag generation run on the bundled training set.

Fits the mixture, samples until ``--count`` hulls clear the feasibility,
novelty and resistance screens, then re-checks every accepted hull and
reports how the generated set sits against the training data.
"""

import argparse
import time
from pathlib import Path

from hullforge.geometry import feasibility_check
from hullforge.io import load_dataset
from hullforge.learning import Normalizer, novelty_check
from hullforge.params import validate_params
from hullforge.pipeline import (
    GenerationConfig,
    bundled_training_path,
    in_distribution_report,
    persist_results,
    rescore,
    run_generation,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", type=Path, default=None, help="training CSV (defaults to the bundled set)")
    ap.add_argument("--count", type=int, default=150)
    ap.add_argument("--target-rt", type=float, default=5000.0)
    ap.add_argument("--speed-kts", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--stl", action="store_true")
    ap.add_argument("--out-dir", type=Path, default=Path("runs/generation"))
    args = ap.parse_args(argv)

    train = load_dataset(args.csv or bundled_training_path()).rows
    cfg = GenerationConfig(
        target_resistance_max=args.target_rt, speed_kts=args.speed_kts, count=args.count, seed=args.seed, threads=args.threads
    )
    t0 = time.perf_counter()
    res = run_generation(
        train, cfg, progress=lambda n, acc: print(f"attempts={n} accepted={acc} seconds={time.perf_counter() - t0:.0f}", flush=True)
    )
    persist_results(res, args.out_dir, stl=args.stl, training=train)
    for k, v in res.summary().items():
        print(f"{k}={v}")

    norm = Normalizer.fit(train)
    failures = 0
    for r in res.accepted:
        ok = rescore(r.vector, cfg) == r.rt and r.rt < cfg.target_resistance_max
        ok &= feasibility_check(validate_params(r.vector)).feasible
        ok &= novelty_check(r.vector, train, normalizer=norm)[1]
        failures += not ok
    print(f"recheck_failures={failures}")
    if res.accepted:
        rep = in_distribution_report(train, [r.vector for r in res.accepted], norm, embed=False)
        print(f"in_distribution_fraction={rep.fraction_within:.3f}")


if __name__ == "__main__":
    main()
