"""Command-line entry point: ``hullforge <subcommand> ...``.

Exit codes: 0 success, 1 domain error (``error=<Kind>: <detail>`` on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .errors import HullforgeError, IoError, ParseError
from .geometry import build_mesh, feasibility_check, write_stl
from .geometry.grid import PointGrid
from .hydro import DragTable, FluidEnvironment, build_drag_table, calc_drag, ittc_cf, knots, michell_cw
from .io import fmt, load_dataset, write_hull_csv, write_text
from .learning import GmmModel, Normalizer, cluster_report, fit_gmm, sample_hulls, select_k, tsne_embed
from .pipeline import GenerationConfig, bundled_training_path, in_distribution_report, persist_results, run_generation
from .svg import bar_svg, line_svg, scatter_svg

SEED_ENV = "HULLFORGE_SEED"


class UsageError(Exception):
    pass


def _out(**kv):
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _outdir(args) -> Path:
    p = Path(args.out_dir)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"{p}: {exc.strerror or exc}") from exc
    return p


def _training(args):
    return load_dataset(args.csv if getattr(args, "csv", None) else bundled_training_path())


def _row(ds, i):
    if not 0 <= i < len(ds):
        raise UsageError(f"--row {i} outside 0..{len(ds) - 1}")
    return ds.params[i]


# --- subcommands -----------------------------------------------------------


def cmd_validate(args):
    ds = load_dataset(args.csv)
    verdicts = [(ln, "valid", "") for ln in ds.lines] + [(ln, "invalid", why) for ln, why in ds.excluded]
    infeasible = 0
    feas = {}
    if args.feasibility:
        for ln, p in zip(ds.lines, ds.params):
            rep = feasibility_check(p)
            feas[ln] = rep
            infeasible += not rep.feasible
    for ln, verdict, why in sorted(verdicts):
        extra = ""
        if ln in feas:
            rep = feas[ln]
            extra = f" feasible={int(rep.feasible)}" + (f" checks={','.join(rep.violated_checks)}" if rep.violated_checks else "")
        reason = f' reason="{why}"' if why else ""
        print(f"line={ln} verdict={verdict}{extra}{reason}")
    kv = {"valid": len(ds), "invalid": len(ds.excluded)}
    if args.feasibility:
        kv["infeasible"] = infeasible
    _out(**kv)


def cmd_mesh(args):
    ds = _training(args)
    p = _row(ds, args.row)
    mesh = build_mesh(p, args.nx, args.nz)
    path = write_stl(mesh, _outdir(args) / f"hull_{args.row:04d}.stl")
    _out(
        stl=path,
        triangles=len(mesh.triangles),
        closed=int(mesh.is_closed_manifold()),
        euler=mesh.euler_characteristic(),
        volume=fmt(mesh.signed_volume()),
    )


def cmd_cluster(args):
    if args.k_max < 3:
        raise UsageError("--k-max must be >= 3")
    ds = _training(args)
    U = Normalizer.fit(ds.rows).apply(ds.rows)
    rep = cluster_report(U, args.k_max, seed=_seed(args))
    out = _outdir(args)
    e = rep.elbow
    write_text(out / "elbow.svg", line_svg(e.ks, e.wcss, "Elbow: WCSS by k", "k", "WCSS", mark=e.suggested_k))
    ks = sorted(rep.silhouette)
    write_text(
        out / "silhouette.svg",
        bar_svg(ks, [rep.silhouette[k] for k in ks], "Mean silhouette by k", "k", "silhouette", mark=rep.silhouette_k),
    )
    lines = [f"rows={len(ds)}", f"elbow_k={e.suggested_k}", f"elbow_low_confidence={int(e.low_confidence)}"]
    lines += [f"wcss_k{k}={fmt(w)}" for k, w in zip(e.ks, e.wcss)]
    lines += [f"silhouette_k{k}={fmt(rep.silhouette[k])}" for k in ks]
    lines.append(f"silhouette_k={rep.silhouette_k}")
    write_text(out / "cluster_report.txt", "\n".join(lines) + "\n")
    _out(elbow_k=e.suggested_k, silhouette_k=rep.silhouette_k)


def cmd_embed(args):
    ds = _training(args)
    U = Normalizer.fit(ds.rows).apply(ds.rows)
    res = tsne_embed(U, perplexity=args.perplexity, iters=args.iters, seed=_seed(args))
    out = _outdir(args)
    path = res.write_csv(out / "embedding.csv")
    write_text(out / "tsne.svg", scatter_svg(res.coords, None, ["hulls"], "t-SNE of hull parameters"))
    _out(rows=len(U), final_kl=fmt(res.final_kl), csv=path)


def cmd_fit(args):
    ds = _training(args)
    seed = _seed(args)
    if args.components:
        model = fit_gmm(ds.rows, args.components, seed=seed)
    else:
        model = select_k(ds.rows, seed=seed)[0]
    path = model.save(_outdir(args) / args.model_name)
    _out(k=model.k, train_loglik=fmt(model.train_loglik), model=path)


def cmd_sample(args):
    model = GmmModel.load(args.model)
    rows, draws = sample_hulls(model, args.n, seed=_seed(args))
    path = write_hull_csv(_outdir(args) / args.samples_name, rows)
    _out(samples=len(rows), draws=int(draws.sum()), csv=path)


def _grid_from_json(path) -> PointGrid:
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    try:
        x = np.array(d["x"], dtype=float)
        z = np.array(d["z"], dtype=float)
        y = np.array(d["y"], dtype=float).reshape(len(x), len(z))
        return PointGrid(x, z, y, float(d["draft"]), float(d["lwl"]), float(d["loa"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(0, f"bad grid document: {exc}") from exc


def _grid_wetted_area(g: PointGrid) -> float:
    """Both sides of the centreplane where offsets are positive."""
    yx = np.gradient(g.y, g.x, axis=0)
    yz = np.gradient(g.y, g.z, axis=1)
    dens = np.where(g.y > 0, np.sqrt(1 + yx**2 + yz**2), 0.0)
    return 2.0 * float(np.trapezoid(np.trapezoid(dens, g.z, axis=1), g.x))


def cmd_drag(args):
    env = FluidEnvironment(rho=args.rho)
    speed = knots(args.speed_kts)
    if args.grid:
        g = _grid_from_json(args.grid)
        cw = michell_cw(g, speed, env)
        q = 0.5 * env.rho * speed**2
        rw = q * g.loa**2 * cw
        rf = q * _grid_wetted_area(g) * ittc_cf(speed * g.lwl / env.nu)
        fn = speed / np.sqrt(env.g * g.lwl)
        _out(Rt=fmt(rw + rf), Rw=fmt(rw), Rf=fmt(rf), Fn=fmt(fn))
        return
    ds = _training(args)
    p = _row(ds, args.row)
    table = DragTable.load(args.table) if args.table else build_drag_table(p, env)
    if args.save_table:
        table.save(args.save_table)
    r = calc_drag(p, table, speed, args.draft_frac * p.depth, env)
    _out(Rt=fmt(r.rt), Rw=fmt(r.rw), Rf=fmt(r.rf), Fn=fmt(r.fn))


def cmd_generate(args):
    ds = _training(args)
    cfg = GenerationConfig(
        target_resistance_max=args.target_rt,
        speed_kts=args.speed_kts,
        rho=args.rho,
        draft_fraction=args.draft_frac,
        draft_m=args.draft_m,
        count=args.count,
        seed=_seed(args),
        max_attempts=args.max_attempts,
        components=args.components,
        threads=args.threads,
        rank_by_rt=args.rank_by_rt,
    )
    model = GmmModel.load(args.model) if args.model else None
    t0 = time.perf_counter()

    def progress(n, acc):
        _log(args, f"attempts={n} accepted={acc} seconds={time.perf_counter() - t0:.1f}")

    res = run_generation(ds, cfg, model=model, progress=progress)
    out = _outdir(args)
    persist_results(res, out, stl=args.stl, training=ds if not args.no_svg else None, svg=not args.no_svg)
    if res.error is not None:
        raise res.error
    _out(accepted=len(res.accepted), attempts=len(res.records), seconds=f"{res.wall_seconds:.1f}")


def cmd_report(args):
    train = load_dataset(args.csv) if args.csv else load_dataset(bundled_training_path())
    gen = load_dataset(args.generated)
    norm = Normalizer.fit(train.rows)
    rep = in_distribution_report(train.rows, gen.rows, norm, seed=_seed(args), iters=args.iters)
    path = write_text(
        _outdir(args) / "overlay.svg",
        scatter_svg(rep.coords, rep.labels, ["training", "generated"], "t-SNE: training vs generated"),
    )
    _out(in_distribution_fraction=fmt(rep.fraction_within), threshold=fmt(rep.threshold), svg=path)


# --- parser --------------------------------------------------------------------


def _common(sub: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = argparse.SUPPRESS if sub else None
    p.add_argument("--seed", type=int, default=d, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--threads", type=int, default=d if sub else 1, help="worker threads, 0 = auto")
    p.add_argument("--quiet", action="store_true", default=d if sub else False)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hullforge", description="Parametric hull generation and resistance screening.", parents=[_common(False)])
    sp = ap.add_subparsers(dest="command", required=True)
    common = [_common(True)]

    def add(name, fn, help_, csv=True):
        p = sp.add_parser(name, help=help_, parents=common)
        p.set_defaults(func=fn)
        if csv:
            p.add_argument("--csv", help="hull CSV (default: bundled synthetic set)")
        p.add_argument("--out-dir", default="out")
        return p

    p = sp.add_parser("validate", help="check a hull CSV against the range table", parents=common)
    p.set_defaults(func=cmd_validate)
    p.add_argument("csv")
    p.add_argument("--feasibility", action="store_true", help="also run the geometric checks")

    p = add("mesh", cmd_mesh, "export one hull as binary STL")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--nx", type=int, default=80)
    p.add_argument("--nz", type=int, default=40)

    p = add("cluster", cmd_cluster, "k-means elbow and silhouette scan")
    p.add_argument("--k-max", type=int, default=10)

    p = add("embed", cmd_embed, "2-d t-SNE embedding")
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)

    p = add("fit", cmd_fit, "fit a Gaussian mixture")
    p.add_argument("--components", type=int, default=None, help="default: pick by BIC")
    p.add_argument("--model-name", default="model.json")

    p = add("sample", cmd_sample, "draw in-range hulls from a fitted mixture", csv=False)
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--samples-name", default="samples.csv")

    p = add("drag", cmd_drag, "resistance of one hull")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--grid", help="point-grid JSON (x, z, y, draft, lwl, loa) instead of a CSV row")
    p.add_argument("--speed-kts", type=float, default=10.0)
    p.add_argument("--draft-frac", type=float, default=0.6)
    p.add_argument("--rho", type=float, default=1025.0)
    p.add_argument("--table", help="reuse a saved drag table")
    p.add_argument("--save-table", help="write the drag table here")

    p = add("generate", cmd_generate, "sample, screen and score hulls")
    p.add_argument("--target-rt", type=float, default=5000.0)
    p.add_argument("--speed-kts", type=float, default=10.0)
    p.add_argument("--rho", type=float, default=1025.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--draft-frac", type=float, default=0.6)
    g.add_argument("--draft-m", type=float, default=None)
    p.add_argument("--count", type=int, default=150)
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--model", help="use a saved mixture instead of fitting")
    p.add_argument("--rank-by-rt", action="store_true")
    p.add_argument("--stl", action="store_true", help="also export accepted hulls")
    p.add_argument("--no-svg", action="store_true")

    p = add("report", cmd_report, "training vs generated overlay")
    p.add_argument("--generated", required=True)
    p.add_argument("--iters", type=int, default=1000)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hullforge: error: {exc}", file=sys.stderr)
        return 2
    except HullforgeError as exc:
        print(f"error={exc.kind}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error=IoError: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
