"""Sample, screen and score hulls against a resistance budget."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import BudgetExhausted, DomainError, EmptyDataError, HullforgeError
from .geometry import feasibility_check, write_stl
from .geometry.surface import HullSurface
from .hydro import FluidEnvironment, build_drag_table, calc_drag, knots
from .io import Dataset, fmt, hull_csv_text, load_dataset, write_text
from .learning.gmm import GmmModel, fit_gmm, hull_row_ok, sample_normalized, select_k
from .learning.normalize import Normalizer
from .learning.tsne import tsne_embed
from .params import COLUMNS, HullParameters, snap_flags, validate_params

RESULT_COLUMNS = ("Rt_N", "Rw_N", "Rf_N", "Fn", "novelty_dist")
REASONS = ("accepted", "range", "feasibility", "novelty", "resistance", "solver")
BATCH = 64


def bundled_training_path() -> Path:
    return Path(str(resources.files("hullforge") / "data" / "synthetic_train.csv"))


@dataclass(frozen=True)
class GenerationConfig:
    target_resistance_max: float = 5000.0  # N
    speed_kts: float = 10.0
    rho: float = 1025.0
    draft_fraction: float | None = 0.6  # of depth
    draft_m: float | None = None  # absolute rule; wins over the fraction when set
    count: int = 150
    seed: int = 0
    max_attempts: int | None = None  # default 200 * count
    novelty_epsilon: float = 1e-6
    components: int | None = None  # None: pick by BIC
    threads: int = 1
    rank_by_rt: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise DomainError("count must be >= 1")
        if not self.speed_kts > 0:
            raise DomainError("speed must be positive")
        if self.budget < self.count:
            raise DomainError("max_attempts must be >= count")
        if self.draft_m is None and not (self.draft_fraction and 0 < self.draft_fraction <= 1):
            raise DomainError("draft fraction must lie in (0, 1]")
        if self.draft_m is not None and not self.draft_m > 0:
            raise DomainError("draft must be positive")

    @property
    def budget(self) -> int:
        return self.max_attempts if self.max_attempts is not None else 200 * self.count

    @property
    def speed(self) -> float:
        return knots(self.speed_kts)

    def draft_for(self, p: HullParameters) -> float:
        return self.draft_m if self.draft_m is not None else self.draft_fraction * p.depth


@dataclass(frozen=True)
class GenerationRecord:
    attempt_index: int
    vector: np.ndarray  # raw 45-vector as drawn (flags snapped)
    reason: str  # one of REASONS
    detail: str = ""
    feasible: bool = False
    novelty_distance: float = math.nan
    rt: float = math.nan
    rw: float = math.nan
    rf: float = math.nan
    fn: float = math.nan

    @property
    def accepted(self) -> bool:
        return self.reason == "accepted"

    @property
    def params(self) -> HullParameters:
        return validate_params(self.vector)


@dataclass
class GenerationResult:
    records: list[GenerationRecord]
    config: GenerationConfig
    model: GmmModel
    wall_seconds: float
    error: BudgetExhausted | None = None

    @property
    def accepted(self) -> list[GenerationRecord]:
        return [r for r in self.records if r.accepted]

    def counts(self) -> dict:
        c = {k: 0 for k in REASONS}
        for r in self.records:
            c[r.reason] += 1
        return c

    def summary(self) -> dict:
        c = self.counts()
        n = len(self.records)
        out = {
            "accepted": c["accepted"],
            "attempts": n,
            "rejected_range": c["range"],
            "rejected_feasibility": c["feasibility"],
            "rejected_novelty": c["novelty"],
            "rejected_resistance": c["resistance"],
            "rejected_solver": c["solver"],
            "acceptance_rate": c["accepted"] / n if n else 0.0,
            "components": self.model.k,
            "seed": self.config.seed,
            "wall_seconds": round(self.wall_seconds, 3),
            "status": "ok" if self.error is None else f"BudgetExhausted({self.error.accepted_so_far})",
        }
        return out


# --- candidate evaluation -------------------------------------------------------


class _Scorer:
    """Evaluates one candidate; pure apart from the drag-table memo."""

    def __init__(self, cfg: GenerationConfig, train_u: np.ndarray, normalizer: Normalizer):
        self.cfg = cfg
        self.train_u = train_u
        self.normalizer = normalizer
        self.env = FluidEnvironment(rho=cfg.rho)
        self.tables = {}

    def __call__(self, item) -> GenerationRecord:
        idx, v = item
        if not hull_row_ok(v):
            return GenerationRecord(idx, v, "range", "outside range table")
        p = validate_params(v)
        surface = HullSurface(p)
        feas = feasibility_check(surface)
        if not feas.feasible:
            return GenerationRecord(idx, v, "feasibility", ";".join(feas.violated_checks))
        u = self.normalizer.apply(v)
        dist = float(np.sqrt(((self.train_u - u) ** 2).sum(1)).min())
        if not dist > self.cfg.novelty_epsilon:
            return GenerationRecord(idx, v, "novelty", "duplicate of a training row", True, dist)
        try:
            key = p.digest()
            table = self.tables.get(key)
            if table is None:
                table = self.tables[key] = build_drag_table(surface, self.env)
            d = calc_drag(surface, table, self.cfg.speed, self.cfg.draft_for(p), self.env, mesh=feas.mesh)
        except HullforgeError as exc:
            return GenerationRecord(idx, v, "solver", f"{exc.kind}: {exc}", True, dist)
        reason = "accepted" if d.rt < self.cfg.target_resistance_max else "resistance"
        return GenerationRecord(idx, v, reason, "", True, dist, d.rt, d.rw, d.rf, d.fn)


def rescore(vector, cfg: GenerationConfig) -> float:
    """Total resistance of one hull recomputed from scratch."""
    p = validate_params(vector)
    env = FluidEnvironment(rho=cfg.rho)
    table = build_drag_table(p, env)
    return calc_drag(p, table, cfg.speed, cfg.draft_for(p), env).rt


def _draw_batch(model: GmmModel, seed: int, batch: int, start: int) -> list[tuple[int, np.ndarray]]:
    rng = np.random.default_rng([seed, batch])
    U, _ = sample_normalized(model, BATCH, rng)
    X = model.normalizer.invert(U)
    return [(start + i, snap_flags(x)) for i, x in enumerate(X)]


def fit_model(training: np.ndarray, cfg: GenerationConfig) -> GmmModel:
    if cfg.components:
        return fit_gmm(training, cfg.components, seed=cfg.seed)
    return select_k(training, seed=cfg.seed)[0]


def run_generation(training, cfg: GenerationConfig, model: GmmModel | None = None, progress=None) -> GenerationResult:
    """Draw candidates until ``cfg.count`` are accepted or the budget runs out.

    Candidates are scored in parallel batches but committed strictly in draw
    order, so the record stream depends only on the seed.
    """
    t0 = time.perf_counter()
    X = training.rows if isinstance(training, Dataset) else np.asarray(training, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise EmptyDataError("training data is empty")
    model = model or fit_model(X, cfg)
    scorer = _Scorer(cfg, model.normalizer.apply(X), model.normalizer)
    threads = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)

    records: list[GenerationRecord] = []
    n_acc = 0
    batch = 0
    goal = math.inf if cfg.rank_by_rt else cfg.count
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while n_acc < goal and len(records) < cfg.budget:
            items = _draw_batch(model, cfg.seed, batch, batch * BATCH)
            items = items[: cfg.budget - len(records)]
            batch += 1
            for rec in pool.map(scorer, items):
                # accepted rows must also be distinct from each other
                if rec.accepted and any(np.array_equal(rec.vector, r.vector) for r in records if r.accepted):
                    rec = GenerationRecord(rec.attempt_index, rec.vector, "novelty", "duplicate of an accepted row", True, 0.0)
                records.append(rec)
                n_acc += rec.accepted
                if n_acc >= goal:
                    break
            if progress:
                progress(len(records), n_acc)

    if cfg.rank_by_rt:
        records = _rank(records, cfg.count)
        n_acc = sum(r.accepted for r in records)
    err = None if n_acc >= cfg.count else BudgetExhausted(n_acc, len(records))
    return GenerationResult(records, cfg, model, time.perf_counter() - t0, err)


def _rank(records, count):
    acc = sorted((r for r in records if r.accepted), key=lambda r: (r.rt, r.attempt_index))
    keep = {r.attempt_index for r in acc[:count]}
    out = []
    for r in records:
        if r.accepted and r.attempt_index not in keep:
            r = GenerationRecord(r.attempt_index, r.vector, "resistance", "ranked out", True, r.novelty_distance, r.rt, r.rw, r.rf, r.fn)
        out.append(r)
    return out


# --- distribution check -------------------------------------------------------


@dataclass(frozen=True)
class DistributionReport:
    fraction_within: float
    threshold: float  # training 95th-percentile nearest-neighbour distance
    nn_generated: np.ndarray
    coords: np.ndarray | None = None
    labels: np.ndarray | None = None  # 0 train, 1 generated
    final_kl: float = math.nan


def _nn(A, B, exclude_self=False):
    d = (A * A).sum(1)[:, None] - 2.0 * A @ B.T + (B * B).sum(1)[None, :]
    d = np.maximum(d, 0.0)
    if exclude_self:
        np.fill_diagonal(d, np.inf)
    return np.sqrt(d.min(1))


def in_distribution_report(
    training, generated, normalizer: Normalizer | None = None, seed: int = 0, embed: bool = True, iters: int = 1000
) -> DistributionReport:
    """Share of generated rows whose nearest training row is no farther than
    the training set's own 95th-percentile nearest-neighbour distance."""
    T = np.asarray(training, dtype=float)
    G = np.asarray(generated, dtype=float)
    if len(T) < 2 or len(G) == 0:
        raise EmptyDataError("need at least two training rows and one generated row")
    norm = normalizer or Normalizer.fit(T)
    Tu, Gu = norm.apply(T), norm.apply(G)
    thr = float(np.percentile(_nn(Tu, Tu, exclude_self=True), 95))
    nn = _nn(Gu, Tu)
    frac = float(np.mean(nn <= thr))
    coords = labels = None
    kl = math.nan
    if embed:
        joint = np.vstack([Tu, Gu])
        perp = min(30.0, (len(joint) - 1) / 3.0)
        emb = tsne_embed(joint, perplexity=perp, iters=iters, seed=seed)
        coords, kl = emb.coords, emb.final_kl
        labels = np.r_[np.zeros(len(Tu), int), np.ones(len(Gu), int)]
    return DistributionReport(frac, thr, nn, coords, labels, kl)


# --- persistence ----------------------------------------------------------------


def accepted_csv_text(records) -> str:
    acc = [r for r in records if r.accepted]
    extra = [(r.rt, r.rw, r.rf, r.fn, r.novelty_distance) for r in acc]
    return hull_csv_text([r.vector for r in acc], RESULT_COLUMNS, extra)


def attempts_csv_text(records) -> str:
    head = ["attempt_index", "reason", "detail"] + list(COLUMNS) + list(RESULT_COLUMNS)
    lines = [",".join(head)]
    for r in records:
        cells = [str(r.attempt_index), r.reason, '"' + r.detail.replace('"', "'") + '"']
        cells += [fmt(v) for v in r.vector]
        cells += [fmt(v) for v in (r.rt, r.rw, r.rf, r.fn, r.novelty_distance)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def summary_text(summary: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in summary.items())


def persist_results(result: GenerationResult, out_dir, stl: bool = False, training=None, svg: bool = True) -> dict:
    """Write accepted.csv, attempts.csv, summary.txt and optional STL/SVG files."""
    from .svg import scatter_svg

    out = Path(out_dir)
    paths = {
        "accepted": write_text(out / "accepted.csv", accepted_csv_text(result.records)),
        "attempts": write_text(out / "attempts.csv", attempts_csv_text(result.records)),
    }
    acc = result.accepted
    if stl:
        from .geometry import build_mesh

        for r in acc:
            write_stl(build_mesh(r.params), _mkdir(out / "stl") / f"hull_{r.attempt_index:06d}.stl")
    summary = result.summary()
    if svg and training is not None and acc:
        T = training.rows if isinstance(training, Dataset) else np.asarray(training)
        rep = in_distribution_report(T, np.array([r.vector for r in acc]), result.model.normalizer, seed=result.config.seed)
        summary["in_distribution_fraction"] = rep.fraction_within
        paths["overlay"] = write_text(
            out / "overlay.svg",
            scatter_svg(rep.coords, rep.labels, ["training", "generated"], "t-SNE: training vs generated"),
        )
    paths["summary"] = write_text(out / "summary.txt", summary_text(summary))
    return paths


def _mkdir(p: Path) -> Path:
    p.mkdir(parents=True, exist_ok=True)
    return p


__all__ = [
    "DistributionReport",
    "GenerationConfig",
    "GenerationRecord",
    "GenerationResult",
    "bundled_training_path",
    "in_distribution_report",
    "load_dataset",
    "persist_results",
    "rescore",
    "run_generation",
]
