"""Experiment harness: configuration parsing, single runs, hyperparameter
grid search, ablation studies and machine-readable reports."""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import classify
from .data import (UNLABELED, DataFormatError, HeteroDataset, SynthSpec,
                   load_domain, load_pairing, preprocess, synth_generate)
from .solver import HyperParams, fit

#: Hyperparameter search set used when no explicit grid is given.
DEFAULT_GRID = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_ITERATIONS = 5
DEFAULT_DIM = 100
DEFAULT_PAIR_FRACTION = 0.3


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "synth"  # "synth" or "files"
    synth: SynthSpec = field(default_factory=SynthSpec)
    seeds: tuple[int, ...] = (0,)
    # file-mode inputs
    source_features: str | None = None
    source_labels: str | None = None
    target_features: str | None = None
    target_labels: str | None = None
    pairing: str | None = None
    target_truth: str | None = None
    class_count: int | None = None
    # hyperparameters; each weight is a grid (singleton for fixed runs)
    alpha_grid: tuple[float, ...] = (1.0,)
    beta_grid: tuple[float, ...] = (1.0,)
    lam_grid: tuple[float, ...] = (1.0,)
    dim: int = DEFAULT_DIM
    iterations: int = DEFAULT_ITERATIONS
    neighbors: int = 10
    ridge: float = 0.0
    eig_select: str = "smallest_algebraic"
    classifier: str = "one_nn"
    preprocess: str = "zscore"
    output: str | None = None
    format: str = "json_lines"
    timing: bool = True
    workers: int = 1

    def validate(self) -> None:
        if self.mode not in ("synth", "files"):
            raise ValueError(f"unknown data mode {self.mode!r}")
        if self.mode == "files":
            missing = [k for k in ("source_features", "source_labels",
                                   "target_features", "target_labels",
                                   "pairing")
                       if getattr(self, k) is None]
            if missing:
                raise ValueError(
                    f"file mode requires {', '.join(missing)}")
        if not self.seeds:
            raise ValueError("at least one seed required")
        for name, grid in (("alpha", self.alpha_grid),
                           ("beta", self.beta_grid),
                           ("lambda", self.lam_grid)):
            if not grid:
                raise ValueError(f"{name} grid must be non-empty")


@dataclass
class RunRecord:
    kind: str  # "run" | "grid" | "ablation"
    alpha: float
    beta: float
    lam: float
    seed: int
    dim: int
    accuracy: float | None = None
    iteration_accuracy: list[float] | None = None
    selection: str | None = None  # "target_truth" | "labeled_cv"
    wall_time: float = 0.0
    error: str | None = None
    variant: str | None = None  # ablation variant name
    delta: float | None = None  # ablation accuracy delta vs baseline

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        return RunRecord(**d)


@dataclass
class RunReport:
    config: dict
    records: list[RunRecord]
    summary: dict


# ---------------------------------------------------------------------------
# config file parsing
# ---------------------------------------------------------------------------

def parse_config_text(lines: list[str]) -> dict[str, str]:
    """Flat "key = value" pairs; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config_file(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read().splitlines())


def _floats(value: str) -> tuple[float, ...]:
    return tuple(float(v) for v in value.split(",") if v.strip() != "")


def _ints(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.split(",") if v.strip() != "")


def _bool(value: str) -> bool:
    if value.lower() in ("on", "true", "1", "yes"):
        return True
    if value.lower() in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {value!r}")


def build_config(kv: dict[str, str]) -> ExperimentConfig:
    """Turn flat config keys into an ExperimentConfig with defaults."""
    kv = dict(kv)
    synth_kwargs = {}
    synth_fields = {"class_count": int, "latent_dim": int,
                    "samples_per_domain": int, "source_dim": int,
                    "target_dim": int, "noise_sigma": float,
                    "pair_fraction": float, "class_separation": float}
    for name, conv in synth_fields.items():
        key = f"synth.{name}"
        if key in kv:
            synth_kwargs[name] = conv(kv.pop(key))
    synth_kwargs.setdefault("pair_fraction", DEFAULT_PAIR_FRACTION)

    cfg = ExperimentConfig(synth=SynthSpec(**synth_kwargs))
    simple = {
        "data.mode": ("mode", str),
        "data.source_features": ("source_features", str),
        "data.source_labels": ("source_labels", str),
        "data.target_features": ("target_features", str),
        "data.target_labels": ("target_labels", str),
        "data.pairing": ("pairing", str),
        "data.target_truth": ("target_truth", str),
        "data.class_count": ("class_count", int),
        "seeds": ("seeds", _ints),
        "params.alpha": ("alpha_grid", _floats),
        "params.beta": ("beta_grid", _floats),
        "params.lambda": ("lam_grid", _floats),
        "params.dim": ("dim", int),
        "params.iterations": ("iterations", int),
        "params.neighbors": ("neighbors", int),
        "params.ridge": ("ridge", float),
        "params.eig_select": ("eig_select", str),
        "classifier": ("classifier", str),
        "preprocess": ("preprocess", str),
        "output": ("output", str),
        "format": ("format", str),
        "timing": ("timing", _bool),
        "workers": ("workers", int),
    }
    updates = {}
    for key, (attr, conv) in simple.items():
        if key in kv:
            updates[attr] = conv(kv.pop(key))
    if kv:
        raise ValueError(f"unknown config keys: {sorted(kv)}")
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def config_echo(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    return d


# ---------------------------------------------------------------------------
# dataset assembly
# ---------------------------------------------------------------------------

def load_file_dataset(cfg: ExperimentConfig) -> HeteroDataset:
    source = load_domain(cfg.source_features, cfg.source_labels)
    target = load_domain(cfg.target_features, cfg.target_labels)
    pairs = load_pairing(cfg.pairing, source, target)
    truth = None
    if cfg.target_truth is not None:
        truth_dom = load_domain(cfg.target_features, cfg.target_truth)
        truth = truth_dom.labels
        if np.any(truth == UNLABELED):
            raise DataFormatError(
                f"{cfg.target_truth}: truth labels must all be assigned")
    observed = [source.labels[source.labels != UNLABELED].max(initial=0),
                target.labels[target.labels != UNLABELED].max(initial=0)]
    if truth is not None:
        observed.append(truth.max(initial=0))
    class_count = cfg.class_count or int(max(observed))
    return HeteroDataset(source=source, target=target, pairs=pairs,
                         class_count=class_count, target_truth=truth)


def build_dataset(cfg: ExperimentConfig, seed: int) -> HeteroDataset:
    if cfg.mode == "synth":
        dataset = synth_generate(cfg.synth, seed)
    else:
        dataset = load_file_dataset(cfg)
    dataset.source = preprocess(dataset.source, cfg.preprocess)
    dataset.target = preprocess(dataset.target, cfg.preprocess)
    return dataset


def target_only_baseline(dataset: HeteroDataset, classifier: str) -> float:
    """Accuracy of a classifier trained on labeled target samples alone,
    in raw target feature space, over the unlabeled target samples."""
    if dataset.target_truth is None:
        raise ValueError("baseline requires target ground truth")
    labeled = dataset.target.labels != UNLABELED
    model = classify.train(classifier, dataset.target.features[:, labeled],
                           dataset.target.labels[labeled])
    pred = classify.predict(model, dataset.target.features[:, ~labeled])
    return classify.accuracy(pred, np.asarray(dataset.target_truth)[~labeled])


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

def _labeled_cv_accuracy(dataset: HeteroDataset, model, cfg) -> float:
    """Leave-one-out accuracy over the labeled target samples in the shared
    subspace; used for model selection when no target truth is available."""
    from .solver import project

    z_s, z_t = project(model.projection, dataset.source.features,
                       dataset.target.features)
    labeled = np.flatnonzero(dataset.target.labels != UNLABELED)
    hits = 0
    for j in labeled:
        keep = labeled[labeled != j]
        train_z = np.hstack([z_s, z_t[:, keep]])
        train_y = np.concatenate([dataset.source.labels,
                                  dataset.target.labels[keep]])
        clf = classify.train(cfg.classifier, train_z, train_y)
        pred = classify.predict(clf, z_t[:, j:j + 1])
        hits += int(pred[0] == dataset.target.labels[j])
    return hits / labeled.size


def _evaluate(dataset: HeteroDataset, cfg: ExperimentConfig,
              params: HyperParams) -> tuple[float, list[float], str]:
    model = fit(dataset, params, classifier_kind=cfg.classifier)
    if dataset.target_truth is not None:
        unlabeled = dataset.target.labels == UNLABELED
        acc = classify.accuracy(model.pseudo_labels[unlabeled],
                                np.asarray(dataset.target_truth)[unlabeled])
        iter_acc = [d.target_accuracy for d in model.diagnostics]
        return acc, iter_acc, "target_truth"
    acc = _labeled_cv_accuracy(dataset, model, cfg)
    return acc, [], "labeled_cv"


def _params_for(cfg: ExperimentConfig, alpha: float, beta: float,
                lam: float) -> HyperParams:
    return HyperParams(alpha=alpha, beta=beta, lam=lam, m=cfg.dim,
                       t_iters=cfg.iterations, k_neighbors=cfg.neighbors,
                       ridge=cfg.ridge, eig_select=cfg.eig_select)


def _run_one(cfg: ExperimentConfig, alpha: float, beta: float, lam: float,
             seed: int, kind: str, variant: str | None = None) -> RunRecord:
    start = time.perf_counter()
    record = RunRecord(kind=kind, alpha=alpha, beta=beta, lam=lam, seed=seed,
                       dim=cfg.dim, variant=variant)
    try:
        dataset = build_dataset(cfg, seed)
        acc, iter_acc, selection = _evaluate(dataset, cfg,
                                             _params_for(cfg, alpha, beta,
                                                         lam))
        record.accuracy = acc
        record.iteration_accuracy = iter_acc or None
        record.selection = selection
    except Exception as exc:  # recorded, never aborts a sweep
        record.error = f"{type(exc).__name__}: {exc}"
    if cfg.timing:
        record.wall_time = time.perf_counter() - start
    return record


def run_single(cfg: ExperimentConfig) -> RunReport:
    """One run per seed at the (single-valued) configured parameters."""
    cfg.validate()
    for name, grid in (("alpha", cfg.alpha_grid), ("beta", cfg.beta_grid),
                       ("lambda", cfg.lam_grid)):
        if len(grid) != 1:
            raise ValueError(
                f"run_single requires a single {name} value, got {grid}")
    alpha, beta, lam = cfg.alpha_grid[0], cfg.beta_grid[0], cfg.lam_grid[0]
    records = [_run_one(cfg, alpha, beta, lam, seed, "run")
               for seed in cfg.seeds]
    return RunReport(config=config_echo(cfg), records=records,
                     summary=_summarize(records))


def _grid_tuples(cfg: ExperimentConfig) -> list[tuple[float, float, float]]:
    return sorted(itertools.product(cfg.alpha_grid, cfg.beta_grid,
                                    cfg.lam_grid))


def _grid_task(args):
    cfg, alpha, beta, lam, seed = args
    return _run_one(cfg, alpha, beta, lam, seed, "grid")


def grid_search(cfg: ExperimentConfig) -> RunReport:
    """Full Cartesian sweep over the weight grids, all seeds per tuple.

    Tuples are independent; with workers > 1 they execute in parallel.
    Output record order is canonical (sorted tuple, then seed) either way.
    """
    cfg.validate()
    tasks = [(cfg, a, b, l, seed)
             for (a, b, l) in _grid_tuples(cfg) for seed in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_grid_task, tasks, chunksize=4))
    else:
        records = [_grid_task(t) for t in tasks]
    records.sort(key=lambda r: (r.alpha, r.beta, r.lam, r.seed))
    return RunReport(config=config_echo(cfg), records=records,
                     summary=_summarize(records))


ABLATION_VARIANTS = (
    ("baseline", {}),
    ("alpha_zero", {"alpha": 0.0}),
    ("beta_zero", {"beta": 0.0}),
    ("lambda_zero", {"lam": 0.0}),
    ("structure_zero", {"alpha": 0.0, "lam": 0.0}),
)


def ablation(cfg: ExperimentConfig) -> RunReport:
    """Zero out each preservation weight (and both structure weights) around
    a baseline tuple and report the mean-accuracy delta per variant.

    If the config carries grids, the baseline tuple is grid-optimized first.
    """
    cfg.validate()
    if any(len(g) > 1 for g in (cfg.alpha_grid, cfg.beta_grid, cfg.lam_grid)):
        best = grid_search(cfg).summary["best"]
        base = {"alpha": best["alpha"], "beta": best["beta"],
                "lam": best["lam"]}
    else:
        base = {"alpha": cfg.alpha_grid[0], "beta": cfg.beta_grid[0],
                "lam": cfg.lam_grid[0]}

    records: list[RunRecord] = []
    means: dict[str, float] = {}
    for variant, override in ABLATION_VARIANTS:
        weights = dict(base)
        weights.update(override)
        variant_records = [
            _run_one(cfg, weights["alpha"], weights["beta"], weights["lam"],
                     seed, "ablation", variant=variant)
            for seed in cfg.seeds]
        accs = [r.accuracy for r in variant_records if r.accuracy is not None]
        means[variant] = float(np.mean(accs)) if accs else math.nan
        # one aggregated record per variant keeps the 5-record contract
        agg = RunRecord(kind="ablation", alpha=weights["alpha"],
                        beta=weights["beta"], lam=weights["lam"],
                        seed=-1, dim=cfg.dim, variant=variant,
                        accuracy=means[variant],
                        selection=variant_records[0].selection,
                        wall_time=sum(r.wall_time for r in variant_records),
                        error=variant_records[0].error if not accs else None)
        records.append(agg)
    for rec in records:
        if not math.isnan(means["baseline"]) and rec.accuracy is not None \
                and not math.isnan(rec.accuracy):
            rec.delta = rec.accuracy - means["baseline"]
    summary = _summarize(records)
    summary["baseline_weights"] = base
    return RunReport(config=config_echo(cfg), records=records,
                     summary=summary)


def _summarize(records: list[RunRecord]) -> dict:
    ok = [r for r in records if r.accuracy is not None
          and not math.isnan(r.accuracy)]
    summary: dict = {"records": len(records), "failed":
                     sum(1 for r in records if r.error is not None)}
    if not ok:
        return summary
    by_tuple: dict[tuple[float, float, float], list[float]] = {}
    for r in ok:
        by_tuple.setdefault((r.alpha, r.beta, r.lam), []).append(r.accuracy)
    best_tuple = max(sorted(by_tuple),
                     key=lambda t: float(np.mean(by_tuple[t])))
    accs = [r.accuracy for r in ok]
    summary.update({
        "mean_accuracy": float(np.mean(accs)),
        "std_accuracy": float(np.std(accs)),
        "best": {"alpha": best_tuple[0], "beta": best_tuple[1],
                 "lam": best_tuple[2],
                 "mean_accuracy": float(np.mean(by_tuple[best_tuple]))},
    })
    return summary


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

def _csv_header(max_iters: int) -> list[str]:
    head = ["kind", "variant", "alpha", "beta", "lam", "seed", "dim",
            "accuracy", "selection", "wall_time", "delta", "error"]
    return head + [f"acc_iter_{i + 1}" for i in range(max_iters)]


def emit_report(report: RunReport, fmt: str, path: str) -> None:
    """Write a report as JSON-lines or CSV (both round-trippable)."""
    if fmt == "json_lines":
        with open(path, "w", encoding="utf-8") as fh:
            for rec in report.records:
                fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
            fh.write(json.dumps({"summary": report.summary,
                                 "config": report.config},
                                sort_keys=True) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    max_iters = max((len(r.iteration_accuracy or []) for r in report.records),
                    default=0)
    header = _csv_header(max_iters)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("#config " + json.dumps(report.config, sort_keys=True) + "\n")
        fh.write("#summary " + json.dumps(report.summary, sort_keys=True)
                 + "\n")
        fh.write(",".join(header) + "\n")
        for rec in report.records:
            iters = rec.iteration_accuracy or []
            row = [rec.kind, rec.variant or "", repr(rec.alpha),
                   repr(rec.beta), repr(rec.lam), str(rec.seed),
                   str(rec.dim),
                   "" if rec.accuracy is None else repr(rec.accuracy),
                   rec.selection or "", repr(rec.wall_time),
                   "" if rec.delta is None else repr(rec.delta),
                   (rec.error or "").replace(",", ";")]
            row += [repr(a) if a is not None else ""
                    for a in iters]
            row += [""] * (max_iters - len(iters))
            fh.write(",".join(row) + "\n")


def load_report(path: str) -> RunReport:
    """Parse a report produced by emit_report (format auto-detected)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith(("{", "[")):
        records = []
        summary: dict = {}
        config: dict = {}
        for line in lines:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "summary" in obj and "kind" not in obj:
                summary = obj["summary"]
                config = obj.get("config", {})
            else:
                records.append(RunRecord.from_dict(obj))
        return RunReport(config=config, records=records, summary=summary)

    config = {}
    summary = {}
    body = []
    for line in lines:
        if line.startswith("#config "):
            config = json.loads(line[len("#config "):])
        elif line.startswith("#summary "):
            summary = json.loads(line[len("#summary "):])
        elif line.strip():
            body.append(line)
    if not body:
        return RunReport(config=config, records=[], summary=summary)
    header = body[0].split(",")
    records = []
    for line in body[1:]:
        cells = line.split(",")
        row = dict(zip(header, cells))
        iters = [float(row[h]) for h in header if h.startswith("acc_iter_")
                 and row.get(h)]
        records.append(RunRecord(
            kind=row["kind"], variant=row["variant"] or None,
            alpha=float(row["alpha"]), beta=float(row["beta"]),
            lam=float(row["lam"]), seed=int(row["seed"]),
            dim=int(row["dim"]),
            accuracy=float(row["accuracy"]) if row["accuracy"] else None,
            selection=row["selection"] or None,
            wall_time=float(row["wall_time"]),
            delta=float(row["delta"]) if row["delta"] else None,
            error=row["error"] or None,
            iteration_accuracy=iters or None))
    return RunReport(config=config, records=records, summary=summary)
