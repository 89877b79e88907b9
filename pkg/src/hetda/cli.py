"""Command-line entry point: run / grid / ablate / synth / report."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .data import save_domain, save_pairing, synth_generate
from .experiment import (DEFAULT_GRID, ExperimentConfig, ablation,
                         build_config, emit_report, grid_search,
                         load_config_file, load_report, run_single)

log = logging.getLogger("hetda")


def _load_kv(args) -> dict[str, str]:
    kv: dict[str, str] = {}
    if args.config:
        kv.update(load_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        kv[key.strip()] = value.strip()
    if getattr(args, "output", None):
        kv["output"] = args.output
    return kv


def _emit(report, cfg: ExperimentConfig) -> None:
    path = cfg.output or "report.jsonl"
    emit_report(report, cfg.format, path)
    summary = json.dumps(report.summary, sort_keys=True)
    print(f"wrote {path}")
    print(f"summary: {summary}")


def _cmd_run(args) -> int:
    cfg = build_config(_load_kv(args))
    _emit(run_single(cfg), cfg)
    return 0


def _cmd_grid(args) -> int:
    kv = _load_kv(args)
    # a grid run without explicit grids sweeps the default search set
    for key in ("params.alpha", "params.beta", "params.lambda"):
        kv.setdefault(key, ",".join(str(v) for v in DEFAULT_GRID))
    cfg = build_config(kv)
    _emit(grid_search(cfg), cfg)
    return 0


def _cmd_ablate(args) -> int:
    cfg = build_config(_load_kv(args))
    _emit(ablation(cfg), cfg)
    return 0


def _cmd_synth(args) -> int:
    cfg = build_config(_load_kv(args))
    seed = cfg.seeds[0]
    dataset = synth_generate(cfg.synth, seed)
    os.makedirs(args.out_dir, exist_ok=True)

    def p(name: str) -> str:
        return os.path.join(args.out_dir, name)

    save_domain(dataset.source, p("source_features.csv"),
                p("source_labels.csv"))
    save_domain(dataset.target, p("target_features.csv"),
                p("target_labels.csv"))
    save_pairing(dataset.pairs, p("pairing.csv"))
    with open(p("target_truth.csv"), "w", encoding="utf-8") as fh:
        fh.write(",".join(str(int(v)) for v in dataset.target_truth) + "\n")
    print(f"wrote synthetic dataset (seed {seed}) to {args.out_dir}")
    return 0


def _cmd_report(args) -> int:
    report = load_report(args.input)
    emit_report(report, args.format, args.output)
    print(f"wrote {args.output}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hetda",
        description="Heterogeneous domain adaptation experiments in a "
                    "shared linear subspace")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", help="key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
        p.add_argument("-o", "--output", help="report output path")

    p_run = sub.add_parser("run", help="single run at fixed parameters")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_grid = sub.add_parser("grid", help="hyperparameter grid search")
    common(p_grid)
    p_grid.set_defaults(func=_cmd_grid)

    p_abl = sub.add_parser("ablate", help="zero-weight ablation study")
    common(p_abl)
    p_abl.set_defaults(func=_cmd_ablate)

    p_synth = sub.add_parser("synth", help="emit a synthetic dataset as CSV")
    common(p_synth)
    p_synth.add_argument("-d", "--out-dir", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_rep = sub.add_parser("report", help="re-format an existing report")
    p_rep.add_argument("-i", "--input", required=True)
    p_rep.add_argument("-f", "--format", required=True,
                       choices=["json_lines", "csv"])
    p_rep.add_argument("-o", "--output", required=True)
    p_rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
