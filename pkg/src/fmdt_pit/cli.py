"""Command-line interface: ``fmdt-pit {partition,train,predict,cv}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import model_io
from .dataset import DataError, load_csv, load_features, load_schema
from .fmdt import INFERENCE_MODES, Hyperparameters, complexity, predict, train
from .metrics import cross_validate
from .partition import build_uniform_partition, map_to_original
from .pit import fit_tables

log = logging.getLogger("fmdt_pit")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    data: Optional[Path]
    schema: Optional[Path]
    model: Optional[Path]
    output: Optional[Path]
    header: bool
    hp: Hyperparameters
    folds: int
    seed: int
    workers: int
    positive: int
    inference: Optional[str] = None


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", type=Path, help="input CSV file")
    common.add_argument("--schema", type=Path, help="schema declaration file")
    common.add_argument("--header", action="store_true", help="data file starts with a header row")
    common.add_argument("--output", "-o", type=Path, help="output file or directory")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--verbose", "-v", action="store_true")

    hp = argparse.ArgumentParser(add_help=False)
    hp.add_argument("--fuzzy-sets", type=int, default=5)
    hp.add_argument("--quantiles", type=int, default=1000)
    hp.add_argument("--max-depth", type=int, default=5)
    hp.add_argument("--gamma", type=float, default=0.001)
    hp.add_argument("--phi", type=float, default=0.02)
    hp.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    hp.add_argument("--tnorm", default="product")
    hp.add_argument("--inference", choices=INFERENCE_MODES, default="weighted_vote")
    hp.add_argument("--max-bins", type=int, default=None,
                    help="accepted for compatibility; has no effect")

    p = argparse.ArgumentParser(prog="fmdt-pit",
                                description="Quantile-transform fuzzy partitioning and multi-way fuzzy decision trees.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("partition", parents=[common, hp],
                   help="dump quantile tables and fuzzy sets in both spaces")
    sub.add_parser("train", parents=[common, hp], help="train a model").add_argument(
        "--model", type=Path, required=True, help="model JSON to write")
    pr = sub.add_parser("predict", parents=[common], help="predict with a saved model")
    pr.add_argument("--model", type=Path, required=True)
    pr.add_argument("--inference", choices=INFERENCE_MODES, default=None)
    cv = sub.add_parser("cv", parents=[common, hp], help="stratified k-fold evaluation")
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--positive", type=int, default=0, help="index of the positive class")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    """Validate flags before any data is read; raises :class:`UsageError`."""
    try:
        if args.command == "predict":
            hp = Hyperparameters(inference=args.inference or "weighted_vote")
        else:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                hp = Hyperparameters(args.fuzzy_sets, args.quantiles, args.max_depth, args.gamma,
                                     args.phi, args.lam, args.tnorm, args.inference, args.max_bins)
            for w in caught:
                log.warning("%s", w.message)
    except ValueError as e:
        raise UsageError(str(e)) from e
    folds = getattr(args, "folds", 5)
    if folds < 2:
        raise UsageError("--folds must be >= 2")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if args.data is None:
        raise UsageError("--data is required")
    if not args.data.is_file():
        raise UsageError(f"data file not found: {args.data}")
    if args.command != "predict" and args.schema is None:
        raise UsageError("--schema is required")
    if args.schema is not None and not args.schema.is_file():
        raise UsageError(f"schema file not found: {args.schema}")
    model = getattr(args, "model", None)
    if args.command == "predict" and not model.is_file():
        raise UsageError(f"model file not found: {model}")
    return RunConfig(args.command, args.data, args.schema, model, args.output, args.header,
                     hp, folds, args.seed, args.workers, getattr(args, "positive", 0),
                     args.inference)


def cmd_partition(cfg: RunConfig) -> int:
    schema = load_schema(cfg.schema)
    ds = load_csv(cfg.data, schema, cfg.header)
    tables = fit_tables(ds, cfg.hp.quantiles)
    out = cfg.output or Path("partition_out")
    out.mkdir(parents=True, exist_ok=True)
    T = cfg.hp.fuzzy_sets
    with open(out / "partition_transformed.csv", "w", newline="") as ft, \
            open(out / "partition_original.csv", "w", newline="") as fo:
        wt, wo = csv.writer(ft, lineterminator="\n"), csv.writer(fo, lineterminator="\n")
        for w in (wt, wo):
            w.writerow(["attribute", "set_index", "left", "core", "right"])
        for f, t in tables.items():
            name = schema.attributes[f].name
            if t.degenerate:
                log.warning("attribute %s is constant: single-anchor quantile table at %r",
                            name, float(t.values[0]))
            p = build_uniform_partition(T, f)
            for s, (l, c, r) in zip(p.sets, map_to_original(p, t)):
                wt.writerow([name, s.label, repr(s.left), repr(s.core), repr(s.right)])
                wo.writerow([name, s.label, repr(l), repr(c), repr(r)])
    with open(out / "quantiles.json", "w") as fq:
        json.dump([tables[f].to_dict() for f in sorted(tables)], fq, indent=1)
        fq.write("\n")
    print(f"wrote partitions for {len(tables)} continuous attributes to {out}")
    return 0


def _print_summary(model) -> None:
    c = complexity(model)
    print(f"leaves            {c['leaf_count']}")
    print(f"avg depth         {c['avg_depth']:.2f}")
    print(f"avg fuzzy sets    {c['avg_fuzzy_sets']:.2f}")
    for stage in ("partitioning", "learning", "total"):
        print(f"{stage + ' (s)':<18}{model.timings[stage]:.3f}")


def cmd_train(cfg: RunConfig) -> int:
    ds = load_csv(cfg.data, load_schema(cfg.schema), cfg.header)
    model = train(ds, cfg.hp, cfg.seed, workers=cfg.workers)
    model_io.save(model, cfg.model)
    _print_summary(model)
    return 0


def cmd_predict(cfg: RunConfig) -> int:
    model = model_io.load(cfg.model)
    schema = model.schema
    if cfg.schema is not None:
        given = load_schema(cfg.schema)
        if not given.same_layout(schema):
            raise DataError("data schema does not match the model schema")
    X, _ = load_features(cfg.data, schema, cfg.header)
    pred, scores = predict(model, X, cfg.inference)
    fh = open(cfg.output, "w", newline="") if cfg.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["prediction"] + [f"score_{l}" for l in model.class_labels])
        for p, s in zip(pred, scores):
            w.writerow([model.class_labels[p]] + [repr(float(v)) for v in s])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_cv(cfg: RunConfig) -> int:
    ds = load_csv(cfg.data, load_schema(cfg.schema), cfg.header)
    report = cross_validate(ds, cfg.hp, cfg.folds, cfg.seed, cfg.positive, cfg.workers)
    print(report.format_table())
    if cfg.output:
        cfg.output.write_text(report.to_json())
    return 0


COMMANDS = {"partition": cmd_partition, "train": cmd_train,
            "predict": cmd_predict, "cv": cmd_cv}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = make_config(args)
    except UsageError as e:
        print(f"fmdt-pit: error: {e}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[cfg.command](cfg)
    except (DataError, ValueError, OSError) as e:
        print(f"fmdt-pit: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
