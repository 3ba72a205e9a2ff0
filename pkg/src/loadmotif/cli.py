"""Command line driving the pipeline stage by stage.

Stages are separate subcommands (simulate, motif, train, classify,
evaluate, baseline) so the one-off motif discovery cost stays visibly
apart from the cheap classification step.  Every command resolves its
configuration from scenario defaults, an optional `key = value` config
file and repeatable `--set key=value` overrides, writes its outputs
atomically, and drops a resolved-config copy next to them.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric
divergence.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, classifier, evaluation, motif as motif_mod, pipeline
from .config import RunConfig, build_run_config, read_kv_config
from .core import clean_series, ingest_csv
from .datagen import (SCENARIO_PV, emit_low_ratio_cohort, load_ground_truth,
                      write_consumers_csv, write_ground_truth)
from .errors import ConfigError, DataError, DivergenceError, UsageError
from .fileio import atomic_write_text, atomic_writer

PREDICTIONS_COLUMNS = ("consumer_id", "score", "linear_score", "label")


def _config_from_args(args) -> RunConfig:
    mapping = read_kv_config(args.config) if args.config else {}
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if getattr(args, "workers", None):
        overrides["workers"] = str(args.workers)
    return build_run_config(mapping, overrides)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(cfg, out: Path, stage: str) -> None:
    atomic_write_text(out / f"{stage}_config.txt", cfg.resolved_text())


def _require_file(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"input file not found: {p}")
    return p


def write_predictions_csv(predictions, path) -> None:
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTIONS_COLUMNS)
        for p in predictions:
            writer.writerow([p.consumer_id, repr(p.score),
                             repr(p.linear_score), p.label])


def read_predictions_csv(path) -> list[classifier.Prediction]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != PREDICTIONS_COLUMNS:
            raise DataError(f"{path}: not a predictions file (header {header})")
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(classifier.Prediction(
                    consumer_id=row[0], score=float(row[1]),
                    linear_score=float(row[2]), label=int(row[3]),
                ))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row: {exc}") from None
    return out


def cmd_simulate(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    series, truth = emit_low_ratio_cohort(cfg.population_config(), cfg.hard_cases)
    write_consumers_csv(series, out / "consumers.csv")
    write_ground_truth(truth, out / "ground_truth.csv")
    _write_resolved(cfg, out, "simulate")
    print(f"simulated {len(series)} consumers "
          f"({sum(e.label for _, e in truth.items())} positive) -> {out}")


def cmd_motif(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    series = ingest_csv(_require_file(args.data))
    if not series:
        raise DataError(f"{args.data}: no consumers found")
    motifs = pipeline.extract_motifs(series, cfg, method=args.method)
    motif_mod.write_motifs_csv(motifs, out / "motifs.csv")
    if cfg.dump_tables or args.dump_tables:
        tables_dir = out / "tables"
        tables_dir.mkdir(exist_ok=True)
        threshold = cfg.fixed_threshold()
        if threshold is None and cfg.threshold_mode == "fixed":
            threshold = pipeline.calibrate_threshold(series, cfg)
        for s in series:
            cleaned = pipeline.seasonal_slice(
                clean_series(s, pipeline.cleaning_policy(cfg)), cfg)
            found = pipeline.discover_refined_motif(
                cleaned, cfg.mask_spec(cleaned.samples_per_day),
                threshold if threshold is not None else 0.0,
                cfg.threshold_mode)
            motif_mod.write_table_csv(
                found.table, s.consumer_id,
                tables_dir / f"table_{s.consumer_id}.csv")
    _write_resolved(cfg, out, "motif")
    print(f"extracted {len(motifs)} motifs ({args.method}) -> {out / 'motifs.csv'}")


def _join_motifs_truth(motifs, truth, ids):
    by_id = {mo.consumer_id: mo for mo in motifs}
    missing = [cid for cid in ids if cid not in by_id]
    if missing:
        raise DataError(f"motif file is missing consumers: {missing[:5]} ...")
    matrix = np.vstack([by_id[cid].values for cid in ids])
    labels = np.array([truth[cid].label for cid in ids], dtype=np.float64)
    return matrix, labels


def cmd_train(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    motifs = motif_mod.read_motifs_csv(_require_file(args.motifs))
    truth = load_ground_truth(_require_file(args.truth))
    train_ids, _ = pipeline.split_ids(
        sorted(truth.entries), cfg.split_fraction, cfg.split_seed)
    matrix, labels = _join_motifs_truth(motifs, truth, train_ids)
    m = matrix.shape[1]
    train_cfg = classifier.TrainConfig(
        learning_rate=cfg.learning_rate,
        epochs=cfg.epochs,
        seed=cfg.train_seed,
        init_scale=cfg.init_scale,
        mask=cfg.mask_spec(m),
        constrain_to_mask=cfg.classifier_mask,
    )
    model = classifier.train(matrix, labels, train_cfg)
    classifier.save_model(model, out / "model.txt")
    predictions = classifier.predict_batch(model, matrix, train_ids)
    metrics = evaluation.evaluate(predictions, truth)
    evaluation.write_metrics_csv(metrics, out / "train_metrics.csv")
    _write_resolved(cfg, out, "train")
    print(f"trained on {len(train_ids)} consumers, "
          f"training accuracy {metrics.accuracy:.3f} -> {out / 'model.txt'}")


def cmd_classify(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    motifs = sorted(motif_mod.read_motifs_csv(_require_file(args.motifs)),
                    key=lambda mo: mo.consumer_id)
    model = classifier.load_model(_require_file(args.model))
    ids, matrix = pipeline.motif_matrix(motifs)
    started = time.perf_counter()
    predictions = classifier.predict_batch(model, matrix, ids)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    write_predictions_csv(predictions, out / "predictions.csv")
    with atomic_writer(out / "timing.csv") as fh:
        fh.write("stage,milliseconds\n")
        fh.write(f"classify,{elapsed_ms!r}\n")
    _write_resolved(cfg, out, "classify")
    print(f"classified {len(predictions)} consumers in {elapsed_ms:.3f} ms "
          f"-> {out / 'predictions.csv'}")


def _read_timing(predictions_path: Path) -> float:
    timing = predictions_path.parent / "timing.csv"
    if not timing.is_file():
        return float("nan")
    with open(timing, newline="") as fh:
        for row in csv.reader(fh):
            if row and row[0] == "classify":
                return float(row[1])
    return float("nan")


def cmd_evaluate(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    predictions_path = _require_file(args.predictions)
    predictions = read_predictions_csv(predictions_path)
    truth = load_ground_truth(_require_file(args.truth))
    train_ids, test_ids = pipeline.split_ids(
        sorted(truth.entries), cfg.split_fraction, cfg.split_seed)
    chosen = {"train": set(train_ids), "test": set(test_ids),
              "all": set(truth.entries)}[args.split]
    subset = [p for p in predictions if p.consumer_id in chosen]
    if not subset:
        raise DataError(f"no predictions fall in the {args.split} split")
    metrics = evaluation.evaluate(subset, truth, _read_timing(predictions_path))
    evaluation.write_metrics_csv(metrics, out / "metrics.csv")
    evaluation.export_histogram(
        [(p.score, truth[p.consumer_id].label) for p in subset],
        cfg.histogram_bins, out / "histogram.csv")
    if args.model and cfg.scenario == SCENARIO_PV:
        model = classifier.load_model(_require_file(args.model))
        evaluation.cohort_report(truth, subset, model,
                                 out / "cohort.csv", out / "weights.csv")
    _write_resolved(cfg, out, "evaluate")
    print(f"{args.split} split: accuracy {metrics.accuracy:.3f}, "
          f"f-score {metrics.f_score:.3f} ({len(subset)} consumers) -> {out}")


def cmd_baseline(args) -> None:
    cfg = _config_from_args(args)
    out = _out_dir(args)
    series = ingest_csv(_require_file(args.data))
    truth = load_ground_truth(_require_file(args.truth))
    train_ids, test_ids = pipeline.split_ids(
        sorted(truth.entries), cfg.split_fraction, cfg.split_seed)
    policy = pipeline.cleaning_policy(cfg)

    if args.method == "counting-zeros":
        predictions = []
        for s in series:
            sliced = pipeline.seasonal_slice(clean_series(s, policy), cfg)
            label = baselines.counting_zeros(sliced, cfg.zero_threshold,
                                             cfg.cz_epsilon)
            predictions.append(classifier.Prediction(
                consumer_id=s.consumer_id, score=float(label),
                linear_score=float(baselines.zero_count(sliced, cfg.cz_epsilon)),
                label=label))
        subset = [p for p in predictions if p.consumer_id in set(test_ids)]
        metrics = evaluation.evaluate(subset, truth)
        evaluation.write_metrics_csv(metrics, out / "cz_metrics.csv")
        print(f"counting-zeros test accuracy {metrics.accuracy:.3f}, "
              f"f-score {metrics.f_score:.3f} -> {out / 'cz_metrics.csv'}")
    elif args.method == "load-duration":
        distances = {}
        for s in series:
            summer, winter = pipeline.summer_winter(clean_series(s, policy))
            distances[s.consumer_id] = baselines.duration_distance(
                baselines.load_duration_curve(summer, "summer"),
                baselines.load_duration_curve(winter, "winter"),
                cfg.ld_quantile_points)
        threshold = cfg.ld_fixed_threshold()
        if threshold is None:
            threshold = baselines.fit_distance_threshold(
                [distances[c] for c in train_ids],
                [truth[c].label for c in train_ids])
        predictions = [
            classifier.Prediction(
                consumer_id=cid, score=dist, linear_score=dist,
                label=int(dist >= threshold))
            for cid, dist in sorted(distances.items())
        ]
        subset = [p for p in predictions if p.consumer_id in set(test_ids)]
        metrics = evaluation.evaluate(subset, truth)
        evaluation.write_metrics_csv(metrics, out / "ld_metrics.csv")
        all_d = [d for d in distances.values()]
        evaluation.export_histogram(
            [(p.score, truth[p.consumer_id].label) for p in subset],
            cfg.histogram_bins, out / "ld_histogram.csv",
            value_range=(min(all_d), max(all_d) + 1e-9))
        print(f"load-duration threshold {threshold:.4f}, test accuracy "
              f"{metrics.accuracy:.3f}, f-score {metrics.f_score:.3f} "
              f"-> {out / 'ld_metrics.csv'}")
    _write_resolved(cfg, out, f"baseline_{args.method.replace('-', '_')}")


def _add_common(sub):
    sub.add_argument("--config", help="key = value configuration file")
    sub.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override one configuration key (repeatable)")
    sub.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadmotif",
        description="Daily-motif discovery and single-neuron classification "
                    "for smart-meter imported-energy data.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="generate a synthetic population")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("motif", help="extract one motif per consumer")
    _add_common(p)
    p.add_argument("--data", required=True, help="consumers CSV")
    p.add_argument("--method", default="refined_motif",
                   choices=["refined_motif", "matrix_profile",
                            "average_profile"])
    p.add_argument("--workers", type=int, default=0,
                   help="worker processes (default: LOADMOTIF_WORKERS or 1)")
    p.add_argument("--dump-tables", action="store_true",
                   help="also dump per-consumer distance tables")
    p.set_defaults(func=cmd_motif)

    p = subs.add_parser("train", help="fit the single-neuron classifier")
    _add_common(p)
    p.add_argument("--motifs", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("classify", help="score motifs with a trained model")
    _add_common(p)
    p.add_argument("--motifs", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_classify)

    p = subs.add_parser("evaluate", help="metrics, histogram and cohort report")
    _add_common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--model", help="model file, enables the weight/cohort export")
    p.add_argument("--split", default="test", choices=["test", "train", "all"])
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("baseline", help="run an intuitive baseline")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--method", required=True,
                   choices=["counting-zeros", "load-duration"])
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
