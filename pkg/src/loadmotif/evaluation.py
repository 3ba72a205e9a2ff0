"""Metrics, histograms and cohort diagnostics for classification runs.

All artifacts are plain CSV for external plotting.  Timing is kept out
of `metrics.csv` so that repeated runs with the same seed stay byte
identical; it travels in the Metrics value and a separate timing file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import ClassifierModel, Prediction
from .datagen import GroundTruth
from .errors import DataError, UsageError
from .fileio import atomic_writer

METRICS_COLUMNS = ("accuracy", "precision", "recall", "f_score",
                   "tp", "fp", "tn", "fn")


@dataclass
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f_score: float
    tp: int
    fp: int
    tn: int
    fn: int
    wall_time_classify_ms: float = math.nan


def confusion_metrics(tp: int, fp: int, tn: int, fn: int,
                      wall_time_classify_ms: float = math.nan) -> Metrics:
    total = tp + fp + tn + fn
    if total == 0:
        raise UsageError("no predictions to evaluate")
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f_score = (
        2.0 * precision * recall / (precision + recall)
        if (precision + recall) > 0 else 0.0
    )
    return Metrics(
        accuracy=(tp + tn) / total,
        precision=precision,
        recall=recall,
        f_score=f_score,
        tp=tp, fp=fp, tn=tn, fn=fn,
        wall_time_classify_ms=wall_time_classify_ms,
    )


def evaluate(predictions: list[Prediction], truth: GroundTruth,
             wall_time_classify_ms: float = math.nan) -> Metrics:
    """Confusion counts and derived metrics against ground truth.

    The timing argument is whatever was measured around the
    classification call itself; motif discovery is deliberately not part
    of it.
    """
    tp = fp = tn = fn = 0
    for p in predictions:
        if p.consumer_id not in truth:
            raise DataError(f"prediction for unknown consumer {p.consumer_id!r}")
        actual = truth[p.consumer_id].label
        if p.label == 1 and actual == 1:
            tp += 1
        elif p.label == 1 and actual == 0:
            fp += 1
        elif p.label == 0 and actual == 0:
            tn += 1
        else:
            fn += 1
    return confusion_metrics(tp, fp, tn, fn, wall_time_classify_ms)


def metrics_csv_text(metrics: Metrics) -> str:
    row = [repr(getattr(metrics, c)) if isinstance(getattr(metrics, c), float)
           else str(getattr(metrics, c)) for c in METRICS_COLUMNS]
    return ",".join(METRICS_COLUMNS) + "\n" + ",".join(row) + "\n"


def write_metrics_csv(metrics: Metrics, path) -> None:
    with atomic_writer(path) as fh:
        fh.write(metrics_csv_text(metrics))


def export_histogram(scores, bins: int, path,
                     value_range: tuple[float, float] = (0.0, 1.0)) -> None:
    """Write per-class score counts over uniform bins.

    `scores` is a sequence of (score, true_label) pairs.  Scores are
    clipped into `value_range`, so the per-class counts always sum to the
    class sizes.  An empty input produces a header-only file.
    """
    if bins < 1:
        raise UsageError(f"bins must be >= 1, got {bins}")
    lo, hi = value_range
    if not lo < hi:
        raise UsageError(f"invalid histogram range ({lo}, {hi})")
    edges = np.linspace(lo, hi, bins + 1)
    values = np.array([s for s, _ in scores], dtype=np.float64)
    labels = np.array([lab for _, lab in scores], dtype=np.int64)
    with atomic_writer(path) as fh:
        fh.write("bin_left,bin_right,count_negative,count_positive\n")
        if len(values) == 0:
            return
        values = np.clip(values, lo, hi)
        neg, _ = np.histogram(values[labels == 0], bins=edges)
        pos, _ = np.histogram(values[labels == 1], bins=edges)
        for b in range(bins):
            fh.write(f"{edges[b]!r},{edges[b + 1]!r},{neg[b]},{pos[b]}\n")


def cohort_report(truth: GroundTruth, predictions: list[Prediction],
                  model: ClassifierModel, cohort_path, weights_path) -> None:
    """Per-consumer generation-to-daytime-demand ratios with prediction
    correctness, plus the trained weight vector for plotting.

    Rows are sorted by ratio descending, so consumers the motif method
    struggles with (low production, high daytime demand) sink to the
    bottom of the file.
    """
    rows = []
    for p in predictions:
        if p.consumer_id not in truth:
            raise DataError(f"prediction for unknown consumer {p.consumer_id!r}")
        e = truth[p.consumer_id]
        if e.total_daytime_consumption <= 0.0:
            raise DataError(
                f"consumer {p.consumer_id}: missing generation/demand metadata"
            )
        ratio = e.total_generation / e.total_daytime_consumption
        rows.append((ratio, p.consumer_id, e.capacity_or_multiplier,
                     e.label, p.label))
    rows.sort(key=lambda r: (-r[0], r[1]))
    with atomic_writer(cohort_path) as fh:
        fh.write("consumer_id,ratio,capacity,label,predicted,correct\n")
        for ratio, cid, cap, actual, predicted in rows:
            fh.write(f"{cid},{ratio!r},{cap!r},{actual},{predicted},"
                     f"{int(actual == predicted)}\n")
    with atomic_writer(weights_path) as fh:
        fh.write("sample_index,weight\n")
        for i, w in enumerate(model.a1):
            fh.write(f"{i},{float(w)!r}\n")
