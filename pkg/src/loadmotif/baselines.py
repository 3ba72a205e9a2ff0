"""Intuitive comparison methods: zero counting, average daily profile,
and seasonal load-duration distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConsumerSeries, DayMatrix
from .errors import DataError, UsageError

SAMPLES_PER_YEAR_MINUTES = 365 * 1440


@dataclass
class LoadDurationCurve:
    """A season's samples sorted descending; time order is destroyed on
    purpose to expose the magnitude distribution."""

    sorted_values: np.ndarray
    season: str

    def __post_init__(self):
        self.sorted_values = np.asarray(self.sorted_values, dtype=np.float64)


def zero_count(s: ConsumerSeries, epsilon: float = 0.0) -> int:
    """Number of intervals with zero import (<= epsilon if given)."""
    if epsilon > 0.0:
        return int(np.count_nonzero(s.values <= epsilon))
    return int(np.count_nonzero(s.values == 0.0))


def counting_zeros(s: ConsumerSeries, zero_threshold: int = 2000,
                   epsilon: float = 0.0) -> int:
    """1 when the series has at least `zero_threshold` zero entries.

    The threshold is quoted for one year of data and scaled in proportion
    to the actual series length, so shorter seasonal slices keep the same
    decision boundary per day.  Zero means literal 0.0 unless an epsilon
    is supplied.
    """
    year_samples = SAMPLES_PER_YEAR_MINUTES / s.interval_minutes
    effective = zero_threshold * len(s.values) / year_samples
    return int(zero_count(s, epsilon) >= effective)


def average_daily_profile(days: DayMatrix) -> np.ndarray:
    """Columnwise mean across days; a drop-in replacement for a motif."""
    if days.n_days < 1:
        raise UsageError("need at least one day")
    return days.rows.mean(axis=0)


def load_duration_curve(s: ConsumerSeries, season: str) -> LoadDurationCurve:
    return LoadDurationCurve(
        sorted_values=np.sort(s.values)[::-1].copy(), season=season
    )


def duration_distance(summer: LoadDurationCurve, winter: LoadDurationCurve,
                      q: int = 100) -> float:
    """Euclidean distance between the two curves resampled at q evenly
    spaced quantile points, which makes curves of unequal length
    comparable."""
    if q < 2:
        raise UsageError(f"need at least 2 quantile points, got {q}")
    for curve in (summer, winter):
        if len(curve.sorted_values) < q:
            raise DataError(
                f"{curve.season} season has {len(curve.sorted_values)} "
                f"samples, need >= {q}"
            )
    probs = np.linspace(0.0, 1.0, q)
    qs = np.quantile(summer.sorted_values, probs)
    qw = np.quantile(winter.sorted_values, probs)
    return float(np.sqrt(np.sum((qs - qw) ** 2)))


def load_duration_classify(summer: ConsumerSeries | None,
                           winter: ConsumerSeries | None,
                           q: int = 100, threshold: float = 0.0) -> int:
    """1 (electric heating) when the summer/winter duration-curve
    distance reaches the threshold."""
    if summer is None or winter is None or len(summer.values) == 0 \
            or len(winter.values) == 0:
        raise DataError("both summer and winter series are required")
    dist = duration_distance(
        load_duration_curve(summer, "summer"),
        load_duration_curve(winter, "winter"),
        q,
    )
    return int(dist >= threshold)


def fit_distance_threshold(distances, labels) -> float:
    """Threshold on a 1-D score maximising the F-score of `score >= t`.

    Candidates are midpoints between consecutive sorted unique scores
    plus both outer extremes; ties resolve to the smallest candidate, so
    the fit is deterministic.  Used to set the load-duration decision
    boundary on a training split.
    """
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(distances) != len(labels) or len(distances) == 0:
        raise UsageError("distances and labels must be same nonzero length")
    uniq = np.unique(distances)
    candidates = [uniq[0] - 1.0]
    candidates += [(a + b) / 2.0 for a, b in zip(uniq[:-1], uniq[1:])]
    candidates += [uniq[-1] + 1.0]
    best_t, best_f = candidates[0], -1.0
    for t in candidates:
        pred = distances >= t
        tp = int(np.sum(pred & (labels == 1)))
        fp = int(np.sum(pred & (labels == 0)))
        fn = int(np.sum(~pred & (labels == 1)))
        f = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
        if f > best_f:
            best_f, best_t = f, t
    return float(best_t)
