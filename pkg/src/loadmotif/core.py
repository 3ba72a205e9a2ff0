"""Ingestion and preparation of imported-energy time series.

Raw smart-meter CSV data is parsed into one :class:`ConsumerSeries` per
consumer, cleaned (gap filling, clipping, midnight alignment), and
segmented into an N x m :class:`DayMatrix` of daily sub-patterns, where
m is the number of samples in a day.  The daytime mask and the weight
matrix used by the masked distance kernel are also built here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta

import numpy as np

from .errors import DataError, UsageError

CSV_COLUMNS = ("consumer_id", "timestamp", "kwh")


@dataclass
class ConsumerSeries:
    """One consumer's imported-energy sequence at a fixed interval.

    Values are kWh per interval.  `label` carries the ground-truth class
    when known (training / evaluation data only).
    """

    consumer_id: str
    start_time: datetime
    interval_minutes: int
    values: np.ndarray
    label: int | None = None

    def __post_init__(self):
        if self.interval_minutes <= 0 or 1440 % self.interval_minutes != 0:
            raise UsageError(
                f"interval_minutes must divide a day, got {self.interval_minutes}"
            )
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def samples_per_day(self) -> int:
        return 1440 // self.interval_minutes


@dataclass
class DayMatrix:
    """Daily sub-patterns of one consumer, one row per day."""

    consumer_id: str
    rows: np.ndarray
    day_index_origin: date

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise UsageError("rows must be a 2-D array (days x samples)")

    @property
    def n_days(self) -> int:
        return self.rows.shape[0]

    @property
    def samples_per_day(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class MaskSpec:
    """Half-open sample window [window_start, window_end) marked as daytime."""

    window_start: int
    window_end: int
    m: int

    def __post_init__(self):
        ok = 0 <= self.window_start < self.window_end <= self.m
        if not ok:
            raise UsageError(
                f"mask window [{self.window_start}, {self.window_end}) "
                f"invalid for m={self.m}"
            )

    def vector(self) -> np.ndarray:
        """Binary mask vector: 1.0 inside the window, 0.0 outside."""
        w = np.zeros(self.m, dtype=np.float64)
        w[self.window_start : self.window_end] = 1.0
        return w


def full_mask(m: int) -> MaskSpec:
    """All-ones mask: every sample weighted equally."""
    return MaskSpec(0, m, m)


def daylight_mask(m: int) -> MaskSpec:
    """Sunrise-to-sunset preset (06:00-19:00), the uncalibrated default."""
    return MaskSpec(round(6 * m / 24), round(19 * m / 24), m)


def midday_mask(m: int) -> MaskSpec:
    """Calibrated 10:00-16:00 preset; at half-hourly resolution this is
    samples 20..31 inclusive."""
    return MaskSpec(round(10 * m / 24), round(16 * m / 24), m)


MASK_PRESETS = {
    "all": full_mask,
    "daylight": daylight_mask,
    "midday": midday_mask,
}


@dataclass
class WeightMatrix:
    """m x m weights for the masked distance kernel."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise UsageError("weight matrix must be square")


def build_weight_matrix(mask: MaskSpec) -> WeightMatrix:
    """W[i, j] = max(w_i, w_j) for the binary daytime mask vector w.

    A cell is weighted whenever either of the two aligned samples falls
    in the daytime window, so off-window/off-window alignments cost zero.
    """
    w = mask.vector()
    return WeightMatrix(np.maximum.outer(w, w))


@dataclass(frozen=True)
class CleaningPolicy:
    """Knobs for :func:`clean_series`.

    Gaps of at most `gap_fill_max_samples` missing values are linearly
    interpolated; longer gaps drop every day they touch.
    """

    gap_fill_max_samples: int = 4
    align_midnight: bool = True


def ingest_csv(path, schema: dict[str, str] | None = None) -> list[ConsumerSeries]:
    """Parse a `consumer_id,timestamp,kwh` CSV into per-consumer series.

    `schema` remaps logical column names to file column names.  Rows must
    be grouped or at least consistently ordered per consumer with strictly
    increasing timestamps at one fixed interval; the interval is inferred
    from the first two rows of each consumer and validated on every
    subsequent row.  Values are ingested verbatim (no cleaning here).
    """
    colmap = dict(schema) if schema else {c: c for c in CSV_COLUMNS}
    per_consumer: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        try:
            idx = {c: header.index(colmap[c]) for c in CSV_COLUMNS}
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: missing column in header: {exc}") from None
        for lineno, row in enumerate(reader, start=2):
            try:
                cid = row[idx["consumer_id"]]
                ts = datetime.fromisoformat(row[idx["timestamp"]])
                raw = row[idx["kwh"]]
                val = math.nan if raw == "" else float(raw)
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row: {exc}") from None
            per_consumer.setdefault(cid, []).append((ts, val))

    out = []
    for cid in sorted(per_consumer):
        rows = per_consumer[cid]
        if len(rows) >= 2:
            step = rows[1][0] - rows[0][0]
            if step <= timedelta(0):
                raise DataError(
                    f"consumer {cid}: timestamps not increasing at {rows[1][0]}"
                )
            for k in range(1, len(rows)):
                if rows[k][0] - rows[k - 1][0] != step:
                    raise DataError(
                        f"consumer {cid}: irregular interval at {rows[k][0]}"
                    )
            interval = int(step.total_seconds() // 60)
        else:
            interval = 30
        out.append(
            ConsumerSeries(
                consumer_id=cid,
                start_time=rows[0][0],
                interval_minutes=interval,
                values=np.array([v for _, v in rows], dtype=np.float64),
            )
        )
    return out


def _nan_runs(values: np.ndarray):
    """Yield (start, stop) half-open index ranges of consecutive NaNs."""
    isnan = np.isnan(values)
    i = 0
    n = len(values)
    while i < n:
        if isnan[i]:
            j = i
            while j < n and isnan[j]:
                j += 1
            yield i, j
            i = j
        else:
            i += 1


def clean_series(s: ConsumerSeries, policy: CleaningPolicy | None = None) -> ConsumerSeries:
    """Return a segmentation-ready copy of `s`.

    Steps, in order: trim to the next midnight when `align_midnight` is
    set; linearly interpolate interior NaN gaps up to the policy limit and
    mark the days touched by longer or edge gaps for removal; clip
    negative readings to zero; drop marked days and the trailing partial
    day.  Day drops splice the series, so remaining day indices are
    positional rather than calendar-exact.  Raises DataError when fewer
    than two full days survive.
    """
    policy = policy or CleaningPolicy()
    m = s.samples_per_day
    values = np.array(s.values, dtype=np.float64)
    start = s.start_time

    offset = (start.hour * 60 + start.minute) % 1440
    if offset % s.interval_minutes != 0:
        raise DataError(
            f"consumer {s.consumer_id}: start time {start} is not on the "
            f"{s.interval_minutes}-minute grid"
        )
    if offset != 0:
        if not policy.align_midnight:
            raise DataError(
                f"consumer {s.consumer_id}: series starts at {start.time()}, "
                "not midnight; enable align_midnight to trim"
            )
        skip = (1440 - offset) // s.interval_minutes
        values = values[skip:]
        start = (start + timedelta(minutes=1440 - offset)).replace(
            hour=0, minute=0, second=0, microsecond=0
        )

    drop_days: set[int] = set()
    for a, b in _nan_runs(values):
        interior = a > 0 and b < len(values)
        if interior and (b - a) <= policy.gap_fill_max_samples:
            left, right = values[a - 1], values[b]
            values[a:b] = left + (right - left) * (
                np.arange(1, b - a + 1) / (b - a + 1)
            )
        else:
            drop_days.update(range(a // m, (b - 1) // m + 1))

    np.clip(values, 0.0, None, out=values)

    n_days = len(values) // m
    keep = [d for d in range(n_days) if d not in drop_days]
    if keep:
        values = np.concatenate([values[d * m : (d + 1) * m] for d in keep])
        start = start + timedelta(days=keep[0])
    else:
        values = values[:0]

    if len(values) < 2 * m:
        raise DataError(
            f"consumer {s.consumer_id}: insufficient data after cleaning "
            f"({len(values)} samples, need at least {2 * m})"
        )
    return replace(s, start_time=start, values=values)


def segment_days(s: ConsumerSeries) -> DayMatrix:
    """Reshape a cleaned, midnight-aligned series into daily rows."""
    m = s.samples_per_day
    if (s.start_time.hour, s.start_time.minute) != (0, 0):
        raise DataError(
            f"consumer {s.consumer_id}: series starts at "
            f"{s.start_time.time()}; run clean_series with align_midnight "
            "to trim to a midnight boundary"
        )
    if len(s.values) % m != 0:
        raise DataError(
            f"consumer {s.consumer_id}: length {len(s.values)} is not a "
            f"multiple of {m}; run clean_series first"
        )
    rows = s.values.reshape(-1, m).copy()
    return DayMatrix(
        consumer_id=s.consumer_id,
        rows=rows,
        day_index_origin=s.start_time.date(),
    )


def slice_days(s: ConsumerSeries, first_day: int, last_day: int) -> ConsumerSeries:
    """Sub-series covering day indices [first_day, last_day) of a
    midnight-aligned series."""
    m = s.samples_per_day
    n_days = len(s.values) // m
    if not (0 <= first_day < last_day <= n_days):
        raise UsageError(
            f"day slice [{first_day}, {last_day}) out of range for {n_days} days"
        )
    return replace(
        s,
        start_time=s.start_time + timedelta(days=first_day),
        values=s.values[first_day * m : last_day * m].copy(),
    )
