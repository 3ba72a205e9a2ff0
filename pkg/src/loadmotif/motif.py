"""Most-repeated-day discovery over daily sub-patterns.

The pairwise masked-DTW distance table over a consumer's days is reduced
to a per-day similarity profile: the integral part counts how many other
days fall within the threshold, the fractional part ranks by normalised
average distance.  The day with the largest profile value is the motif.
A single-append incremental update is provided that reproduces the full
recomputation bit for bit, and a brute-force sliding-window
nearest-neighbor search serves as the matrix-profile-style baseline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .core import ConsumerSeries, DayMatrix, MaskSpec, build_weight_matrix
from .distance import _counters, _rdtw_sq
from .errors import DataError, UsageError
from .fileio import atomic_writer

METHOD_REFINED = "refined_motif"
METHOD_MATRIX_PROFILE = "matrix_profile"
METHOD_AVERAGE = "average_profile"

THRESHOLD_FIXED = "fixed"
THRESHOLD_DYNAMIC_MEDIAN = "dynamic-median"


@dataclass
class DistanceTable:
    """Symmetric table of pairwise distances between days, plus the
    threshold and mask it was built with."""

    d: np.ndarray
    threshold: float
    mask: MaskSpec
    threshold_mode: str = THRESHOLD_FIXED


@dataclass
class SimilarityProfile:
    """Per-day score sp = similar-day count minus normalised average distance.

    `row_sums` keeps the raw ascending-order distance sums so that
    incremental updates stay bit-identical to recomputation.
    """

    sp: np.ndarray
    c_hat: np.ndarray
    d_hat: np.ndarray
    row_sums: np.ndarray = field(repr=False)
    max_d: float = 0.0


@dataclass
class Motif:
    """A winning daily sub-pattern.

    For `refined_motif` the values are an exact row of the day matrix and
    `sp_value` is its similarity-profile score (larger is better).  For
    `matrix_profile` the values are the raw window at the closest
    z-normalised pair, `source_day_index` is the window start sample and
    `sp_value` is the nearest-neighbor distance (smaller is better).  For
    `average_profile` the values are a columnwise mean, with
    `source_day_index` = -1 and `sp_value` = nan.
    """

    consumer_id: str
    values: np.ndarray
    source_day_index: int
    sp_value: float
    method: str = METHOD_REFINED


@njit(cache=True)
def _pairwise_rdtw(rows, w):
    n = rows.shape[0]
    d = np.zeros((n, n))
    cells = 0
    for i in range(n):
        for j in range(i + 1, n):
            sq, c = _rdtw_sq(rows[i], rows[j], w)
            v = np.sqrt(sq)
            d[i, j] = v
            d[j, i] = v
            cells += c
    return d, cells


@njit(cache=True)
def _dists_to_rows(rows, y, w):
    n = rows.shape[0]
    out = np.empty(n)
    cells = 0
    for j in range(n):
        sq, c = _rdtw_sq(y, rows[j], w)
        out[j] = np.sqrt(sq)
        cells += c
    return out, cells


@njit(cache=True)
def _row_stats(d, threshold):
    # Ascending-j accumulation is part of the contract: incremental
    # updates append at the largest j and must reproduce these sums.
    n = d.shape[0]
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    max_d = 0.0
    for i in range(n):
        s = 0.0
        c = 0
        for j in range(n):
            if j == i:
                continue
            v = d[i, j]
            s += v
            if v <= threshold:
                c += 1
            if v > max_d:
                max_d = v
        sums[i] = s
        counts[i] = c
    return sums, counts, max_d


def distance_table(days: DayMatrix, mask: MaskSpec, threshold: float,
                   threshold_mode: str = THRESHOLD_FIXED) -> DistanceTable:
    """All-pairs masked-DTW distances between the days of one consumer.

    With `threshold_mode` = "dynamic-median" the passed threshold is
    ignored and the median off-diagonal distance of this table is used
    instead (experimental comparison mode; incremental updates refuse it).
    """
    n = days.n_days
    if n < 2:
        raise DataError(
            f"consumer {days.consumer_id}: insufficient days for motif "
            f"discovery (N={n}, need >= 2)"
        )
    if mask.m != days.samples_per_day:
        raise UsageError(
            f"mask m={mask.m} does not match day length {days.samples_per_day}"
        )
    rows = np.ascontiguousarray(days.rows, dtype=np.float64)
    if not np.isfinite(rows).all():
        raise DataError(f"consumer {days.consumer_id}: non-finite day values")
    w = build_weight_matrix(mask)
    d, cells = _pairwise_rdtw(rows, w.entries)
    _counters["r_dtw_calls"] += n * (n - 1) // 2
    _counters["dp_cells"] += int(cells)
    if threshold_mode == THRESHOLD_DYNAMIC_MEDIAN:
        threshold = float(np.median(offdiagonal_distances_of(d)))
    elif threshold_mode != THRESHOLD_FIXED:
        raise UsageError(f"unknown threshold mode: {threshold_mode}")
    if not (threshold >= 0.0):
        raise UsageError(f"threshold must be non-negative, got {threshold}")
    return DistanceTable(d=d, threshold=float(threshold), mask=mask,
                         threshold_mode=threshold_mode)


def offdiagonal_distances_of(d: np.ndarray) -> np.ndarray:
    """Upper-triangle distances of a table, ascending (i, j) order."""
    iu = np.triu_indices(d.shape[0], k=1)
    return d[iu]


def similarity_profile(table: DistanceTable) -> SimilarityProfile:
    """Count-and-average reduction of a distance table.

    A day j is similar to day i when d[i, j] <= threshold (self excluded);
    sp[i] = c_hat[i] - d_hat[i] / max_d with max_d the largest
    off-diagonal distance.  When all days are identical (max_d == 0)
    sp equals c_hat.
    """
    d = table.d
    n = d.shape[0]
    row_sums, c_hat, max_d = _row_stats(d, table.threshold)
    d_hat = row_sums / (n - 1)
    if max_d == 0.0:
        sp = c_hat.astype(np.float64)
    else:
        sp = c_hat - d_hat / max_d
    return SimilarityProfile(sp=sp, c_hat=c_hat, d_hat=d_hat,
                             row_sums=row_sums, max_d=float(max_d))


def extract_motif(days: DayMatrix, profile: SimilarityProfile) -> Motif:
    """Day with the largest similarity-profile value; ties go to the
    smallest day index."""
    if len(profile.sp) != days.n_days:
        raise UsageError(
            f"profile length {len(profile.sp)} != day count {days.n_days}"
        )
    best = int(np.argmax(profile.sp))
    return Motif(
        consumer_id=days.consumer_id,
        values=days.rows[best].copy(),
        source_day_index=best,
        sp_value=float(profile.sp[best]),
        method=METHOD_REFINED,
    )


def update_motif(table: DistanceTable, days: DayMatrix,
                 profile: SimilarityProfile, new_day: np.ndarray):
    """Append one day and refresh the motif in a single O(N)-kernel pass.

    Computes the N distances from the new day to every existing day,
    extends the table, carries the count/sum/max statistics forward, and
    re-extracts the motif.  The returned profile and motif are
    bit-identical to a full recomputation over the N+1 days.  Requires a
    fixed threshold; the dynamic-median mode would need every distance
    recomputed and is refused.
    """
    if table.threshold_mode != THRESHOLD_FIXED:
        raise UsageError(
            "incremental update requires a fixed threshold; table was "
            f"built with mode '{table.threshold_mode}'"
        )
    new_day = np.ascontiguousarray(new_day, dtype=np.float64)
    m = days.samples_per_day
    if new_day.ndim != 1 or new_day.shape[0] != m or table.mask.m != m:
        raise UsageError(
            f"new day length {new_day.shape} does not match table mask "
            f"m={table.mask.m}"
        )
    n = days.n_days
    if table.d.shape[0] != n or len(profile.sp) != n:
        raise UsageError("table, day matrix and profile sizes disagree")

    w = build_weight_matrix(table.mask)
    new_dists, cells = _dists_to_rows(
        np.ascontiguousarray(days.rows, dtype=np.float64), new_day, w.entries
    )
    _counters["r_dtw_calls"] += n
    _counters["dp_cells"] += int(cells)

    d2 = np.zeros((n + 1, n + 1))
    d2[:n, :n] = table.d
    d2[:n, n] = new_dists
    d2[n, :n] = new_dists
    table2 = DistanceTable(d=d2, threshold=table.threshold, mask=table.mask,
                           threshold_mode=table.threshold_mode)
    days2 = DayMatrix(
        consumer_id=days.consumer_id,
        rows=np.vstack([days.rows, new_day[None, :]]),
        day_index_origin=days.day_index_origin,
    )

    # Existing rows gain the new column at the largest j, so adding it to
    # the stored ascending-order sums reproduces a fresh accumulation.
    row_sums = np.append(profile.row_sums + new_dists, 0.0)
    s = 0.0
    for v in new_dists:
        s += v
    row_sums[n] = s
    similar = new_dists <= table.threshold
    c_hat = np.append(profile.c_hat + similar, int(similar.sum()))
    max_d = max(profile.max_d, float(new_dists.max()))
    d_hat = row_sums / n
    if max_d == 0.0:
        sp = c_hat.astype(np.float64)
    else:
        sp = c_hat - d_hat / max_d
    profile2 = SimilarityProfile(sp=sp, c_hat=c_hat, d_hat=d_hat,
                                 row_sums=row_sums, max_d=max_d)
    return table2, days2, profile2, extract_motif(days2, profile2)


@njit(cache=True)
def _nn_scan(zw, excl):
    # Lexicographic scan with strict improvement: the first pair reaching
    # the global minimum wins, so ties resolve to the lowest indices.
    n_w, m = zw.shape
    best = np.inf
    bi = 0
    bj = min(excl, n_w - 1)
    for i in range(n_w):
        for j in range(i + excl, n_w):
            acc = 0.0
            abandoned = False
            for t in range(m):
                d = zw[i, t] - zw[j, t]
                acc += d * d
                if acc >= best:
                    abandoned = True
                    break
            if not abandoned and acc < best:
                best = acc
                bi = i
                bj = j
    return bi, bj, best


def znormalized_windows(values: np.ndarray, m: int) -> np.ndarray:
    """Every length-m sliding window of `values`, z-normalised row-wise
    with the same population-std convention as distance.z_normalize."""
    wins = np.ascontiguousarray(sliding_window_view(values, m))
    mu = wins.mean(axis=1)
    sd = wins.std(axis=1)
    flat = sd < 1e-12
    sd_safe = np.where(flat, 1.0, sd)
    zw = (wins - mu[:, None]) / sd_safe[:, None]
    zw[flat] = 0.0
    return zw


def matrix_profile_motif(series: ConsumerSeries, m: int) -> Motif:
    """Nearest-neighbor motif over one-sample-step sliding windows.

    Brute-force all-pairs search with z-normalised Euclidean distance and
    a trivial-match exclusion zone of ceil(m/2): pairs closer than that
    in start position are ignored.  Returns the raw values of the first
    member of the closest pair.
    """
    values = np.ascontiguousarray(series.values, dtype=np.float64)
    n = values.shape[0]
    if n < 2 * m:
        raise DataError(
            f"consumer {series.consumer_id}: series too short for "
            f"window search (n={n}, need >= {2 * m})"
        )
    excl = (m + 1) // 2
    zw = znormalized_windows(values, m)
    bi, bj, best_sq = _nn_scan(zw, excl)
    return Motif(
        consumer_id=series.consumer_id,
        values=values[bi : bi + m].copy(),
        source_day_index=int(bi),
        sp_value=float(np.sqrt(best_sq)),
        method=METHOD_MATRIX_PROFILE,
    )


def write_motifs_csv(motifs: list[Motif], path) -> None:
    """Motif file: `consumer_id,method,source_day_index,sp_value,v0,...`.

    Values are written at full round-trip precision; the classifier
    stages read them back bit-identically.
    """
    if not motifs:
        raise UsageError("no motifs to write")
    m = len(motifs[0].values)
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["consumer_id", "method", "source_day_index", "sp_value"]
            + [f"v{i}" for i in range(m)]
        )
        for mo in motifs:
            if len(mo.values) != m:
                raise UsageError(
                    f"motif length mismatch for {mo.consumer_id}: "
                    f"{len(mo.values)} != {m}"
                )
            writer.writerow(
                [mo.consumer_id, mo.method, mo.source_day_index,
                 repr(mo.sp_value)] + [repr(float(v)) for v in mo.values]
            )


def read_motifs_csv(path) -> list[Motif]:
    motifs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:4] != [
            "consumer_id", "method", "source_day_index", "sp_value",
        ]:
            raise DataError(f"{path}: not a motif file (header {header})")
        m = len(header) - 4
        for lineno, row in enumerate(reader, start=2):
            try:
                motifs.append(Motif(
                    consumer_id=row[0],
                    method=row[1],
                    source_day_index=int(row[2]),
                    sp_value=float(row[3]),
                    values=np.array([float(v) for v in row[4 : 4 + m]]),
                ))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row: {exc}") from None
    return motifs


def write_table_csv(table: DistanceTable, consumer_id: str, path) -> None:
    """Debugging dump of a distance table."""
    with atomic_writer(path) as fh:
        fh.write(f"# consumer_id={consumer_id} threshold={table.threshold!r} "
                 f"mode={table.threshold_mode} "
                 f"mask={table.mask.window_start}:{table.mask.window_end}\n")
        writer = csv.writer(fh)
        for row in table.d:
            writer.writerow([repr(float(v)) for v in row])
