"""Distance kernels for daily sub-patterns.

Plain Euclidean distance, full-alignment dynamic time warping, the
mask-weighted DTW variant used for motif discovery, and z-normalization
for the sliding-window baseline.  The DP kernels are numba-compiled and
keep per-process instrumentation counters (kernel invocations and DP
cells visited) so tests can pin the Theta(m^2) cost and the O(N) cost of
incremental updates.

Sub-patterns are 1-D float arrays of a shared length m.  Kernels are
pure; the counters are diagnostics only and do not affect results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import WeightMatrix
from .errors import UsageError

_counters = {"dtw_calls": 0, "r_dtw_calls": 0, "dp_cells": 0}


def reset_kernel_counters() -> None:
    for k in _counters:
        _counters[k] = 0


def kernel_counters() -> dict:
    """Snapshot of per-process instrumentation counters."""
    return dict(_counters)


@njit(cache=True)
def _euclidean_sq(x, y):
    # Sequential accumulation, same order as the DP diagonal, so that
    # dtw(x, y) <= euclidean(x, y) holds exactly in floating point.
    acc = 0.0
    for i in range(x.shape[0]):
        d = x[i] - y[i]
        acc += d * d
    return acc


@njit(cache=True)
def _dtw_sq(x, y):
    m = x.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    cells = 0
    for i in range(1, m + 1):
        xi = x[i - 1]
        cur[0] = np.inf
        for j in range(1, m + 1):
            d = xi - y[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d * d + best
            cells += 1
        prev, cur = cur, prev
    return prev[m], cells


@njit(cache=True)
def _rdtw_sq(x, y, w):
    m = x.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    cells = 0
    for i in range(1, m + 1):
        xi = x[i - 1]
        cur[0] = np.inf
        for j in range(1, m + 1):
            d = xi - y[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = w[i - 1, j - 1] * d * d + best
            cells += 1
        prev, cur = cur, prev
    return prev[m], cells


def _as_pair(x, y):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise UsageError("sub-patterns must be 1-D")
    if x.shape[0] != y.shape[0]:
        raise UsageError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise UsageError("sub-patterns must be non-empty")
    return x, y


def euclidean(x, y) -> float:
    """Pointwise Euclidean distance between equal-length sub-patterns."""
    x, y = _as_pair(x, y)
    return float(np.sqrt(_euclidean_sq(x, y)))


def dtw(x, y) -> float:
    """Full-alignment DTW distance.

    Square root of the cumulative cost at the (m, m) corner of the DP
    table; boundary cost is 0 at the origin and +inf along the first row
    and column, so dtw(x, x) == 0 exactly.
    """
    x, y = _as_pair(x, y)
    cost, cells = _dtw_sq(x, y)
    _counters["dtw_calls"] += 1
    _counters["dp_cells"] += int(cells)
    return float(np.sqrt(cost))


def r_dtw(x, y, w: WeightMatrix | np.ndarray) -> float:
    """DTW with each cell cost scaled by the weight matrix entry.

    With an all-ones matrix this equals :func:`dtw`; with the daytime
    mask matrix, alignments where both samples fall outside the window
    cost nothing, emphasising the daytime shape.
    """
    x, y = _as_pair(x, y)
    entries = w.entries if isinstance(w, WeightMatrix) else np.asarray(w, np.float64)
    if entries.shape != (x.shape[0], x.shape[0]):
        raise UsageError(
            f"weight matrix shape {entries.shape} does not match m={x.shape[0]}"
        )
    entries = np.ascontiguousarray(entries, dtype=np.float64)
    cost, cells = _rdtw_sq(x, y, entries)
    _counters["r_dtw_calls"] += 1
    _counters["dp_cells"] += int(cells)
    return float(np.sqrt(cost))


def z_normalize(x) -> np.ndarray:
    """(x - mean) / population std; constant inputs map to the zero vector."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise UsageError("z_normalize needs a 1-D sub-pattern of length >= 2")
    sd = float(np.std(x))
    if sd < 1e-12:
        return np.zeros_like(x)
    return (x - np.mean(x)) / sd
