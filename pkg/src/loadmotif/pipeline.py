"""End-to-end orchestration used by the CLI and the demos.

Ties the stages together: deterministic train/test splitting of
consumers, threshold calibration, per-consumer motif extraction with an
optional worker pool, and the heating-scenario season slicing.  Every
function here is deterministic for fixed inputs and independent of the
worker count.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import baselines
from .config import RunConfig
from .core import (CleaningPolicy, ConsumerSeries, DayMatrix, MaskSpec,
                   clean_series, segment_days, slice_days)
from .datagen import SCENARIO_HEATING
from .errors import DataError, UsageError
from .motif import (METHOD_AVERAGE, METHOD_MATRIX_PROFILE, METHOD_REFINED,
                    DistanceTable, Motif, SimilarityProfile, distance_table,
                    extract_motif, matrix_profile_motif,
                    offdiagonal_distances_of, similarity_profile)


def split_ids(ids, test_fraction: float, seed: int):
    """Deterministic consumer split; returns (train_ids, test_ids),
    each sorted."""
    if not 0.0 < test_fraction < 1.0:
        raise UsageError(f"test fraction must be in (0, 1), got {test_fraction}")
    ids = sorted(ids)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    n_test = round(len(ids) * test_fraction)
    test = {ids[i] for i in perm[:n_test]}
    return [c for c in ids if c not in test], sorted(test)


def cleaning_policy(cfg: RunConfig) -> CleaningPolicy:
    return CleaningPolicy(
        gap_fill_max_samples=cfg.gap_fill_max_samples,
        align_midnight=cfg.align_midnight,
    )


def seasonal_slice(series: ConsumerSeries, cfg: RunConfig) -> ConsumerSeries:
    """The motif-relevant part of a cleaned series: everything for the pv
    scenario (a summer slice by construction), the second half of the
    days (winter) for the heating scenario."""
    if cfg.scenario != SCENARIO_HEATING:
        return series
    m = series.samples_per_day
    n_days = len(series.values) // m
    if n_days < 4:
        raise DataError(
            f"consumer {series.consumer_id}: too few days ({n_days}) to "
            "split into seasons"
        )
    return slice_days(series, n_days // 2, n_days)


def summer_winter(series: ConsumerSeries):
    """First-half/second-half season views of a cleaned heating series."""
    m = series.samples_per_day
    n_days = len(series.values) // m
    half = n_days // 2
    return slice_days(series, 0, half), slice_days(series, half, n_days)


@dataclass
class MotifDiscovery:
    motif: Motif
    table: DistanceTable
    profile: SimilarityProfile
    days: DayMatrix


def discover_refined_motif(series: ConsumerSeries, mask: MaskSpec,
                           threshold: float,
                           threshold_mode: str = "fixed") -> MotifDiscovery:
    """Segment a cleaned series and run the full table -> profile ->
    motif chain for one consumer."""
    days = segment_days(series)
    table = distance_table(days, mask, threshold, threshold_mode)
    profile = similarity_profile(table)
    return MotifDiscovery(
        motif=extract_motif(days, profile),
        table=table,
        profile=profile,
        days=days,
    )


def calibrate_threshold(series_list, cfg: RunConfig) -> float:
    """Median off-diagonal masked-DTW distance, pooled over a fixed
    number of training-split consumers, frozen for the whole run.

    The calibration consumers are the first `threshold_calibration_consumers`
    of the training split in id order, so the value is reproducible and
    never peeks at the test split.
    """
    train, _ = split_ids([s.consumer_id for s in series_list],
                         cfg.split_fraction, cfg.split_seed)
    chosen = set(train[: cfg.threshold_calibration_consumers])
    if not chosen:
        raise DataError("no training consumers available for calibration")
    policy = cleaning_policy(cfg)
    pooled = []
    mask = None
    for s in series_list:
        if s.consumer_id not in chosen:
            continue
        sliced = seasonal_slice(clean_series(s, policy), cfg)
        days = segment_days(sliced)
        if mask is None:
            mask = cfg.mask_spec(days.samples_per_day)
        table = distance_table(days, mask, 0.0)
        pooled.append(offdiagonal_distances_of(table.d))
    return float(np.median(np.concatenate(pooled)))


_JOB_CFG: dict = {}


def _init_worker(cfg: RunConfig, method: str, threshold: float):
    _JOB_CFG["cfg"] = cfg
    _JOB_CFG["method"] = method
    _JOB_CFG["threshold"] = threshold


def _motif_job(series: ConsumerSeries) -> Motif:
    cfg: RunConfig = _JOB_CFG["cfg"]
    method = _JOB_CFG["method"]
    threshold = _JOB_CFG["threshold"]
    cleaned = seasonal_slice(clean_series(series, cleaning_policy(cfg)), cfg)
    m = cleaned.samples_per_day
    if method == METHOD_REFINED:
        found = discover_refined_motif(
            cleaned, cfg.mask_spec(m), threshold, cfg.threshold_mode
        )
        return found.motif
    if method == METHOD_MATRIX_PROFILE:
        return matrix_profile_motif(cleaned, m)
    if method == METHOD_AVERAGE:
        days = segment_days(cleaned)
        return Motif(
            consumer_id=cleaned.consumer_id,
            values=baselines.average_daily_profile(days),
            source_day_index=-1,
            sp_value=float("nan"),
            method=METHOD_AVERAGE,
        )
    raise UsageError(f"unknown motif method: {method!r}")


def extract_motifs(series_list, cfg: RunConfig,
                   method: str = METHOD_REFINED) -> list[Motif]:
    """Per-consumer motif extraction, optionally on a worker pool.

    Consumers are processed independently and results are returned in
    input order, so the output is identical for any worker count.
    """
    threshold = cfg.fixed_threshold()
    if threshold is None:
        if method == METHOD_REFINED and cfg.threshold_mode == "fixed":
            threshold = calibrate_threshold(series_list, cfg)
        else:
            threshold = 0.0
    workers = cfg.effective_workers()
    if workers <= 1 or len(series_list) < 4:
        _init_worker(cfg, method, threshold)
        return [_motif_job(s) for s in series_list]
    with multiprocessing.Pool(
        workers, initializer=_init_worker, initargs=(cfg, method, threshold)
    ) as pool:
        return pool.map(_motif_job, series_list, chunksize=8)


def motif_matrix(motifs: list[Motif]):
    """Stack motif values into (ids, k x m matrix) sorted by consumer id."""
    motifs = sorted(motifs, key=lambda mo: mo.consumer_id)
    ids = [mo.consumer_id for mo in motifs]
    return ids, np.vstack([mo.values for mo in motifs])
