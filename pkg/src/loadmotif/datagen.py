"""Deterministic synthetic smart-meter populations with ground truth.

Stands in for private utility datasets in two scenarios: `pv` (rooftop
solar owners whose daytime import collapses toward zero) and `heating`
(electric-heating households whose winter consumption is boosted).  Each
consumer draws from its own seed-derived stream, so populations are
reproducible byte for byte and adding consumers never perturbs existing
ones.

Scenario layout: `pv` emits `days` summer days per consumer; `heating`
emits 2 x `days` days, the first half summer and the second half winter
(season membership is positional, calendar dates are nominal).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .core import ConsumerSeries
from .errors import ConfigError, DataError
from .fileio import atomic_writer

SCENARIO_PV = "pv"
SCENARIO_HEATING = "heating"

# Daytime window used for the consumption metadata (06:00-19:00).
DAYTIME_START_HOUR = 6
DAYTIME_END_HOUR = 19

GROUND_TRUTH_COLUMNS = (
    "consumer_id",
    "label",
    "capacity_or_multiplier",
    "total_generation",
    "total_daytime_consumption",
)


@dataclass(frozen=True)
class PopulationConfig:
    n_consumers: int = 600
    positive_fraction: float = 0.5
    days: int = 90
    interval_minutes: int = 30
    scenario: str = SCENARIO_PV
    seed: int = 7
    pv_capacity_range: tuple[float, float] = (2.0, 8.0)
    base_load_scale_range: tuple[float, float] = (0.6, 1.6)
    cloud_noise: float = 0.15
    heating_winter_boost_range: tuple[float, float] = (1.3, 3.0)

    def __post_init__(self):
        if self.n_consumers < 2:
            raise ConfigError("n_consumers must be >= 2")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ConfigError("positive_fraction must be in [0, 1]")
        if self.days < 2:
            raise ConfigError("days must be >= 2")
        if self.interval_minutes <= 0 or 1440 % self.interval_minutes != 0:
            raise ConfigError("interval_minutes must divide a day")
        if self.scenario not in (SCENARIO_PV, SCENARIO_HEATING):
            raise ConfigError(f"unknown scenario: {self.scenario}")
        for name in ("pv_capacity_range", "base_load_scale_range",
                     "heating_winter_boost_range"):
            lo, hi = getattr(self, name)
            if not (0.0 <= lo <= hi):
                raise ConfigError(f"{name} must be an ordered pair, got ({lo}, {hi})")
        if not 0.0 <= self.cloud_noise <= 1.0:
            raise ConfigError("cloud_noise must be in [0, 1]")

    @property
    def samples_per_day(self) -> int:
        return 1440 // self.interval_minutes

    @property
    def n_positive(self) -> int:
        return round(self.n_consumers * self.positive_fraction)

    @property
    def total_days(self) -> int:
        return self.days if self.scenario == SCENARIO_PV else 2 * self.days


@dataclass
class GroundTruthEntry:
    label: int
    capacity_or_multiplier: float
    total_generation: float
    total_daytime_consumption: float
    hard_case: bool = False


@dataclass
class GroundTruth:
    """Per-consumer labels and generation/demand metadata."""

    entries: dict[str, GroundTruthEntry] = field(default_factory=dict)

    def __getitem__(self, consumer_id: str) -> GroundTruthEntry:
        return self.entries[consumer_id]

    def __contains__(self, consumer_id: str) -> bool:
        return consumer_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def items(self):
        return self.entries.items()


def _bump(hours, center, width):
    return np.exp(-0.5 * ((hours - center) / width) ** 2)


def _midnight_bump(hours, center, width):
    # Circular in the 24 h cycle so a spike can straddle midnight.
    dh = np.abs(hours - center)
    dh = np.minimum(dh, 24.0 - dh)
    return np.exp(-0.5 * (dh / width) ** 2)


def _simulate_consumer(cfg: PopulationConfig, idx: int, hard_case: bool):
    rng = np.random.default_rng([cfg.seed, idx])
    m = cfg.samples_per_day
    hours = (np.arange(m) + 0.5) * (cfg.interval_minutes / 60.0)
    positive = idx < cfg.n_positive
    n_days = cfg.total_days

    # Night import sits near (but never exactly at) zero, as for real
    # households; only PV clipping can produce literal zeros.
    base = rng.uniform(*cfg.base_load_scale_range)
    night_floor = base * rng.uniform(0.01, 0.04)
    morning_amp = base * rng.uniform(0.25, 0.60)
    morning_at = rng.uniform(6.5, 8.5)
    morning_w = rng.uniform(0.8, 1.6)
    evening_amp = base * rng.uniform(0.50, 1.10)
    evening_at = rng.uniform(17.5, 20.5)
    evening_w = rng.uniform(1.5, 3.0)
    day_amp = base * rng.uniform(0.15, 0.35)

    has_ctrl = cfg.scenario == SCENARIO_PV and rng.random() < 0.4
    if has_ctrl:
        ctrl_amp = rng.uniform(0.8, 2.0)

    capacity = 0.0
    heat_mult = 1.0
    if cfg.scenario == SCENARIO_PV and positive:
        capacity = rng.uniform(*cfg.pv_capacity_range)
    if cfg.scenario == SCENARIO_HEATING:
        winter_base = rng.uniform(1.05, 1.30)
        if positive:
            heat_mult = rng.uniform(*cfg.heating_winter_boost_range)
    if hard_case:
        # Low-ratio cohort: smallest realistic PV system plus a heavy
        # daytime demand, the combination the motif cannot separate.
        capacity = 1.0
        day_amp = base * 3.5 * 0.30

    profile = (
        night_floor
        + morning_amp * _bump(hours, morning_at, morning_w)
        + evening_amp * _bump(hours, evening_at, evening_w)
        + day_amp * _bump(hours, 13.0, 3.5)
    )
    interval_h = cfg.interval_minutes / 60.0
    day_start = round(DAYTIME_START_HOUR * m / 24)
    day_end = round(DAYTIME_END_HOUR * m / 24)

    imported = np.empty(n_days * m)
    total_gen = 0.0
    total_daytime = 0.0
    for d in range(n_days):
        amp_day = 1.0 + rng.normal(0.0, 0.08)
        load = profile * amp_day * (1.0 + rng.normal(0.0, 0.10, m))
        if has_ctrl:
            center = (24.0 + rng.normal(0.0, 0.5)) % 24.0
            load = load + ctrl_amp * _midnight_bump(hours, center, 0.7)
        load = np.maximum(load, 0.01)

        if cfg.scenario == SCENARIO_HEATING and d >= cfg.days:
            cold = rng.uniform(0.55, 1.0)
            load = load * winter_base
            if heat_mult > 1.0:
                # Resistive heating is an additive draw, heaviest through
                # the cold night hours and eased by midday sun.
                shape = 1.0 - 0.45 * _bump(hours, 14.0, 4.0)
                heat = (heat_mult - 1.0) * cold * 0.35 * shape
                heat = heat * (1.0 + rng.normal(0.0, 0.10, m))
                load = load + np.maximum(heat, 0.0)

        gen = np.zeros(m)
        if capacity > 0.0:
            # Clear-sky half-sine whose daylight window drifts about an
            # hour across the season, stretching and shifting the shape.
            ramp = 1.0 - 2.0 * d / max(n_days - 1, 1)
            sunrise = 6.0 - ramp
            sunset = 19.0 + ramp
            bell = np.sin(np.pi * (hours - sunrise) / (sunset - sunrise))
            bell = np.where((hours > sunrise) & (hours < sunset), bell, 0.0)
            if rng.random() < 0.2:
                sky = rng.uniform(0.05, 0.45)
            else:
                sky = rng.uniform(1.0 - cfg.cloud_noise, 1.0)
            gen = capacity * interval_h * bell * sky

        total_gen += float(gen.sum())
        total_daytime += float(load[day_start:day_end].sum())
        imported[d * m : (d + 1) * m] = np.maximum(load - gen, 0.0)

    cid = f"C{idx:04d}"
    series = ConsumerSeries(
        consumer_id=cid,
        start_time=datetime(2021, 1, 1),
        interval_minutes=cfg.interval_minutes,
        values=imported,
        label=int(positive),
    )
    entry = GroundTruthEntry(
        label=int(positive),
        capacity_or_multiplier=capacity if cfg.scenario == SCENARIO_PV else heat_mult,
        total_generation=total_gen,
        total_daytime_consumption=total_daytime,
        hard_case=hard_case,
    )
    return series, entry


def simulate_population(cfg: PopulationConfig):
    """Generate the configured population.

    Returns (series list ordered by consumer_id, GroundTruth).
    """
    return emit_low_ratio_cohort(cfg, 0)


def emit_low_ratio_cohort(cfg: PopulationConfig, k: int):
    """Like :func:`simulate_population` but turns the first k positives
    into hard cases: 1.0 kW systems with high daytime demand, the cohort
    with the lowest generation-to-daytime-consumption ratios."""
    if k < 0:
        raise ConfigError("k must be >= 0")
    if k > 0 and cfg.scenario != SCENARIO_PV:
        raise ConfigError("the low-ratio cohort only exists in the pv scenario")
    if k > cfg.n_positive:
        raise ConfigError(
            f"k={k} exceeds the {cfg.n_positive} positives in the population"
        )
    series = []
    truth = GroundTruth()
    for idx in range(cfg.n_consumers):
        s, entry = _simulate_consumer(cfg, idx, hard_case=idx < k)
        series.append(s)
        truth.entries[s.consumer_id] = entry
    return series, truth


def write_consumers_csv(series_list, path) -> None:
    """Emit the standard `consumer_id,timestamp,kwh` ingest format."""
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["consumer_id", "timestamp", "kwh"])
        for s in series_list:
            stamps = _timestamp_strings(s)
            cid = s.consumer_id
            for ts, v in zip(stamps, s.values):
                writer.writerow([cid, ts, "%.6g" % v])


def _timestamp_strings(s: ConsumerSeries) -> list[str]:
    m = s.samples_per_day
    n_days = (len(s.values) + m - 1) // m
    times = [
        (s.start_time + timedelta(minutes=i * s.interval_minutes)).strftime("%H:%M:%S")
        for i in range(m)
    ]
    out = []
    for d in range(n_days):
        day = (s.start_time + timedelta(days=d)).strftime("%Y-%m-%d")
        out.extend(f"{day}T{t}" for t in times)
    return out[: len(s.values)]


def write_ground_truth(truth: GroundTruth, path) -> None:
    with atomic_writer(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUND_TRUTH_COLUMNS)
        for cid in sorted(truth.entries):
            e = truth.entries[cid]
            writer.writerow([
                cid, e.label, repr(e.capacity_or_multiplier),
                repr(e.total_generation), repr(e.total_daytime_consumption),
            ])


def load_ground_truth(path) -> GroundTruth:
    truth = GroundTruth()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != GROUND_TRUTH_COLUMNS:
            raise DataError(f"{path}: unexpected ground-truth header {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                truth.entries[row[0]] = GroundTruthEntry(
                    label=int(row[1]),
                    capacity_or_multiplier=float(row[2]),
                    total_generation=float(row[3]),
                    total_daytime_consumption=float(row[4]),
                )
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{lineno}: malformed row: {exc}") from None
    return truth
