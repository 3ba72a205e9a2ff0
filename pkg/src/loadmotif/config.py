"""Flat key-value run configuration.

Config files are `key = value` lines with `#` comments.  Every key has a
scenario-aware default; unknown keys are rejected so typos fail fast.
The resolved configuration can be serialised back to canonical text,
which each CLI command drops next to its outputs for reproducibility.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .core import MASK_PRESETS, MaskSpec
from .datagen import SCENARIO_HEATING, SCENARIO_PV, PopulationConfig
from .errors import ConfigError

WORKERS_ENV_VAR = "LOADMOTIF_WORKERS"


@dataclass
class RunConfig:
    scenario: str = SCENARIO_PV

    # ingest / cleaning
    interval_minutes: int = 30
    gap_fill_max_samples: int = 4
    align_midnight: bool = True

    # motif discovery
    mask: str = "daylight"              # preset name or "START:END" samples
    threshold: str = "auto"             # "auto" or a number
    threshold_mode: str = "fixed"       # "fixed" or "dynamic-median"
    threshold_calibration_consumers: int = 16

    # synthetic population
    n_consumers: int = 600
    positive_fraction: float = 0.5
    days: int = 90
    seed: int = 7
    hard_cases: int = 0
    pv_capacity_range: str = "2.0:8.0"
    base_load_scale_range: str = "0.6:1.6"
    cloud_noise: float = 0.15
    heating_winter_boost_range: str = "1.3:3.0"

    # split + classifier
    split_fraction: float = 0.25
    split_seed: int = 13
    learning_rate: float = 0.05
    epochs: int = 2000
    train_seed: int = 0
    init_scale: float = 0.01
    classifier_mask: bool = True

    # baselines + reporting
    zero_threshold: int = 2000
    cz_epsilon: float = 0.0
    ld_quantile_points: int = 100
    ld_threshold: str = "auto"
    histogram_bins: int = 20

    # execution
    workers: int = 0                    # 0 = env var or 1
    dump_tables: bool = False

    def mask_spec(self, m: int) -> MaskSpec:
        if self.mask in MASK_PRESETS:
            return MASK_PRESETS[self.mask](m)
        try:
            start, end = self.mask.split(":")
            return MaskSpec(int(start), int(end), m)
        except (ValueError, TypeError):
            raise ConfigError(
                f"mask must be one of {sorted(MASK_PRESETS)} or START:END, "
                f"got {self.mask!r}"
            ) from None

    def fixed_threshold(self) -> float | None:
        """The configured threshold value, or None when set to auto."""
        if self.threshold == "auto":
            return None
        try:
            return float(self.threshold)
        except ValueError:
            raise ConfigError(
                f"threshold must be 'auto' or a number, got {self.threshold!r}"
            ) from None

    def ld_fixed_threshold(self) -> float | None:
        if self.ld_threshold == "auto":
            return None
        try:
            return float(self.ld_threshold)
        except ValueError:
            raise ConfigError(
                f"ld_threshold must be 'auto' or a number, got {self.ld_threshold!r}"
            ) from None

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get(WORKERS_ENV_VAR, "")
        if env:
            try:
                n = int(env)
            except ValueError:
                raise ConfigError(
                    f"{WORKERS_ENV_VAR} must be an integer, got {env!r}"
                ) from None
            if n > 0:
                return n
        return 1

    def population_config(self) -> PopulationConfig:
        return PopulationConfig(
            n_consumers=self.n_consumers,
            positive_fraction=self.positive_fraction,
            days=self.days,
            interval_minutes=self.interval_minutes,
            scenario=self.scenario,
            seed=self.seed,
            pv_capacity_range=_parse_range(self.pv_capacity_range),
            base_load_scale_range=_parse_range(self.base_load_scale_range),
            cloud_noise=self.cloud_noise,
            heating_winter_boost_range=_parse_range(
                self.heating_winter_boost_range
            ),
        )

    def resolved_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


SCENARIO_DEFAULTS = {
    SCENARIO_PV: {},
    SCENARIO_HEATING: {
        "mask": "all",
        "classifier_mask": False,
        "positive_fraction": 0.15,
        "n_consumers": 400,
        "days": 45,
    },
}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_range(raw) -> tuple[float, float]:
    if isinstance(raw, tuple):
        return raw
    try:
        lo, hi = str(raw).split(":")
        return float(lo), float(hi)
    except ValueError:
        raise ConfigError(f"expected a LO:HI range, got {raw!r}") from None


def read_kv_config(path) -> dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment."""
    mapping: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = stripped.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


def build_run_config(mapping: dict[str, str] | None = None,
                     overrides: dict[str, str] | None = None) -> RunConfig:
    """Resolve a RunConfig from scenario defaults, a config-file mapping
    and command-line overrides, in that precedence order."""
    merged: dict[str, str] = {}
    merged.update(mapping or {})
    merged.update(overrides or {})

    scenario = merged.get("scenario", SCENARIO_PV)
    if scenario not in SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario: {scenario!r}")
    cfg = RunConfig(scenario=scenario, **SCENARIO_DEFAULTS[scenario])

    field_types = {f.name: f.type for f in fields(RunConfig)}
    for key, raw in merged.items():
        if key == "scenario":
            continue
        if key not in field_types:
            raise ConfigError(f"unknown configuration key: {key!r}")
        current = getattr(cfg, key)
        try:
            if isinstance(current, bool):
                value = _parse_bool(raw)
            elif isinstance(current, int):
                value = int(raw)
            elif isinstance(current, float):
                value = float(raw)
            else:
                value = str(raw)
        except ValueError:
            raise ConfigError(
                f"bad value for {key}: {raw!r} (expected {type(current).__name__})"
            ) from None
        setattr(cfg, key, value)
    return cfg
