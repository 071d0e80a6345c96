"""Run configuration: every tunable constant in one declarative record.

A config loads from a YAML/JSON mapping, round-trips losslessly, and is
validated on construction so bad values fail at startup rather than deep
inside a replay.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import InvalidConfig


@dataclass
class RunConfig:
    percentile: float = 2.0
    convergence_threshold: float = 0.1
    consecutive_days: int = 2
    window_seconds: int = 60
    gap_zero_seconds: int = 60
    gap_one_seconds: int = 3600
    kde_bins: int = 256
    levenshtein_top_k: int = 50
    decile_saturation_fraction: float = 1.0 / 3.0
    min_day_events: int = 50
    threshold_window_days: int = 7
    drift_breach_distance: float = 0.2
    drift_breach_days: int = 3
    drift_baseline_days: int = 7
    retrain_window_seconds: int = 4 * 3600
    retrain_auto_extend: bool = True
    utc_offset_seconds: int = 0
    seed: int = 7

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        checks = [
            (0.0 < self.percentile < 100.0, "percentile must be in (0, 100)"),
            (self.convergence_threshold > 0, "convergence_threshold must be > 0"),
            (self.consecutive_days >= 1, "consecutive_days must be >= 1"),
            (
                self.window_seconds > 0 and 86400 % self.window_seconds == 0,
                "window_seconds must be > 0 and divide a day",
            ),
            (
                0 <= self.gap_zero_seconds < self.gap_one_seconds,
                "gap bounds must satisfy 0 <= gap_zero < gap_one",
            ),
            (self.kde_bins >= 2, "kde_bins must be >= 2"),
            (self.levenshtein_top_k >= 1, "levenshtein_top_k must be >= 1"),
            (
                self.decile_saturation_fraction > 0,
                "decile_saturation_fraction must be > 0",
            ),
            (self.min_day_events >= 0, "min_day_events must be >= 0"),
            (self.threshold_window_days >= 1, "threshold_window_days must be >= 1"),
            (self.drift_breach_distance > 0, "drift_breach_distance must be > 0"),
            (self.drift_breach_days >= 1, "drift_breach_days must be >= 1"),
            (self.drift_baseline_days >= 1, "drift_baseline_days must be >= 1"),
            (self.retrain_window_seconds > 0, "retrain_window_seconds must be > 0"),
            (
                self.utc_offset_seconds % 60 == 0,
                "utc_offset_seconds must be a whole number of minutes",
            ),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidConfig(message)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        raw = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(raw)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise InvalidConfig(f"{path}: config must be a mapping")
        return cls.from_dict(data)

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(
            yaml.safe_dump(self.to_dict(), sort_keys=True), encoding="utf-8"
        )
