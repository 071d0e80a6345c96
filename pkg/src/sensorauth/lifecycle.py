"""Training/deployment lifecycle: convergence-driven deployment, the
percentile-based detection threshold, drift detection, and retraining.

The device starts in training, flips to deployed once the profile has
stabilised, and challenges the user whenever a comfort sample falls below
the current threshold.  The threshold is the trailing median of daily
low-percentile comfort values, so one odd day cannot move it.  Drift is
flagged when the daily comfort distribution stays far from its deployed
baseline for several consecutive days; it only ever raises a suggestion,
never an automatic retrain.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import (
    BaselineNotReady,
    DoubleClose,
    EmptyDay,
    NoHistory,
    NotAuthenticated,
)
from .stability import DayDistance, is_converged

if TYPE_CHECKING:  # pragma: no cover
    from .comfort import ComfortSample
    from .config import RunConfig
    from .profile import Profile

DECILES = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0)

# Max Euclidean distance between two 9-decile vectors on the [-1, 1] comfort
# scale is sqrt(9 * 2^2) = 6; dividing by 2 makes a uniform shift of 2/3
# saturate the configured breach scale.
DRIFT_NORMALIZER = 2.0


class Phase(str, enum.Enum):
    TRAINING = "training"
    DEPLOYED = "deployed"
    RETRAINING = "retraining"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.value


class RetrainMode(str, enum.Enum):
    UPDATE = "update"
    FRESH = "fresh"


@dataclass
class LifecycleState:
    phase: Phase = Phase.TRAINING
    retrain_deadline: int | None = None
    deployed_since: int | None = None

    def copy(self) -> "LifecycleState":
        return LifecycleState(self.phase, self.retrain_deadline, self.deployed_since)

    def to_dict(self) -> dict:
        return {
            "phase": self.phase.value,
            "retrain_deadline": self.retrain_deadline,
            "deployed_since": self.deployed_since,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LifecycleState":
        return cls(
            phase=Phase(data["phase"]),
            retrain_deadline=data["retrain_deadline"],
            deployed_since=data["deployed_since"],
        )


def nearest_rank(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: element at 1-based index ceil(p/100 * N)."""
    if not values:
        raise EmptyDay("no samples")
    if not 0.0 < p < 100.0:
        raise ValueError(f"percentile {p} must be in (0, 100)")
    ordered = sorted(values)
    idx = math.ceil(p / 100.0 * len(ordered))
    return ordered[max(idx, 1) - 1]


def _aggregates(samples: Iterable) -> list[float]:
    return [s.aggregate if hasattr(s, "aggregate") else float(s) for s in samples]


def daily_percentile(samples: Iterable, p: float) -> float:
    """Comfort value at the p-th percentile of one day's samples."""
    return nearest_rank(_aggregates(samples), p)


def comfort_deciles(samples: Iterable) -> list[float]:
    values = _aggregates(samples)
    return [nearest_rank(values, p) for p in DECILES]


@dataclass
class ThresholdState:
    """Daily low-percentile values and the smoothed threshold over them."""

    percentile: float = 2.0
    window_days: int = 7
    daily: list[tuple[int, float]] = field(default_factory=list)
    current: float | None = None

    def add_day(self, day: int, value: float) -> None:
        self.daily.append((day, value))
        recent = [v for _, v in self.daily[-self.window_days:]]
        self.current = statistics.median(recent)

    def current_threshold(self) -> float:
        if self.current is None:
            raise NoHistory("no daily percentile values yet")
        return self.current

    def copy(self) -> "ThresholdState":
        dup = ThresholdState(self.percentile, self.window_days)
        dup.daily = list(self.daily)
        dup.current = self.current
        return dup

    def to_dict(self) -> dict:
        return {
            "percentile": self.percentile,
            "window_days": self.window_days,
            "daily": [[d, v] for d, v in self.daily],
            "current": self.current,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdState":
        dup = cls(float(data["percentile"]), int(data["window_days"]))
        dup.daily = [(int(d), float(v)) for d, v in data["daily"]]
        dup.current = None if data["current"] is None else float(data["current"])
        return dup


@dataclass
class DriftState:
    """Comfort-distribution baseline and consecutive-breach counter."""

    breach_distance: float = 0.2
    breach_days: int = 3
    baseline_days: int = 7
    baseline_deciles: list[float] | None = None
    pending: list[list[float]] = field(default_factory=list)
    consecutive_breaches: int = 0

    @property
    def baseline_ready(self) -> bool:
        return self.baseline_deciles is not None

    def accumulate(self, deciles: Sequence[float]) -> None:
        """Feed one deployed day toward the baseline; freezes it when full."""
        self.pending.append(list(deciles))
        if len(self.pending) >= self.baseline_days:
            cols = zip(*self.pending)
            self.baseline_deciles = [sum(c) / len(self.pending) for c in cols]
            self.pending = []

    def distance_to_baseline(self, deciles: Sequence[float]) -> float:
        if self.baseline_deciles is None:
            raise BaselineNotReady("drift baseline not established")
        diff = sum((a - b) ** 2 for a, b in zip(deciles, self.baseline_deciles))
        return math.sqrt(diff) / DRIFT_NORMALIZER

    def copy(self) -> "DriftState":
        dup = DriftState(self.breach_distance, self.breach_days, self.baseline_days)
        dup.baseline_deciles = (
            None if self.baseline_deciles is None else list(self.baseline_deciles)
        )
        dup.pending = [list(v) for v in self.pending]
        dup.consecutive_breaches = self.consecutive_breaches
        return dup

    def to_dict(self) -> dict:
        return {
            "breach_distance": self.breach_distance,
            "breach_days": self.breach_days,
            "baseline_days": self.baseline_days,
            "baseline_deciles": self.baseline_deciles,
            "pending": self.pending,
            "consecutive_breaches": self.consecutive_breaches,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DriftState":
        dup = cls(
            float(data["breach_distance"]),
            int(data["breach_days"]),
            int(data["baseline_days"]),
        )
        raw = data["baseline_deciles"]
        dup.baseline_deciles = None if raw is None else [float(v) for v in raw]
        dup.pending = [[float(v) for v in row] for row in data["pending"]]
        dup.consecutive_breaches = int(data["consecutive_breaches"])
        return dup


def check_drift(ds: DriftState, day_samples: Iterable) -> tuple[DriftState, bool]:
    """Update the breach counter with one day's comfort distribution."""
    deciles = comfort_deciles(day_samples)
    distance = ds.distance_to_baseline(deciles)
    if distance > ds.breach_distance:
        ds.consecutive_breaches += 1
    else:
        ds.consecutive_breaches = 0
    return ds, ds.consecutive_breaches >= ds.breach_days


@dataclass(frozen=True)
class Decision:
    """Outcome of one comfort sample against the current threshold.

    Carries the temporal/spatial breakdown so a challenge can be explained.
    """

    window_start: int
    decision: str  # "comfortable" or "challenge"
    aggregate: float
    threshold: float
    temporal: float
    spatial: float

    @property
    def challenged(self) -> bool:
        return self.decision == "challenge"


def decide(sample: "ComfortSample", ts: ThresholdState) -> Decision:
    threshold = ts.current_threshold()
    verdict = "challenge" if sample.aggregate < threshold else "comfortable"
    return Decision(
        window_start=sample.window_start,
        decision=verdict,
        aggregate=sample.aggregate,
        threshold=threshold,
        temporal=sample.temporal,
        spatial=sample.spatial,
    )


class LifecycleController:
    """Single-writer authority over one profile's lifecycle.

    Day-boundary bookkeeping goes through end_of_day(); explicit user
    actions go through begin_retrain().  The controller owns the profile
    reference because a fresh retrain replaces the profile object.
    """

    def __init__(self, profile: "Profile", config: "RunConfig") -> None:
        self.profile = profile
        self.config = config
        self.last_closed_day: int | None = None

    @property
    def state(self) -> LifecycleState:
        return self.profile.state

    @property
    def threshold(self) -> ThresholdState:
        return self.profile.threshold

    @property
    def drift(self) -> DriftState:
        return self.profile.drift

    @property
    def phase(self) -> Phase:
        return self.profile.state.phase

    def has_threshold(self) -> bool:
        return self.profile.threshold.current is not None

    def decide(self, sample: "ComfortSample") -> Decision:
        return decide(sample, self.profile.threshold)

    def _deploy(self, day: int, day_samples: Sequence, events: list[str]) -> None:
        state = self.profile.state
        state.phase = Phase.DEPLOYED
        state.deployed_since = day
        state.retrain_deadline = None
        if day_samples:
            value = daily_percentile(day_samples, self.profile.threshold.percentile)
            self.profile.threshold.add_day(day, value)
            # The deployment day is the first baseline day for drift checks.
            self.profile.drift.accumulate(comfort_deciles(day_samples))

    def end_of_day(
        self,
        day: int,
        distance_history: Sequence[DayDistance],
        day_samples: Sequence,
        now: int,
    ) -> list[str]:
        """Close one calendar day; returns the lifecycle events it produced.

        ``distance_history`` must cover only the current training run; the
        replay driver restarts it when retraining begins.
        """
        if self.last_closed_day is not None and day <= self.last_closed_day:
            raise DoubleClose(f"day {day} already closed")
        self.last_closed_day = day
        events: list[str] = []
        state = self.profile.state
        cfg = self.config

        if state.phase in (Phase.TRAINING, Phase.RETRAINING):
            was_retraining = state.phase is Phase.RETRAINING
            if is_converged(
                distance_history, cfg.convergence_threshold, cfg.consecutive_days
            ):
                self._deploy(day, day_samples, events)
                events.append("converged")
                if was_retraining:
                    events.append("retrain_completed")
            elif was_retraining and state.retrain_deadline is not None:
                if now >= state.retrain_deadline:
                    if cfg.retrain_auto_extend:
                        state.retrain_deadline = now + cfg.retrain_window_seconds
                        events.append("retrain_extended")
                    else:
                        self._deploy(day, day_samples, events)
                        events.append("retrain_expired")
        elif state.phase is Phase.DEPLOYED:
            if day_samples:
                value = daily_percentile(day_samples, self.profile.threshold.percentile)
                self.profile.threshold.add_day(day, value)
                deciles = comfort_deciles(day_samples)
                if not self.profile.drift.baseline_ready:
                    self.profile.drift.accumulate(deciles)
                else:
                    _, drifted = check_drift(self.profile.drift, day_samples)
                    if drifted:
                        events.append("drift_suggested")
        return events

    def check_deadline(self, now: int) -> list[str]:
        """Event-level deadline check while retraining."""
        state = self.profile.state
        if state.phase is not Phase.RETRAINING or state.retrain_deadline is None:
            return []
        if now < state.retrain_deadline:
            return []
        if self.config.retrain_auto_extend:
            state.retrain_deadline = now + self.config.retrain_window_seconds
            return ["retrain_extended"]
        state.phase = Phase.DEPLOYED
        state.retrain_deadline = None
        return ["retrain_expired"]

    def begin_retrain(
        self, mode: RetrainMode, authenticated: bool, now: int
    ) -> list[str]:
        """Re-enter training after explicit authentication.

        ``update`` resumes training on the existing profile; ``fresh``
        replaces it with an empty one and clears the threshold and drift
        state along with it.
        """
        if not authenticated:
            raise NotAuthenticated("retraining requires explicit authentication")
        mode = RetrainMode(mode)
        if mode is RetrainMode.FRESH:
            from .profile import Profile

            old = self.profile
            self.profile = Profile(
                user_id=old.user_id,
                utc_offset=old.utc_offset,
                bins=old.bins,
                threshold=ThresholdState(
                    old.threshold.percentile, old.threshold.window_days
                ),
                drift=DriftState(
                    old.drift.breach_distance,
                    old.drift.breach_days,
                    old.drift.baseline_days,
                ),
            )
        else:
            # Keep the learned model and its threshold history; the drift
            # baseline belongs to the outgoing behavioural regime.
            self.profile.drift = DriftState(
                self.profile.drift.breach_distance,
                self.profile.drift.breach_days,
                self.profile.drift.baseline_days,
            )
        state = self.profile.state
        state.phase = Phase.RETRAINING
        state.retrain_deadline = now + self.config.retrain_window_seconds
        return [f"retrain_started:{mode.value}"]
