"""The twin behaviour profile: temporal and spatial anchor models.

A profile keeps one density per sensor under each anchor.  The 24 hourly
anchors always exist; location anchors appear on first sight, and a sensor
appears under an anchor only after it has been observed there.  Daily
snapshots are deep, immutable copies used for stability comparison and for
scoring the following day.  Profiles persist as canonical JSON documents:
equal profiles serialize to equal bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .density import (
    DEFAULT_BINS,
    ContinuousDensity,
    DiscreteDensity,
    density_for,
)
from .errors import (
    CorruptDocument,
    DayNotComplete,
    FrozenSnapshot,
    OutOfOrderEvent,
    VersionMismatch,
)
from .events import SensorEvent, SensorKind, is_discrete, local_day, local_hour
from .lifecycle import DriftState, LifecycleState, ThresholdState

FORMAT_VERSION = 1

ANCHOR_TIME = "time"
ANCHOR_LOCATION = "location"


@dataclass(frozen=True)
class Anchor:
    """Conditioning context for densities: an hour slot or a location label."""

    kind: str
    key: Union[int, str]

    @classmethod
    def time(cls, hour: int) -> "Anchor":
        if not 0 <= hour <= 23:
            raise ValueError(f"hour {hour} out of range")
        return cls(ANCHOR_TIME, hour)

    @classmethod
    def location(cls, label: str) -> "Anchor":
        if not label:
            raise ValueError("location label must be non-empty")
        return cls(ANCHOR_LOCATION, label)


class AnchorModel:
    """Per-anchor set of sensor densities, built opportunistically."""

    __slots__ = ("densities",)

    def __init__(self) -> None:
        self.densities: dict[SensorKind, Union[DiscreteDensity, ContinuousDensity]] = {}

    def observe(self, sensor: SensorKind, value, bins: int = DEFAULT_BINS) -> None:
        density = self.densities.get(sensor)
        if density is None:
            density = density_for(is_discrete(sensor), bins)
            self.densities[sensor] = density
        density.observe(value)

    def copy(self) -> "AnchorModel":
        dup = AnchorModel()
        dup.densities = {k: d.copy() for k, d in self.densities.items()}
        return dup

    def to_dict(self) -> dict:
        return {
            sensor.value: density.to_dict()
            for sensor, density in sorted(
                self.densities.items(), key=lambda kv: kv[0].value
            )
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnchorModel":
        dup = cls()
        for name, payload in data.items():
            sensor = SensorKind(name)
            if payload["kind"] == "discrete":
                dup.densities[sensor] = DiscreteDensity.from_dict(payload)
            else:
                dup.densities[sensor] = ContinuousDensity.from_dict(payload)
        return dup


class Profile:
    """Cumulative twin model plus lifecycle metadata for one user."""

    def __init__(
        self,
        user_id: str = "",
        utc_offset: int = 0,
        bins: int = DEFAULT_BINS,
        state: LifecycleState | None = None,
        threshold: ThresholdState | None = None,
        drift: DriftState | None = None,
    ) -> None:
        self.user_id = user_id
        self.utc_offset = utc_offset
        self.bins = bins
        self.temporal: dict[int, AnchorModel] = {h: AnchorModel() for h in range(24)}
        self.spatial: dict[str, AnchorModel] = {}
        self.days_observed = 0
        self.first_event_ts: int | None = None
        self.last_event_ts: int | None = None
        self.state = state if state is not None else LifecycleState()
        self.threshold = threshold if threshold is not None else ThresholdState()
        self.drift = drift if drift is not None else DriftState()
        self.day_number: int | None = None  # set on snapshots
        self._frozen = False
        self._current_day: int | None = None

    # -- ingestion ---------------------------------------------------------

    def ingest_event(self, event: SensorEvent) -> None:
        """Observe one event into both anchor models.

        Events must arrive in nondecreasing timestamp order; snapshots
        reject ingestion outright.
        """
        if self._frozen:
            raise FrozenSnapshot("snapshots are immutable")
        if self.last_event_ts is not None and event.timestamp < self.last_event_ts:
            raise OutOfOrderEvent(
                f"event at {event.timestamp} after {self.last_event_ts}"
            )
        if not self.user_id:
            self.user_id = event.user_id
        hour = local_hour(event.timestamp, self.utc_offset)
        day = local_day(event.timestamp, self.utc_offset)
        self.temporal[hour].observe(event.sensor, event.value, self.bins)
        anchor = self.spatial.get(event.location_id)
        if anchor is None:
            anchor = AnchorModel()
            self.spatial[event.location_id] = anchor
        anchor.observe(event.sensor, event.value, self.bins)
        if self._current_day is None or day > self._current_day:
            self.days_observed += 1
            self._current_day = day
        if self.first_event_ts is None:
            self.first_event_ts = event.timestamp
        self.last_event_ts = event.timestamp

    def anchor_model(self, anchor: Anchor) -> AnchorModel | None:
        if anchor.kind == ANCHOR_TIME:
            return self.temporal.get(anchor.key)
        return self.spatial.get(anchor.key)

    # -- snapshots ---------------------------------------------------------

    def snapshot_day(self, day_number: int) -> "Profile":
        """Immutable deep copy of the cumulative profile as of ``day_number``.

        The day must not precede already-ingested data: once a later day's
        events are in, earlier cumulative states cannot be reconstructed.
        """
        if self.last_event_ts is not None and day_number < local_day(
            self.last_event_ts, self.utc_offset
        ):
            raise DayNotComplete(
                f"profile already contains events past day {day_number}"
            )
        snap = self._copy()
        snap.day_number = day_number
        snap._frozen = True
        return snap

    def _copy(self) -> "Profile":
        dup = Profile(
            user_id=self.user_id,
            utc_offset=self.utc_offset,
            bins=self.bins,
            state=self.state.copy(),
            threshold=self.threshold.copy(),
            drift=self.drift.copy(),
        )
        dup.temporal = {h: m.copy() for h, m in self.temporal.items()}
        dup.spatial = {lab: m.copy() for lab, m in self.spatial.items()}
        dup.days_observed = self.days_observed
        dup.first_event_ts = self.first_event_ts
        dup.last_event_ts = self.last_event_ts
        dup.day_number = self.day_number
        dup._current_day = self._current_day
        return dup

    # -- persistence -------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "user_id": self.user_id,
            "utc_offset": self.utc_offset,
            "bins": self.bins,
            "days_observed": self.days_observed,
            "first_event_ts": self.first_event_ts,
            "last_event_ts": self.last_event_ts,
            "day_number": self.day_number,
            "lifecycle": {
                "state": self.state.to_dict(),
                "threshold": self.threshold.to_dict(),
                "drift": self.drift.to_dict(),
            },
            "temporal": {str(h): m.to_dict() for h, m in self.temporal.items()},
            "spatial": {lab: m.to_dict() for lab, m in self.spatial.items()},
        }

    def save(self) -> bytes:
        """Canonical document bytes: sorted keys, compact separators."""
        doc = json.dumps(
            self.to_document(), sort_keys=True, separators=(",", ":"), allow_nan=False
        )
        return doc.encode("utf-8") + b"\n"

    @classmethod
    def load(cls, data: bytes | str) -> "Profile":
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        try:
            doc = json.loads(text)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptDocument(f"not a valid profile document: {exc}") from exc
        if not isinstance(doc, dict):
            raise CorruptDocument("profile document must be an object")
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"format_version {version}, expected {FORMAT_VERSION}")
        try:
            lifecycle = doc["lifecycle"]
            profile = cls(
                user_id=str(doc["user_id"]),
                utc_offset=int(doc["utc_offset"]),
                bins=int(doc["bins"]),
                state=LifecycleState.from_dict(lifecycle["state"]),
                threshold=ThresholdState.from_dict(lifecycle["threshold"]),
                drift=DriftState.from_dict(lifecycle["drift"]),
            )
            profile.days_observed = int(doc["days_observed"])
            profile.first_event_ts = doc["first_event_ts"]
            profile.last_event_ts = doc["last_event_ts"]
            profile.day_number = doc["day_number"]
            temporal = doc["temporal"]
            if set(temporal) != {str(h) for h in range(24)}:
                raise KeyError("temporal anchors must be exactly hours 0..23")
            profile.temporal = {
                int(h): AnchorModel.from_dict(m) for h, m in temporal.items()
            }
            profile.spatial = {
                lab: AnchorModel.from_dict(m) for lab, m in doc["spatial"].items()
            }
            if profile.last_event_ts is not None:
                profile._current_day = local_day(
                    profile.last_event_ts, profile.utc_offset
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptDocument(f"incomplete profile document: {exc}") from exc
        return profile

    def __eq__(self, other) -> bool:
        if not isinstance(other, Profile):
            return NotImplemented
        return self.to_document() == other.to_document()
