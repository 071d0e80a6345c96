"""Windowed comfort scoring against a frozen profile snapshot.

Scores roll up in three levels: per-sensor (mean density score over that
sensor's readings in the window), per-model (mean over the window's
distinct sensors, equal weights), and the aggregate (mean of the temporal
and spatial model scores minus the interaction-gap penalty).  Every level
is kept on the sample so a low score can be explained as a temporal or a
spatial anomaly, down to the sensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NegativeGap
from .events import SECONDS_PER_MINUTE, SensorEvent, SensorKind, local_hour
from .profile import Anchor, Profile
from .stability import MODEL_SPATIAL, MODEL_TEMPORAL

GAP_ZERO_SECONDS = 60
GAP_ONE_SECONDS = 3600


@dataclass(frozen=True)
class ComfortSample:
    """One minute's comfort with its full per-sensor breakdown."""

    window_start: int
    sensor_scores: dict[tuple[str, SensorKind], float] = field(default_factory=dict)
    temporal: float = 0.0
    spatial: float = 0.0
    gap_penalty: float = 0.0
    aggregate: float = 0.0
    event_count: int = 0


def gap_penalty(
    prev_event_ts: int,
    current_ts: int,
    zero: int = GAP_ZERO_SECONDS,
    one: int = GAP_ONE_SECONDS,
) -> float:
    """0 within ``zero`` seconds, 1 beyond ``one``, linear in between."""
    gap = current_ts - prev_event_ts
    if gap < 0:
        raise NegativeGap(f"current time precedes previous event by {-gap}s")
    if gap <= zero:
        return 0.0
    if gap >= one:
        return 1.0
    return (gap - zero) / (one - zero)


def score_sensor(
    snapshot: Profile,
    anchor: Anchor,
    sensor: SensorKind,
    inputs: Sequence,
) -> float:
    """Mean density score of the inputs under one anchor.

    An anchor or sensor the snapshot has never seen contributes 0 for
    every input.
    """
    if not inputs:
        raise ValueError("inputs must be non-empty")
    model = snapshot.anchor_model(anchor)
    density = model.densities.get(sensor) if model is not None else None
    if density is None:
        return 0.0
    return sum(density.score(v) for v in inputs) / len(inputs)


def _group_by_sensor(events: Iterable[SensorEvent]) -> dict[SensorKind, list]:
    grouped: dict[SensorKind, list] = {}
    for e in events:
        grouped.setdefault(e.sensor, []).append(e.value)
    return grouped


def score_model(
    snapshot: Profile, anchor: Anchor, window_events: Sequence[SensorEvent]
) -> float:
    """Unweighted mean of the per-sensor scores for one model's anchor."""
    if not window_events:
        raise ValueError("window_events must be non-empty")
    grouped = _group_by_sensor(window_events)
    total = sum(
        score_sensor(snapshot, anchor, sensor, values)
        for sensor, values in grouped.items()
    )
    return total / len(grouped)


def _majority_location(events: Sequence[SensorEvent]) -> str:
    counts: dict[str, int] = {}
    last_seen: dict[str, int] = {}
    for idx, e in enumerate(events):
        counts[e.location_id] = counts.get(e.location_id, 0) + 1
        last_seen[e.location_id] = idx
    # Ties go to the location observed latest in the window.
    return max(counts, key=lambda lab: (counts[lab], last_seen[lab]))


def score_window(
    snapshot: Profile,
    window_start: int,
    events: Sequence[SensorEvent],
    prev_event_ts: int | None,
    utc_offset: int = 0,
    window_seconds: int = SECONDS_PER_MINUTE,
    gap_zero: int = GAP_ZERO_SECONDS,
    gap_one: int = GAP_ONE_SECONDS,
) -> ComfortSample:
    """Score one tumbling window against a frozen snapshot.

    The temporal anchor is the hour of the window start; the spatial anchor
    is the majority location of the window's events.  An eventless window
    scores 0 on both models and keeps accruing the gap penalty, so the
    aggregate drifts toward -1 while the user is away.
    """
    hour_anchor = Anchor.time(local_hour(window_start, utc_offset))
    sensor_scores: dict[tuple[str, SensorKind], float] = {}

    if events:
        grouped = _group_by_sensor(events)
        for sensor, values in grouped.items():
            sensor_scores[(MODEL_TEMPORAL, sensor)] = score_sensor(
                snapshot, hour_anchor, sensor, values
            )
        location_anchor = Anchor.location(_majority_location(events))
        for sensor, values in grouped.items():
            sensor_scores[(MODEL_SPATIAL, sensor)] = score_sensor(
                snapshot, location_anchor, sensor, values
            )
        n_sensors = len(grouped)
        temporal = (
            sum(v for (m, _), v in sensor_scores.items() if m == MODEL_TEMPORAL)
            / n_sensors
        )
        spatial = (
            sum(v for (m, _), v in sensor_scores.items() if m == MODEL_SPATIAL)
            / n_sensors
        )
        reference_ts = events[0].timestamp
    else:
        temporal = 0.0
        spatial = 0.0
        reference_ts = window_start + window_seconds

    if prev_event_ts is None:
        penalty = 0.0
    else:
        penalty = gap_penalty(prev_event_ts, reference_ts, gap_zero, gap_one)

    aggregate = (temporal + spatial) / 2.0 - penalty
    return ComfortSample(
        window_start=window_start,
        sensor_scores=sensor_scores,
        temporal=temporal,
        spatial=spatial,
        gap_penalty=penalty,
        aggregate=aggregate,
        event_count=len(events),
    )


def score_windows(
    snapshot: Profile,
    events: Sequence[SensorEvent],
    start_ts: int,
    end_ts: int,
    prev_event_ts: int | None,
    utc_offset: int = 0,
    window_seconds: int = SECONDS_PER_MINUTE,
    gap_zero: int = GAP_ZERO_SECONDS,
    gap_one: int = GAP_ONE_SECONDS,
) -> tuple[list[ComfortSample], int | None]:
    """Score every tumbling window in [start_ts, end_ts).

    Events are attributed to exactly one window by their timestamp; a
    sample is emitted for every window, eventful or not.  Returns the
    samples and the updated previous-event cursor.
    """
    start = (start_ts // window_seconds) * window_seconds
    samples: list[ComfortSample] = []
    idx = 0
    while idx < len(events) and events[idx].timestamp < start:
        prev_event_ts = events[idx].timestamp
        idx += 1
    for window_start in range(start, end_ts, window_seconds):
        window_end = window_start + window_seconds
        lo = idx
        while idx < len(events) and events[idx].timestamp < window_end:
            idx += 1
        window_events = events[lo:idx]
        samples.append(
            score_window(
                snapshot,
                window_start,
                window_events,
                prev_event_ts,
                utc_offset=utc_offset,
                window_seconds=window_seconds,
                gap_zero=gap_zero,
                gap_one=gap_one,
            )
        )
        if window_events:
            prev_event_ts = window_events[-1].timestamp
    return samples, prev_event_ts
