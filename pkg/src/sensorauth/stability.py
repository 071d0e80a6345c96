"""Day-over-day profile distances and the training convergence rule.

Discrete densities are compared by Levenshtein distance over their
frequency-ranked label sequences; continuous densities by the Euclidean
distance between their decile vectors.  Per-sensor distances are averaged
over the union of (model, anchor, sensor) keys, a key present on only one
side counting as maximal novelty, so brand-new anchors register as
instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Hashable, Sequence, Union

from .density import ContinuousDensity, DiscreteDensity
from .errors import NonConsecutiveDays
from .events import SensorKind

if TYPE_CHECKING:  # pragma: no cover
    from .profile import Profile

DECILES = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0)

DEFAULT_TOP_K = 50

# A uniform decile shift of this fraction of the value range saturates the
# continuous distance at 1.
DEFAULT_SATURATION_FRACTION = 1.0 / 3.0

MODEL_TEMPORAL = "temporal"
MODEL_SPATIAL = "spatial"

DistanceKey = tuple[str, Union[int, str], str]


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i]
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


def discrete_distance(
    prev: DiscreteDensity, curr: DiscreteDensity, top_k: int = DEFAULT_TOP_K
) -> float:
    """Normalized edit distance between frequency-ranked label sequences."""
    seq_prev = prev.ranked_labels(top_k)
    seq_curr = curr.ranked_labels(top_k)
    longest = max(len(seq_prev), len(seq_curr))
    if longest == 0:
        return 0.0
    return levenshtein(seq_prev, seq_curr) / longest


def continuous_distance(
    prev: ContinuousDensity,
    curr: ContinuousDensity,
    saturation_fraction: float = DEFAULT_SATURATION_FRACTION,
) -> float:
    """Euclidean distance between decile vectors, scaled to [0, 1].

    An empty side against a non-empty one is maximal novelty (1); two empty
    densities are identical (0).
    """
    if prev.n == 0 and curr.n == 0:
        return 0.0
    if prev.n == 0 or curr.n == 0:
        return 1.0
    v_prev = prev.percentile_vector(DECILES)
    v_curr = curr.percentile_vector(DECILES)
    value_range = max(prev.grid_max, curr.grid_max) - min(prev.grid_min, curr.grid_min)
    if value_range <= 0.0:
        return 0.0 if v_prev == v_curr else 1.0
    norm = math.sqrt(sum((p - c) ** 2 for p, c in zip(v_prev, v_curr)))
    # 9 deciles shifted uniformly by s give norm 3s; saturate at the
    # configured fraction of the union value range.
    divisor = 3.0 * saturation_fraction * value_range
    return min(1.0, norm / divisor)


@dataclass
class DayDistance:
    """Distance between two consecutive cumulative snapshots."""

    day_index: int
    per_sensor: dict[DistanceKey, float] = field(default_factory=dict)
    temporal: float = 0.0
    spatial: float = 0.0
    global_: float = 0.0


def _model_keys(profile: "Profile", model: str) -> set[tuple[Union[int, str], str]]:
    anchors = profile.temporal if model == MODEL_TEMPORAL else profile.spatial
    return {
        (anchor_key, sensor.value)
        for anchor_key, anchor_model in anchors.items()
        for sensor in anchor_model.densities
    }


def _lookup(profile: "Profile", model: str, anchor_key, sensor_name: str):
    anchors = profile.temporal if model == MODEL_TEMPORAL else profile.spatial
    anchor_model = anchors.get(anchor_key)
    if anchor_model is None:
        return None
    return anchor_model.densities.get(SensorKind(sensor_name))


def day_distance(
    prev: "Profile",
    curr: "Profile",
    top_k: int = DEFAULT_TOP_K,
    saturation_fraction: float = DEFAULT_SATURATION_FRACTION,
) -> DayDistance:
    """Compare consecutive daily snapshots over the union of their keys."""
    if prev.day_number is None or curr.day_number is None:
        raise NonConsecutiveDays("snapshots must come from snapshot_day")
    if curr.day_number != prev.day_number + 1:
        raise NonConsecutiveDays(
            f"snapshots are days {prev.day_number} and {curr.day_number}"
        )

    result = DayDistance(day_index=curr.day_number)
    model_totals = {MODEL_TEMPORAL: 0.0, MODEL_SPATIAL: 0.0}
    model_counts = {MODEL_TEMPORAL: 0, MODEL_SPATIAL: 0}
    for model in (MODEL_TEMPORAL, MODEL_SPATIAL):
        keys = _model_keys(prev, model) | _model_keys(curr, model)
        for anchor_key, sensor_name in sorted(keys, key=lambda k: (str(k[0]), k[1])):
            d_prev = _lookup(prev, model, anchor_key, sensor_name)
            d_curr = _lookup(curr, model, anchor_key, sensor_name)
            if d_prev is None or d_curr is None:
                value = 1.0
            elif isinstance(d_prev, DiscreteDensity):
                value = discrete_distance(d_prev, d_curr, top_k)
            else:
                value = continuous_distance(d_prev, d_curr, saturation_fraction)
            result.per_sensor[(model, anchor_key, sensor_name)] = value
            model_totals[model] += value
            model_counts[model] += 1

    result.temporal = (
        model_totals[MODEL_TEMPORAL] / model_counts[MODEL_TEMPORAL]
        if model_counts[MODEL_TEMPORAL]
        else 0.0
    )
    result.spatial = (
        model_totals[MODEL_SPATIAL] / model_counts[MODEL_SPATIAL]
        if model_counts[MODEL_SPATIAL]
        else 0.0
    )
    result.global_ = (result.temporal + result.spatial) / 2.0
    return result


def is_converged(
    history: Sequence[DayDistance],
    threshold: float = 0.1,
    consecutive: int = 2,
) -> bool:
    """True when the last ``consecutive`` day distances are all below threshold."""
    if len(history) < consecutive:
        return False
    return all(d.global_ < threshold for d in history[-consecutive:])
