"""sensorauth: streaming implicit authentication from device sensor behaviour.

Learns a per-user temporal/spatial profile from a sensor event stream,
decides on its own when training is sufficient, scores live behaviour into
a per-minute comfort value, derives a per-user detection threshold, flags
behavioural drift, and replays attacker scenarios for evaluation.
"""

from .comfort import ComfortSample, gap_penalty, score_sensor, score_window, score_windows
from .config import RunConfig
from .density import ContinuousDensity, DiscreteDensity
from .events import (
    AttackKind,
    PersonaSpec,
    SensorEvent,
    SensorKind,
    generate_attack,
    generate_persona,
    parse_stream,
    serialize_stream,
)
from .harness import (
    ReplayResult,
    ScenarioResult,
    default_persona,
    replay,
    run_attack,
    run_drift_case,
    simulate,
)
from .lifecycle import (
    Decision,
    DriftState,
    LifecycleController,
    LifecycleState,
    Phase,
    RetrainMode,
    ThresholdState,
    check_drift,
    daily_percentile,
    decide,
)
from .profile import Anchor, AnchorModel, Profile
from .stability import (
    DayDistance,
    continuous_distance,
    day_distance,
    discrete_distance,
    is_converged,
    levenshtein,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "AnchorModel",
    "AttackKind",
    "ComfortSample",
    "ContinuousDensity",
    "DayDistance",
    "Decision",
    "DiscreteDensity",
    "DriftState",
    "LifecycleController",
    "LifecycleState",
    "PersonaSpec",
    "Phase",
    "Profile",
    "ReplayResult",
    "RetrainMode",
    "RunConfig",
    "ScenarioResult",
    "SensorEvent",
    "SensorKind",
    "ThresholdState",
    "check_drift",
    "continuous_distance",
    "daily_percentile",
    "day_distance",
    "decide",
    "default_persona",
    "discrete_distance",
    "gap_penalty",
    "generate_attack",
    "generate_persona",
    "is_converged",
    "levenshtein",
    "parse_stream",
    "replay",
    "run_attack",
    "run_drift_case",
    "score_sensor",
    "score_window",
    "score_windows",
    "serialize_stream",
    "simulate",
]
