"""End-to-end replay: stream -> profile -> stability -> lifecycle -> comfort.

The replay drives one user's stream day by day: during training each day is
scored against the previous day's snapshot and compared to it for
stability; once converged the profile freezes and every window is scored
against the deployed snapshot and judged against the current threshold.
Attack runs splice a generated attacker stream over a deployed owner and
measure detection over the attack span only.
"""

from __future__ import annotations

import bisect
import dataclasses
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .comfort import ComfortSample, score_windows
from .config import RunConfig
from .errors import InvalidScenario, NotDeployedBeforeAttack
from .events import (
    MINUTES_PER_DAY,
    SECONDS_PER_DAY,
    SECONDS_PER_MINUTE,
    AttackKind,
    PersonaSpec,
    SensorEvent,
    SensorKind,
    generate_attack,
    generate_persona,
    local_day,
    persona_from_dict,
    persona_to_dict,
)
from .lifecycle import (
    Decision,
    LifecycleController,
    Phase,
    RetrainMode,
    comfort_deciles,
    daily_percentile,
)
from .profile import Profile
from .stability import DayDistance, day_distance

ENGINE_VERSION = "0.1.0"

DEFAULT_ATTACK_LEAD_DAYS = 3
DEFAULT_ATTACK_START_HOUR = 14
DEFAULT_ATTACK_DURATION = 4 * 3600

# Default start hours mirror the scenario narratives: outsiders run off with
# the device in the afternoon, the cafeteria insider strikes at lunch, the
# housemate insider uses it at home in the evening.
ATTACK_START_HOURS = {
    AttackKind.UNINFORMED_OUTSIDER: 14,
    AttackKind.INFORMED_OUTSIDER: 15,
    AttackKind.UNINFORMED_INSIDER: 12,
    AttackKind.INFORMED_INSIDER: 18,
}


# ---------------------------------------------------------------------------
# Built-in personas
# ---------------------------------------------------------------------------


def default_persona(
    seed: int = 7,
    duration_days: int = 16,
    user_id: str = "owner",
    event_rate: float = 0.5,
    start_ts: int = 0,
) -> PersonaSpec:
    """A stationary home/office/cafe routine used by tests and scenarios."""
    home, office, cafe = "cell_home", "cell_office", "cell_cafe"

    def dwell_row(hour: int) -> dict[str, float]:
        if hour <= 6:
            return {home: 1.0}
        if hour == 7:
            return {home: 0.8, office: 0.2}
        if hour == 8:
            return {home: 0.2, office: 0.75, cafe: 0.05}
        if 9 <= hour <= 11 or 13 <= hour <= 16:
            return {home: 0.04, office: 0.92, cafe: 0.04}
        if hour == 12:
            return {home: 0.05, office: 0.25, cafe: 0.7}
        if hour == 17:
            return {home: 0.4, office: 0.5, cafe: 0.1}
        if hour == 18:
            return {home: 0.75, office: 0.1, cafe: 0.15}
        return {home: 0.93, cafe: 0.07}

    locations = []
    for label in (home, office, cafe):
        locations.append((label, [dwell_row(h).get(label, 0.0) for h in range(24)]))

    def apps_for(hour: int, label: str) -> dict[str, float]:
        if label == office:
            return {"mail": 0.45, "docs": 0.3, "web": 0.15, "chat": 0.1}
        if label == cafe:
            return {"web": 0.5, "chat": 0.3, "mail": 0.2}
        if hour <= 6:
            return {"clock": 0.7, "chat": 0.3}
        if hour <= 8:
            return {"news": 0.5, "mail": 0.3, "chat": 0.2}
        if hour <= 16:
            return {"news": 0.4, "web": 0.4, "chat": 0.2}
        return {"video": 0.5, "web": 0.3, "chat": 0.2}

    app_habits = {
        (hour, label): apps_for(hour, label)
        for hour in range(24)
        for label in (home, office, cafe)
    }

    def light(hour: int) -> tuple[float, float]:
        if hour <= 6 or hour >= 20:
            return (5.0, 3.0)
        if hour <= 8 or hour >= 18:
            return (120.0, 40.0)
        return (350.0, 80.0)

    def noise(hour: int) -> tuple[float, float]:
        return (25.0, 6.0) if hour <= 6 or hour >= 21 else (55.0, 12.0)

    baselines: dict[tuple[SensorKind, int], tuple[float, float]] = {}
    for hour in range(24):
        baselines[(SensorKind.LIGHT, hour)] = light(hour)
        baselines[(SensorKind.NOISE, hour)] = noise(hour)
        baselines[(SensorKind.CPU, hour)] = (20.0, 8.0)

    return PersonaSpec(
        seed=seed,
        locations=locations,
        app_habits=app_habits,
        continuous_baselines=baselines,
        event_rate=event_rate,
        duration_days=duration_days,
        user_id=user_id,
        start_ts=start_ts,
    )


def moved_persona(spec: PersonaSpec, seed_shift: int = 101) -> PersonaSpec:
    """The same routine carried to a new city: every location is replaced.

    App habits and scalar baselines stay (same person); cell and wifi
    labels change because they are location-derived.
    """
    renames = {label: f"{label}_new" for label in spec.location_labels()}
    return dataclasses.replace(
        spec,
        seed=spec.seed + seed_shift,
        locations=[(renames[lab], list(dwell)) for lab, dwell in spec.locations],
        app_habits={
            (hour, renames[lab]): dict(dist)
            for (hour, lab), dist in spec.app_habits.items()
        },
    )


def build_move_stream(
    owner: PersonaSpec, move_day: int
) -> tuple[list[SensorEvent], PersonaSpec]:
    """Owner stream where the routine moves city at the start of ``move_day``."""
    if not 2 <= move_day <= owner.duration_days:
        raise InvalidScenario(f"move_day {move_day} outside the stream")
    pre = dataclasses.replace(owner, duration_days=move_day - 1)
    post = moved_persona(owner)
    post = dataclasses.replace(
        post,
        start_ts=owner.start_ts + (move_day - 1) * SECONDS_PER_DAY,
        duration_days=owner.duration_days - (move_day - 1),
    )
    return generate_persona(pre) + generate_persona(post), post


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass
class DecisionRow:
    window_start: int
    aggregate: float
    threshold: float
    decision: str
    phase: str


@dataclass
class DaySummary:
    day: int  # 1-based ordinal within the stream
    phase: str
    n_events: int
    n_samples: int
    mean_comfort: float | None
    p2: float | None
    deciles: list[float] | None
    threshold: float | None
    challenges: int
    decisions_total: int


@dataclass
class ReplayResult:
    profile: Profile
    deployed_snapshot: Profile | None = None
    distance_history: list[DayDistance] = field(default_factory=list)
    threshold_history: list[tuple[int, float | None, float]] = field(
        default_factory=list
    )
    decisions: list[DecisionRow] = field(default_factory=list)
    daily: list[DaySummary] = field(default_factory=list)
    lifecycle_events: list[tuple[int, str]] = field(default_factory=list)
    converged_day: int | None = None
    deployed_day: int | None = None
    first_abs_day: int | None = None

    def ordinal_of(self, abs_day: int) -> int:
        return abs_day - self.first_abs_day + 1


def _mean(values: Sequence[float]) -> float | None:
    return sum(values) / len(values) if values else None


def replay(
    events: Sequence[SensorEvent],
    config: RunConfig | None = None,
    retrain_day: int | None = None,
    retrain_mode: RetrainMode | str | None = None,
) -> ReplayResult:
    """Run the full lifecycle over a sorted stream.

    ``retrain_day`` schedules an explicitly-authenticated retrain at the
    start of that ordinal day (used by the drift scenarios).
    """
    config = config or RunConfig()
    off = config.utc_offset_seconds
    controller = LifecycleController(
        Profile(
            user_id=events[0].user_id if events else "",
            utc_offset=off,
            bins=config.kde_bins,
            threshold=_new_threshold_state(config),
            drift=_new_drift_state(config),
        ),
        config,
    )
    result = ReplayResult(profile=controller.profile)
    if not events:
        return result

    first_abs = local_day(events[0].timestamp, off)
    last_abs = local_day(events[-1].timestamp, off)
    result.first_abs_day = first_abs
    empty_snapshot = Profile(utc_offset=off, bins=config.kde_bins)
    prev_snapshot: Profile | None = None
    prev_event_ts: int | None = None
    distances = result.distance_history
    run_start = 0  # distances index where the current training run begins
    idx = 0

    for abs_day in range(first_abs, last_abs + 1):
        ordinal = abs_day - first_abs + 1
        hi = idx
        while hi < len(events) and local_day(events[hi].timestamp, off) == abs_day:
            hi += 1
        day_events = events[idx:hi]
        idx = hi
        day_start = abs_day * SECONDS_PER_DAY - off
        day_end = day_start + SECONDS_PER_DAY

        if retrain_day is not None and ordinal == retrain_day:
            for msg in controller.begin_retrain(
                RetrainMode(retrain_mode), authenticated=True, now=day_start
            ):
                result.lifecycle_events.append((ordinal, msg))
            run_start = len(distances)
            prev_snapshot = controller.profile.snapshot_day(abs_day - 1)

        start_phase = controller.phase
        if start_phase is Phase.DEPLOYED:
            scoring_snapshot = result.deployed_snapshot
        else:
            scoring_snapshot = prev_snapshot if prev_snapshot is not None else empty_snapshot

        w_start = day_start if ordinal > 1 else _window_floor(events[0].timestamp, config)
        w_end = (
            day_end
            if abs_day < last_abs
            else _window_floor(events[-1].timestamp, config) + config.window_seconds
        )
        samples, prev_event_ts = score_windows(
            scoring_snapshot,
            day_events,
            w_start,
            w_end,
            prev_event_ts,
            utc_offset=off,
            window_seconds=config.window_seconds,
            gap_zero=config.gap_zero_seconds,
            gap_one=config.gap_one_seconds,
        )

        challenges = 0
        decisions_total = 0
        if start_phase is not Phase.TRAINING and controller.has_threshold():
            for sample in samples:
                decision = controller.decide(sample)
                decisions_total += 1
                if decision.challenged:
                    challenges += 1
                result.decisions.append(
                    DecisionRow(
                        window_start=decision.window_start,
                        aggregate=decision.aggregate,
                        threshold=decision.threshold,
                        decision=decision.decision,
                        phase=start_phase.value,
                    )
                )

        curr_snapshot: Profile | None = None
        if start_phase is not Phase.DEPLOYED:
            for event in day_events:
                if controller.phase is Phase.RETRAINING:
                    for msg in controller.check_deadline(event.timestamp):
                        result.lifecycle_events.append((ordinal, msg))
                    if controller.phase is Phase.DEPLOYED:
                        # Retrain window expired mid-day; freeze what was learned.
                        break
                controller.profile.ingest_event(event)
            curr_snapshot = controller.profile.snapshot_day(abs_day)
            if (
                prev_snapshot is not None
                and len(day_events) >= config.min_day_events
            ):
                distances.append(
                    day_distance(
                        prev_snapshot,
                        curr_snapshot,
                        top_k=config.levenshtein_top_k,
                        saturation_fraction=config.decile_saturation_fraction,
                    )
                )

        for msg in controller.end_of_day(
            abs_day, distances[run_start:], samples, now=day_end
        ):
            result.lifecycle_events.append((ordinal, msg))
            if msg == "converged" and result.converged_day is None:
                result.converged_day = ordinal

        if controller.phase is Phase.DEPLOYED and start_phase is not Phase.DEPLOYED:
            result.deployed_snapshot = curr_snapshot or prev_snapshot
            if result.deployed_day is None:
                result.deployed_day = ordinal

        day_p2 = daily_percentile(samples, config.percentile) if samples else None
        if controller.has_threshold():
            result.threshold_history.append(
                (ordinal, day_p2, controller.threshold.current)
            )
        result.daily.append(
            DaySummary(
                day=ordinal,
                phase=start_phase.value,
                n_events=len(day_events),
                n_samples=len(samples),
                mean_comfort=_mean([s.aggregate for s in samples]),
                p2=day_p2,
                deciles=comfort_deciles(samples) if samples else None,
                threshold=controller.threshold.current,
                challenges=challenges,
                decisions_total=decisions_total,
            )
        )
        if curr_snapshot is not None:
            prev_snapshot = curr_snapshot

    result.profile = controller.profile
    return result


def _window_floor(ts: int, config: RunConfig) -> int:
    return (ts // config.window_seconds) * config.window_seconds


def _new_threshold_state(config: RunConfig):
    from .lifecycle import ThresholdState

    return ThresholdState(
        percentile=config.percentile, window_days=config.threshold_window_days
    )


def _new_drift_state(config: RunConfig):
    from .lifecycle import DriftState

    return DriftState(
        breach_distance=config.drift_breach_distance,
        breach_days=config.drift_breach_days,
        baseline_days=config.drift_baseline_days,
    )


# ---------------------------------------------------------------------------
# Attack scenarios
# ---------------------------------------------------------------------------


@dataclass
class ScenarioResult:
    """Metrics over the attack span only."""

    kind: str
    mean_comfort: float
    detection_rate: float
    time_to_detect: int | None
    threshold: float
    attack_start: int
    duration: int
    n_windows: int
    daily: list[tuple[int, float, float, list[float]]] = field(default_factory=list)
    samples: list[ComfortSample] = field(default_factory=list)


def _threshold_before(result: ReplayResult, ordinal: int) -> float | None:
    current = None
    for day, _, value in result.threshold_history:
        if day >= ordinal:
            break
        current = value
    return current


def run_attack(
    owner: PersonaSpec,
    kind: AttackKind | str | None,
    config: RunConfig | None = None,
    start: int | None = None,
    duration: int | None = None,
    attack_stream: Sequence[SensorEvent] | None = None,
    base: ReplayResult | None = None,
) -> ScenarioResult:
    """Splice an attack over a deployed owner and measure detection.

    ``attack_stream`` overrides the generated attacker events (used for
    self-attack consistency checks); ``base`` lets callers reuse one owner
    replay across several attacks.
    """
    config = config or RunConfig()
    off = config.utc_offset_seconds
    owner_events = generate_persona(owner)
    if base is None:
        base = replay(owner_events, config)
    if base.deployed_day is None or base.deployed_snapshot is None:
        raise NotDeployedBeforeAttack("owner stream never reached deployment")

    deployed_abs = base.first_abs_day + base.deployed_day - 1
    if start is None:
        attack_abs = deployed_abs + DEFAULT_ATTACK_LEAD_DAYS
        hour = DEFAULT_ATTACK_START_HOUR
        if kind is not None and attack_stream is None:
            hour = ATTACK_START_HOURS.get(AttackKind(kind), hour)
        start = attack_abs * SECONDS_PER_DAY - off + hour * 3600
    start = (start // SECONDS_PER_MINUTE) * SECONDS_PER_MINUTE
    duration = duration if duration is not None else DEFAULT_ATTACK_DURATION
    if local_day(start, off) <= deployed_abs:
        raise NotDeployedBeforeAttack(
            f"attack at day {local_day(start, off)} not after deployment day {deployed_abs}"
        )
    if start > owner_events[-1].timestamp:
        raise InvalidScenario("owner stream ends before the attack starts")

    attack_ordinal = base.ordinal_of(local_day(start, off))
    threshold = _threshold_before(base, attack_ordinal)
    if threshold is None:
        raise NotDeployedBeforeAttack("no detection threshold before the attack")

    if attack_stream is None:
        attack_events = generate_attack(owner, AttackKind(kind), start, duration)
        kind_name = AttackKind(kind).value
    else:
        attack_events = [e for e in attack_stream if e.timestamp >= start]
        kind_name = "custom" if kind is None else str(kind)

    owner_ts = [e.timestamp for e in owner_events]
    cut = bisect.bisect_left(owner_ts, start)
    prev_event_ts = owner_events[cut - 1].timestamp if cut > 0 else None

    w_end = -((start + duration) // -SECONDS_PER_MINUTE) * SECONDS_PER_MINUTE
    attack_events = [e for e in attack_events if e.timestamp < w_end]
    samples, _ = score_windows(
        base.deployed_snapshot,
        attack_events,
        start,
        w_end,
        prev_event_ts,
        utc_offset=off,
        window_seconds=config.window_seconds,
        gap_zero=config.gap_zero_seconds,
        gap_one=config.gap_one_seconds,
    )

    challenges = [s for s in samples if s.aggregate < threshold]
    detection_rate = len(challenges) / len(samples) if samples else 0.0
    time_to_detect = (
        challenges[0].window_start + config.window_seconds - start
        if challenges
        else None
    )

    by_day: dict[int, list[ComfortSample]] = {}
    for s in samples:
        by_day.setdefault(base.ordinal_of(local_day(s.window_start, off)), []).append(s)
    daily = [
        (
            day,
            _mean([s.aggregate for s in day_samples]),
            daily_percentile(day_samples, config.percentile),
            comfort_deciles(day_samples),
        )
        for day, day_samples in sorted(by_day.items())
    ]

    return ScenarioResult(
        kind=kind_name,
        mean_comfort=_mean([s.aggregate for s in samples]) or 0.0,
        detection_rate=detection_rate,
        time_to_detect=time_to_detect,
        threshold=threshold,
        attack_start=start,
        duration=duration,
        n_windows=len(samples),
        daily=daily,
        samples=samples,
    )


# ---------------------------------------------------------------------------
# Drift scenarios
# ---------------------------------------------------------------------------

DRIFT_STRATEGIES = ("none", "update", "fresh")


def run_drift_case(
    owner: PersonaSpec,
    move_day: int,
    strategy: str,
    config: RunConfig | None = None,
) -> ReplayResult:
    """Replay a move-city stream under one retraining strategy.

    ``none`` keeps the deployed model; ``update``/``fresh`` begin an
    explicitly-authenticated retrain (resuming or restarting the profile)
    at the start of the move day.
    """
    if strategy not in DRIFT_STRATEGIES:
        raise InvalidScenario(f"unknown drift strategy {strategy!r}")
    config = config or RunConfig()
    events, _ = build_move_stream(owner, move_day)
    if strategy == "none":
        result = replay(events, config)
    else:
        result = replay(
            events, config, retrain_day=move_day, retrain_mode=RetrainMode(strategy)
        )
    if result.deployed_day is None or result.deployed_day >= move_day:
        raise InvalidScenario(
            f"owner must deploy before move_day {move_day}, "
            f"deployed at {result.deployed_day}"
        )
    return result


# ---------------------------------------------------------------------------
# CSV and manifest emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def distances_csv(result: ReplayResult) -> str:
    buf = io.StringIO()
    buf.write("day,temporal,spatial,global\n")
    for dist in result.distance_history:
        ordinal = result.ordinal_of(dist.day_index)
        buf.write(
            f"{ordinal},{_fmt(dist.temporal)},{_fmt(dist.spatial)},{_fmt(dist.global_)}\n"
        )
    return buf.getvalue()


def comfort_daily_csv(result: ReplayResult) -> str:
    buf = io.StringIO()
    decile_cols = ",".join(f"d{p}" for p in range(10, 100, 10))
    buf.write(
        "day,phase,n_events,n_samples,mean_comfort,p2,"
        f"{decile_cols},threshold,challenges,decisions_total\n"
    )
    for row in result.daily:
        deciles = row.deciles if row.deciles is not None else [None] * 9
        cells = [
            row.day,
            row.phase,
            row.n_events,
            row.n_samples,
            row.mean_comfort,
            row.p2,
            *deciles,
            row.threshold,
            row.challenges,
            row.decisions_total,
        ]
        buf.write(",".join(_fmt(c) for c in cells) + "\n")
    return buf.getvalue()


def decisions_csv(rows: Sequence[DecisionRow]) -> str:
    buf = io.StringIO()
    buf.write("window_start,aggregate,threshold,decision,phase\n")
    for row in rows:
        buf.write(
            f"{row.window_start},{_fmt(row.aggregate)},{_fmt(row.threshold)},"
            f"{row.decision},{row.phase}\n"
        )
    return buf.getvalue()


def scenario_summary_csv(rows: Sequence[ScenarioResult]) -> str:
    buf = io.StringIO()
    buf.write(
        "scenario,mean_comfort,detection_rate,time_to_detect_s,threshold,n_windows\n"
    )
    for row in rows:
        buf.write(
            f"{row.kind},{_fmt(row.mean_comfort)},{_fmt(row.detection_rate)},"
            f"{_fmt(row.time_to_detect)},{_fmt(row.threshold)},{row.n_windows}\n"
        )
    return buf.getvalue()


def drift_daily_csv(results: dict[str, ReplayResult]) -> str:
    buf = io.StringIO()
    buf.write("strategy,day,phase,mean_comfort,p2\n")
    for strategy in sorted(results):
        for row in results[strategy].daily:
            buf.write(
                f"{strategy},{row.day},{row.phase},"
                f"{_fmt(row.mean_comfort)},{_fmt(row.p2)}\n"
            )
    return buf.getvalue()


def lifecycle_log_lines(result: ReplayResult) -> list[str]:
    return [f"day={day} event={name}" for day, name in result.lifecycle_events]


# ---------------------------------------------------------------------------
# Scenario orchestration
# ---------------------------------------------------------------------------


def _owner_from_scenario(scenario: dict, config: RunConfig) -> PersonaSpec:
    owner = scenario.get("owner", "default")
    if owner == "default":
        return default_persona(
            seed=int(scenario.get("seed", config.seed)),
            duration_days=int(scenario.get("owner_days", 16)),
        )
    if isinstance(owner, dict):
        return persona_from_dict(owner)
    raise InvalidScenario(f"owner must be 'default' or a persona mapping, got {owner!r}")


def simulate(scenario: dict, outdir: str | Path, config: RunConfig | None = None) -> dict:
    """Run a declarative scenario end to end and write every artifact.

    Returns a manifest dict describing the run (also written to
    ``manifest.json``).  Output is byte-identical for identical
    (scenario, config) inputs.
    """
    config = config or RunConfig()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    owner = _owner_from_scenario(scenario, config)
    owner_events = generate_persona(owner)
    base = replay(owner_events, config)

    summaries: list[ScenarioResult] = []
    if base.deployed_day is not None:
        owner_row = _owner_baseline_row(base, config)
        if owner_row is not None:
            summaries.append(owner_row)

    for attack in scenario.get("attacks", []):
        try:
            kind = AttackKind(attack["kind"])
        except (KeyError, ValueError) as exc:
            raise InvalidScenario(f"bad attack entry {attack!r}: {exc}") from exc
        duration = int(attack.get("duration_hours", 4) * 3600)
        start = None
        if "start_day" in attack:
            abs_day = base.first_abs_day + int(attack["start_day"]) - 1
            start = (
                abs_day * SECONDS_PER_DAY
                - config.utc_offset_seconds
                + int(attack.get("start_hour", DEFAULT_ATTACK_START_HOUR)) * 3600
            )
        summaries.append(
            run_attack(owner, kind, config, start=start, duration=duration, base=base)
        )

    drift_results: dict[str, ReplayResult] = {}
    drift_cfg = scenario.get("drift")
    if drift_cfg:
        if base.deployed_day is None:
            raise InvalidScenario("drift scenario requires a deployable owner stream")
        move_day = int(drift_cfg.get("move_day", base.deployed_day + 2))
        for strategy in drift_cfg.get("strategies", list(DRIFT_STRATEGIES)):
            drift_results[str(strategy)] = run_drift_case(
                owner, move_day, str(strategy), config
            )

    (outdir / "distances.csv").write_text(distances_csv(base), encoding="utf-8")
    (outdir / "comfort_daily.csv").write_text(comfort_daily_csv(base), encoding="utf-8")
    (outdir / "decisions.csv").write_text(
        decisions_csv(base.decisions), encoding="utf-8"
    )
    (outdir / "scenario_summary.csv").write_text(
        scenario_summary_csv(summaries), encoding="utf-8"
    )
    if drift_results:
        (outdir / "drift_daily.csv").write_text(
            drift_daily_csv(drift_results), encoding="utf-8"
        )
    (outdir / "lifecycle.log").write_text(
        "\n".join(lifecycle_log_lines(base)) + "\n", encoding="utf-8"
    )

    manifest = {
        "engine_version": ENGINE_VERSION,
        "config": config.to_dict(),
        "scenario": scenario,
        "owner": persona_to_dict(owner),
        "converged_day": base.converged_day,
        "deployed_day": base.deployed_day,
        "outputs": sorted(p.name for p in outdir.iterdir() if p.suffix in (".csv", ".log")),
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def _owner_baseline_row(base: ReplayResult, config: RunConfig) -> ScenarioResult | None:
    """Control row: the owner's own deployed days against their threshold."""
    deployed_days = [
        row for row in base.daily if row.phase == Phase.DEPLOYED.value and row.decisions_total
    ]
    if not deployed_days:
        return None
    total = sum(row.decisions_total for row in deployed_days)
    challenged = sum(row.challenges for row in deployed_days)
    mean_comfort = _mean(
        [row.mean_comfort for row in deployed_days if row.mean_comfort is not None]
    )
    last_threshold = base.daily[-1].threshold
    return ScenarioResult(
        kind="owner_baseline",
        mean_comfort=mean_comfort if mean_comfort is not None else 0.0,
        detection_rate=challenged / total,
        time_to_detect=None,
        threshold=last_threshold if last_threshold is not None else 0.0,
        attack_start=0,
        duration=0,
        n_windows=total,
    )
