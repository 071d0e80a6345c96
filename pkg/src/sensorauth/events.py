"""Canonical sensor-event stream: schema, parsing, and synthetic generation.

The canonical stream is flat CSV or JSONL with one event per record and the
field set ``timestamp,user_id,sensor,value,location_id``.  The sensor kind,
never the value syntax, decides whether the value is a discrete label or a
continuous scalar.  Malformed records are skipped and tallied; a timestamp
that moves backwards is fatal because it signals an unsorted export.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence, Union

from .errors import InvalidSpec, NonMonotonicTimestamp, UnsupportedFormat

CSV_FIELDS = ("timestamp", "user_id", "sensor", "value", "location_id")

UNKNOWN_LOCATION = "unknown"

SECONDS_PER_MINUTE = 60
MINUTES_PER_DAY = 1440
SECONDS_PER_DAY = 86400


class SensorKind(str, enum.Enum):
    APP = "app"
    WIFI = "wifi"
    CELL = "cell"
    LIGHT = "light"
    NOISE = "noise"
    CPU = "cpu"
    CALL = "call"
    BLUETOOTH = "bluetooth"
    BATTERY = "battery"
    MAGNETIC = "magnetic"
    ROTATION = "rotation"
    DEVICE_ACTIVE = "device_active"
    CHARGE = "charge"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.value


DISCRETE_KINDS = frozenset(
    {
        SensorKind.APP,
        SensorKind.WIFI,
        SensorKind.CELL,
        SensorKind.CALL,
        SensorKind.BLUETOOTH,
        SensorKind.DEVICE_ACTIVE,
    }
)

CONTINUOUS_KINDS = frozenset(
    {
        SensorKind.LIGHT,
        SensorKind.NOISE,
        SensorKind.CPU,
        SensorKind.BATTERY,
        SensorKind.MAGNETIC,
        SensorKind.ROTATION,
        SensorKind.CHARGE,
    }
)


def is_discrete(kind: SensorKind) -> bool:
    return kind in DISCRETE_KINDS


@dataclass(frozen=True)
class SensorEvent:
    """One timestamped observation from one sensor.

    ``value`` is a string label for discrete kinds and a float for
    continuous kinds.  ``location_id`` is never empty; the absence of a
    cell tower is encoded as the reserved label ``unknown``.
    """

    timestamp: int
    user_id: str
    sensor: SensorKind
    value: Union[str, float]
    location_id: str = UNKNOWN_LOCATION


def local_hour(ts: int, utc_offset: int = 0) -> int:
    """Hour of day, 0-23, under a fixed UTC offset in seconds."""
    return ((ts + utc_offset) // 3600) % 24


def local_day(ts: int, utc_offset: int = 0) -> int:
    """Local calendar day number (days since epoch at the given offset)."""
    return (ts + utc_offset) // SECONDS_PER_DAY


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RejectedRecord:
    """A skipped record: 1-based line number plus the reason it was dropped."""

    line: int
    reason: str


@dataclass
class ParseResult:
    events: list[SensorEvent] = field(default_factory=list)
    rejected: list[RejectedRecord] = field(default_factory=list)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


def _parse_timestamp(raw) -> int:
    if isinstance(raw, bool):
        raise ValueError("timestamp must be an integer")
    if isinstance(raw, int):
        ts = raw
    elif isinstance(raw, float):
        if not raw.is_integer():
            raise ValueError("timestamp must be whole seconds")
        ts = int(raw)
    else:
        ts = int(str(raw).strip())
    if ts < 0:
        raise ValueError("timestamp must be >= 0")
    return ts


def _parse_value(kind: SensorKind, raw) -> Union[str, float]:
    # The sensor kind dictates the variant; numeric-looking labels stay labels.
    if is_discrete(kind):
        text = str(raw)
        if not text:
            raise ValueError("discrete value must be a non-empty label")
        return text
    if isinstance(raw, bool):
        raise ValueError("continuous value must be numeric")
    x = float(raw)
    if not math.isfinite(x):
        raise ValueError("continuous value must be finite")
    return x


def _build_event(fields: dict, line: int) -> SensorEvent:
    try:
        ts = _parse_timestamp(fields["timestamp"])
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad timestamp: {exc}") from exc
    user_id = str(fields["user_id"])
    if not user_id:
        raise ValueError("empty user_id")
    try:
        kind = SensorKind(str(fields["sensor"]))
    except ValueError as exc:
        raise ValueError(f"unknown sensor kind {fields['sensor']!r}") from exc
    try:
        value = _parse_value(kind, fields["value"])
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad value: {exc}") from exc
    location = str(fields["location_id"])
    if not location:
        raise ValueError("empty location_id")
    return SensorEvent(ts, user_id, kind, value, location)


def _iter_csv_records(text: str) -> Iterator[tuple[int, dict, str]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_FIELDS:
        raise UnsupportedFormat(f"CSV header must be {','.join(CSV_FIELDS)}")
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_FIELDS):
            yield line_no, {}, f"expected {len(CSV_FIELDS)} fields, got {len(row)}"
            continue
        yield line_no, dict(zip(CSV_FIELDS, row)), ""


def _iter_jsonl_records(text: str) -> Iterator[tuple[int, dict, str]]:
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, {}, f"invalid JSON: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield line_no, {}, "record is not an object"
            continue
        missing = [k for k in CSV_FIELDS if k not in obj]
        if missing:
            yield line_no, {}, f"missing keys: {','.join(missing)}"
            continue
        yield line_no, obj, ""


def parse_stream(source: Union[bytes, str, IO[bytes]], fmt: str = "csv") -> ParseResult:
    """Parse a canonical event stream.

    Malformed records are collected on the result, not raised; a valid
    record whose timestamp precedes an earlier valid record aborts with
    NonMonotonicTimestamp.
    """
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    text = data.decode("utf-8") if isinstance(data, bytes) else data

    if fmt == "csv":
        records = _iter_csv_records(text)
    elif fmt == "jsonl":
        records = _iter_jsonl_records(text)
    else:
        raise UnsupportedFormat(f"unknown stream format {fmt!r}")

    result = ParseResult()
    last_ts = None
    for line_no, fields, problem in records:
        if problem:
            result.rejected.append(RejectedRecord(line_no, problem))
            continue
        try:
            event = _build_event(fields, line_no)
        except ValueError as exc:
            result.rejected.append(RejectedRecord(line_no, str(exc)))
            continue
        if last_ts is not None and event.timestamp < last_ts:
            raise NonMonotonicTimestamp(
                f"line {line_no}: timestamp {event.timestamp} < {last_ts}"
            )
        last_ts = event.timestamp
        result.events.append(event)
    return result


def _value_text(event: SensorEvent) -> str:
    if is_discrete(event.sensor):
        return str(event.value)
    return repr(float(event.value))


def serialize_stream(events: Iterable[SensorEvent], fmt: str = "csv") -> bytes:
    """Render events back to the canonical file form.

    Output is deterministic: fixed field order, ``\\n`` line endings, and
    shortest round-trip float formatting for continuous values.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for e in events:
            writer.writerow(
                [e.timestamp, e.user_id, e.sensor.value, _value_text(e), e.location_id]
            )
        return buf.getvalue().encode("utf-8")
    if fmt == "jsonl":
        lines = []
        for e in events:
            value = str(e.value) if is_discrete(e.sensor) else float(e.value)
            lines.append(
                json.dumps(
                    {
                        "timestamp": e.timestamp,
                        "user_id": e.user_id,
                        "sensor": e.sensor.value,
                        "value": value,
                        "location_id": e.location_id,
                    },
                    separators=(",", ":"),
                )
            )
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
    raise UnsupportedFormat(f"unknown stream format {fmt!r}")


# ---------------------------------------------------------------------------
# Synthetic personas
# ---------------------------------------------------------------------------


@dataclass
class PersonaSpec:
    """Declarative description of a synthetic routine.

    ``locations`` maps each location label to 24 hourly dwell
    probabilities; across locations the probabilities for a given hour
    must sum to 1.  ``app_habits`` gives the app-label distribution for
    an (hour, location) context.  ``continuous_baselines`` gives the
    (mean, stddev) of a scalar sensor for each hour.  Wifi network labels
    are derived deterministically from the location label so that two
    streams at the same place see the same networks.
    """

    seed: int
    locations: list[tuple[str, list[float]]]
    app_habits: dict[tuple[int, str], dict[str, float]]
    continuous_baselines: dict[tuple[SensorKind, int], tuple[float, float]]
    event_rate: float = 2.0
    duration_days: int = 14
    user_id: str = "owner"
    start_ts: int = 0

    def location_labels(self) -> list[str]:
        return [label for label, _ in self.locations]

    def app_labels(self) -> set[str]:
        labels: set[str] = set()
        for dist in self.app_habits.values():
            labels.update(dist)
        return labels

    def dwell_mass(self) -> dict[str, float]:
        """Total dwell probability per location, summed over the 24 hours."""
        return {label: sum(dwell) for label, dwell in self.locations}

    def modal_location(self) -> str:
        mass = self.dwell_mass()
        return max(sorted(mass), key=lambda lab: mass[lab])

    def infrequent_location(self) -> str:
        """Least-visited location that is still visited at all."""
        mass = self.dwell_mass()
        visited = sorted(lab for lab, m in mass.items() if m > 0)
        if not visited:
            raise InvalidSpec("persona has no visited locations")
        return min(visited, key=lambda lab: mass[lab])


def validate_spec(spec: PersonaSpec) -> None:
    """Raise InvalidSpec for any violated PersonaSpec invariant."""
    if spec.duration_days < 1:
        raise InvalidSpec("duration_days must be >= 1")
    if not spec.event_rate > 0:
        raise InvalidSpec("event_rate must be > 0")
    if spec.start_ts < 0:
        raise InvalidSpec("start_ts must be >= 0")
    if not spec.locations:
        raise InvalidSpec("at least one location is required")
    labels = spec.location_labels()
    if len(set(labels)) != len(labels):
        raise InvalidSpec("location labels must be unique")
    if any(not lab for lab in labels):
        raise InvalidSpec("location labels must be non-empty")
    for label, dwell in spec.locations:
        if len(dwell) != 24:
            raise InvalidSpec(f"location {label!r} needs 24 dwell probabilities")
        if any(p < 0 for p in dwell):
            raise InvalidSpec(f"location {label!r} has a negative dwell probability")
    for hour in range(24):
        total = sum(dwell[hour] for _, dwell in spec.locations)
        if abs(total - 1.0) > 1e-9:
            raise InvalidSpec(f"dwell probabilities for hour {hour} sum to {total}")
    for (hour, loc), dist in spec.app_habits.items():
        if not 0 <= hour <= 23:
            raise InvalidSpec(f"app habit hour {hour} out of range")
        if not dist or any(p < 0 for p in dist.values()) or sum(dist.values()) <= 0:
            raise InvalidSpec(f"app habit ({hour}, {loc}) is not a distribution")
    sampler_hours: dict[SensorKind, set[int]] = {}
    for (sensor, hour), (_, std) in spec.continuous_baselines.items():
        if sensor not in CONTINUOUS_KINDS:
            raise InvalidSpec(f"{sensor} is not a continuous sensor")
        if not 0 <= hour <= 23:
            raise InvalidSpec(f"baseline hour {hour} out of range")
        if std < 0:
            raise InvalidSpec("stddev must be >= 0")
        sampler_hours.setdefault(sensor, set()).add(hour)
    if not any(len(hours) == 24 for hours in sampler_hours.values()):
        raise InvalidSpec(
            "at least one continuous sensor needs baselines for all 24 hours"
        )


def _wifi_networks(location: str, count: int = 3) -> list[str]:
    # Deterministic function of the location label so any stream generated
    # at the same place (owner or insider attacker) sees the same networks.
    return [f"net_{location}_{i}" for i in range(count)]


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's method; rates here are small.
    limit = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def _weighted_choice(rng: random.Random, dist: dict[str, float]) -> str:
    items = sorted(dist.items())
    total = sum(w for _, w in items)
    r = rng.random() * total
    acc = 0.0
    for label, w in items:
        acc += w
        if r < acc:
            return label
    return items[-1][0]


def _sampler_sensor(spec: PersonaSpec) -> SensorKind:
    """The continuous sensor guaranteed to emit once per minute."""
    full = sorted(
        {s for (s, _) in spec.continuous_baselines}
        & {
            s
            for s in CONTINUOUS_KINDS
            if all((s, h) in spec.continuous_baselines for h in range(24))
        },
        key=lambda s: s.value,
    )
    return full[0]


def _emit_minute(
    spec: PersonaSpec,
    rng: random.Random,
    minute_ts: int,
    hour: int,
    location: str,
    sampler: SensorKind,
) -> list[SensorEvent]:
    """All events for one minute at one location, sorted by timestamp."""
    continuous_sensors = sorted(
        {s for (s, _) in spec.continuous_baselines}, key=lambda s: s.value
    )
    pending: list[tuple[int, int, SensorKind, Union[str, float]]] = []
    order = 0

    def add(offset: int, sensor: SensorKind, value) -> None:
        nonlocal order
        pending.append((offset, order, sensor, value))
        order += 1

    # Guaranteed per-minute reading from the sampler sensor.
    mean, std = spec.continuous_baselines[(sampler, hour)]
    add(0, sampler, rng.gauss(mean, std))

    wifi = _wifi_networks(location)
    habit = spec.app_habits.get((hour, location))
    for sensor in (SensorKind.APP, SensorKind.CELL, SensorKind.WIFI):
        for _ in range(_poisson(rng, spec.event_rate)):
            offset = rng.randrange(SECONDS_PER_MINUTE)
            if sensor is SensorKind.APP:
                if habit is None:
                    continue
                add(offset, sensor, _weighted_choice(rng, habit))
            elif sensor is SensorKind.CELL:
                add(offset, sensor, location)
            else:
                add(offset, sensor, wifi[rng.randrange(len(wifi))])
    for sensor in continuous_sensors:
        baseline = spec.continuous_baselines.get((sensor, hour))
        if baseline is None:
            continue
        for _ in range(_poisson(rng, spec.event_rate)):
            offset = rng.randrange(SECONDS_PER_MINUTE)
            add(offset, sensor, rng.gauss(baseline[0], baseline[1]))

    pending.sort(key=lambda item: (item[0], item[1]))
    return [
        SensorEvent(minute_ts + off, spec.user_id, sensor, value, location)
        for off, _, sensor, value in pending
    ]


def _dwell_distribution(spec: PersonaSpec, hour: int) -> dict[str, float]:
    return {label: dwell[hour] for label, dwell in spec.locations}


def _generate_range(
    spec: PersonaSpec, rng: random.Random, start_ts: int, n_minutes: int
) -> list[SensorEvent]:
    sampler = _sampler_sensor(spec)
    events: list[SensorEvent] = []
    for i in range(n_minutes):
        minute_ts = start_ts + i * SECONDS_PER_MINUTE
        hour = local_hour(minute_ts)
        location = _weighted_choice(rng, _dwell_distribution(spec, hour))
        events.extend(_emit_minute(spec, rng, minute_ts, hour, location, sampler))
    return events


def generate_persona(spec: PersonaSpec) -> list[SensorEvent]:
    """Synthesize the owner's stream. Deterministic for a given spec."""
    validate_spec(spec)
    rng = random.Random(spec.seed)
    return _generate_range(
        spec, rng, spec.start_ts, spec.duration_days * MINUTES_PER_DAY
    )


class AttackKind(str, enum.Enum):
    UNINFORMED_OUTSIDER = "uninformed_outsider"
    INFORMED_OUTSIDER = "informed_outsider"
    UNINFORMED_INSIDER = "uninformed_insider"
    INFORMED_INSIDER = "informed_insider"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.value


def _marginal_app_habit(owner: PersonaSpec) -> dict[str, float]:
    """Owner's app label distribution aggregated over all contexts."""
    merged: dict[str, float] = {}
    for dist in owner.app_habits.values():
        total = sum(dist.values())
        for label, w in dist.items():
            merged[label] = merged.get(label, 0.0) + w / total
    if not merged:
        raise InvalidSpec("owner persona has no app habits")
    return merged


def _attack_spec(owner: PersonaSpec, kind: AttackKind) -> PersonaSpec:
    owner_labels = set(owner.location_labels())
    informed = kind in (AttackKind.INFORMED_OUTSIDER, AttackKind.INFORMED_INSIDER)
    if kind in (AttackKind.UNINFORMED_OUTSIDER, AttackKind.INFORMED_OUTSIDER):
        location = "atk_place"
        while location in owner_labels:
            location += "_x"
    elif kind is AttackKind.UNINFORMED_INSIDER:
        location = owner.infrequent_location()
    else:
        location = owner.modal_location()

    if informed:
        marginal = _marginal_app_habit(owner)
        habits = {}
        for hour in range(24):
            if kind is AttackKind.INFORMED_INSIDER and (hour, location) in owner.app_habits:
                # A housemate mimics the owner's habits at that exact place.
                habits[(hour, location)] = dict(owner.app_habits[(hour, location)])
            else:
                habits[(hour, location)] = dict(marginal)
    else:
        owner_apps = owner.app_labels()
        atk_apps = []
        i = 0
        while len(atk_apps) < 4:
            candidate = f"atk_app_{i}"
            if candidate not in owner_apps:
                atk_apps.append(candidate)
            i += 1
        habits = {
            (hour, location): {a: 1.0 / len(atk_apps) for a in atk_apps}
            for hour in range(24)
        }

    # Attacker scalar readings come from baselines distinct from the owner's.
    # Environmental sensors (light, noise, field) measure the place: an
    # insider sitting in an owner location sees near-owner readings, an
    # outsider in another city does not.  Workload sensors (cpu, battery,
    # ...) track what is being run: informed attackers drive the owner's own
    # apps, so their readings shift far less than an uninformed attacker's.
    insider = kind in (AttackKind.UNINFORMED_INSIDER, AttackKind.INFORMED_INSIDER)
    environmental = {SensorKind.LIGHT, SensorKind.NOISE, SensorKind.MAGNETIC}
    baselines = {}
    for (sensor, hour), (mean, std) in owner.continuous_baselines.items():
        if sensor in environmental:
            shift = 0.5 * std + 0.1 if insider else 4.0 * std + 1.0
        else:
            shift = 0.25 * std + 0.1 if informed else 1.5 * std + 0.25
        baselines[(sensor, hour)] = (mean + shift, std)
    return PersonaSpec(
        seed=owner.seed + 0x5EED,
        locations=[(location, [1.0] * 24)],
        app_habits=habits,
        continuous_baselines=baselines,
        event_rate=owner.event_rate,
        duration_days=owner.duration_days,
        user_id=owner.user_id,
        start_ts=owner.start_ts,
    )


def generate_attack(
    owner: PersonaSpec,
    kind: AttackKind,
    start: int,
    duration: int,
) -> list[SensorEvent]:
    """Synthesize an attacker stream spliced in at ``start`` for ``duration`` seconds.

    Outsiders use locations disjoint from the owner's; insiders reuse an
    owner location (the least frequent for the uninformed case, the modal
    one for the informed case).  Informed attackers draw app labels from
    the owner's habits, uninformed ones from a disjoint set.
    """
    validate_spec(owner)
    kind = AttackKind(kind)
    if start < owner.start_ts:
        raise InvalidSpec("attack must start after the owner stream begins")
    if duration <= 0:
        raise InvalidSpec("attack duration must be positive")
    spec = _attack_spec(owner, kind)
    rng = random.Random(spec.seed)
    start_minute = (start // SECONDS_PER_MINUTE) * SECONDS_PER_MINUTE
    n_minutes = max(1, math.ceil(duration / SECONDS_PER_MINUTE))
    return _generate_range(spec, rng, start_minute, n_minutes)


# ---------------------------------------------------------------------------
# Persona config files
# ---------------------------------------------------------------------------


def persona_to_dict(spec: PersonaSpec) -> dict:
    return {
        "seed": spec.seed,
        "user_id": spec.user_id,
        "start_ts": spec.start_ts,
        "duration_days": spec.duration_days,
        "event_rate": spec.event_rate,
        "locations": [
            {"label": label, "dwell": list(dwell)} for label, dwell in spec.locations
        ],
        "app_habits": [
            {"hour": hour, "location": loc, "apps": dict(dist)}
            for (hour, loc), dist in sorted(spec.app_habits.items())
        ],
        "continuous_baselines": [
            {"sensor": sensor.value, "hour": hour, "mean": mean, "std": std}
            for (sensor, hour), (mean, std) in sorted(
                spec.continuous_baselines.items(), key=lambda kv: (kv[0][0].value, kv[0][1])
            )
        ],
    }


def persona_from_dict(data: dict) -> PersonaSpec:
    try:
        spec = PersonaSpec(
            seed=int(data["seed"]),
            locations=[
                (str(loc["label"]), [float(p) for p in loc["dwell"]])
                for loc in data["locations"]
            ],
            app_habits={
                (int(h["hour"]), str(h["location"])): {
                    str(a): float(w) for a, w in h["apps"].items()
                }
                for h in data.get("app_habits", [])
            },
            continuous_baselines={
                (SensorKind(b["sensor"]), int(b["hour"])): (
                    float(b["mean"]),
                    float(b["std"]),
                )
                for b in data.get("continuous_baselines", [])
            },
            event_rate=float(data.get("event_rate", 2.0)),
            duration_days=int(data.get("duration_days", 14)),
            user_id=str(data.get("user_id", "owner")),
            start_ts=int(data.get("start_ts", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad persona config: {exc}") from exc
    validate_spec(spec)
    return spec
