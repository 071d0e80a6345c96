"""Command-line surface: train, score, simulate, gen, report.

All I/O is file based.  Exit codes: 0 success (train: converged), 1 any
error, 2 train finished without converging, 3 score refused a profile
still in training (pass --force to override).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .comfort import score_windows
from .config import RunConfig
from .errors import SensorAuthError
from .events import (
    AttackKind,
    generate_attack,
    generate_persona,
    local_day,
    parse_stream,
    persona_from_dict,
    serialize_stream,
)
from .harness import (
    comfort_daily_csv,
    decisions_csv,
    distances_csv,
    lifecycle_log_lines,
    replay,
    simulate,
)
from .lifecycle import Phase, decide
from .profile import Profile

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_NOT_DEPLOYED = 3


def _load_config(path: str | None, overrides: list[str]) -> RunConfig:
    config = RunConfig.from_file(path) if path else RunConfig()
    if overrides:
        data = config.to_dict()
        for item in overrides:
            key, sep, raw = item.partition("=")
            if not sep or key not in data:
                raise SensorAuthError(f"bad --set {item!r}")
            data[key] = yaml.safe_load(raw)
        config = RunConfig.from_dict(data)
    return config


def _read_stream(path: str, fmt: str):
    with open(path, "rb") as fh:
        result = parse_stream(fh, fmt)
    if result.rejected:
        print(f"skipped {result.rejected_count} malformed records", file=sys.stderr)
    return result.events


def _guess_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if path.endswith((".jsonl", ".ndjson")) else "csv"


def cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args.set)
    events = _read_stream(args.input, _guess_format(args.input, args.format))
    result = replay(events, config)
    Path(args.output).write_bytes(result.profile.save())
    if args.distances:
        Path(args.distances).write_text(distances_csv(result), encoding="utf-8")
    if args.daily:
        Path(args.daily).write_text(comfort_daily_csv(result), encoding="utf-8")
    for line in lifecycle_log_lines(result):
        print(line)
    if result.converged_day is None:
        print("not converged")
        return EXIT_NOT_CONVERGED
    print(f"converged on day {result.converged_day}")
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args.set)
    profile = Profile.load(Path(args.profile).read_bytes())
    if profile.state.phase is Phase.TRAINING and not args.force:
        print("profile is still in training (use --force to score anyway)",
              file=sys.stderr)
        return EXIT_NOT_DEPLOYED
    events = _read_stream(args.input, _guess_format(args.input, args.format))
    threshold_state = profile.threshold
    if threshold_state.current is None:
        # Only reachable via --force on an undeployed profile.
        threshold_state = threshold_state.copy()
        threshold_state.current = 0.0
    rows = ["window_start,aggregate,threshold,decision,phase"]
    if events:
        off = config.utc_offset_seconds
        snapshot = profile.snapshot_day(local_day(profile.last_event_ts or 0, off))
        start = (events[0].timestamp // 60) * 60
        end = (events[-1].timestamp // 60) * 60 + 60
        samples, _ = score_windows(
            snapshot, events, start, end, None,
            utc_offset=off,
            window_seconds=config.window_seconds,
            gap_zero=config.gap_zero_seconds,
            gap_one=config.gap_one_seconds,
        )
        for sample in samples:
            d = decide(sample, threshold_state)
            rows.append(
                f"{d.window_start},{d.aggregate!r},{d.threshold!r},"
                f"{d.decision},{profile.state.phase.value}"
            )
    Path(args.output).write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {len(rows) - 1} decisions to {args.output}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args.set)
    scenario = yaml.safe_load(Path(args.scenario).read_text(encoding="utf-8")) or {}
    if not isinstance(scenario, dict):
        raise SensorAuthError("scenario file must be a mapping")
    manifest = simulate(scenario, args.outdir, config)
    print(f"wrote {', '.join(manifest['outputs'])} to {args.outdir}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    data = yaml.safe_load(Path(args.persona).read_text(encoding="utf-8"))
    spec = persona_from_dict(data)
    if args.attack:
        start = args.attack_start
        if start is None:
            start = spec.start_ts + (spec.duration_days // 2) * 86400 + 14 * 3600
        events = generate_attack(
            spec, AttackKind(args.attack), start, args.attack_duration
        )
    else:
        events = generate_persona(spec)
    fmt = _guess_format(args.output, args.format)
    Path(args.output).write_bytes(serialize_stream(events, fmt))
    print(f"wrote {len(events)} events to {args.output}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Aggregate run CSVs into one long-format table for plotting."""
    outdir = Path(args.rundir)
    rows = ["source,series,day,value"]
    distances = outdir / "distances.csv"
    if distances.exists():
        header, *lines = distances.read_text(encoding="utf-8").splitlines()
        cols = header.split(",")
        for line in lines:
            cells = line.split(",")
            for name, cell in zip(cols[1:], cells[1:]):
                rows.append(f"distances,{name},{cells[0]},{cell}")
    daily = outdir / "comfort_daily.csv"
    if daily.exists():
        header, *lines = daily.read_text(encoding="utf-8").splitlines()
        cols = header.split(",")
        wanted = {"mean_comfort", "p2", "threshold"}
        for line in lines:
            cells = dict(zip(cols, line.split(",")))
            for name in sorted(wanted):
                if cells.get(name):
                    rows.append(f"comfort_daily,{name},{cells['day']},{cells[name]}")
    Path(args.output).write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {len(rows) - 1} series points to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorauth",
        description="Implicit-authentication engine over sensor event streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("-c", "--config", help="YAML run config file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key",
        )

    p_train = sub.add_parser("train", help="ingest a stream and write a profile")
    p_train.add_argument("input", help="event stream file (csv or jsonl)")
    p_train.add_argument("-o", "--output", required=True, help="profile file to write")
    p_train.add_argument("--distances", help="write day distances CSV here")
    p_train.add_argument("--daily", help="write daily comfort CSV here")
    p_train.add_argument("--format", choices=["csv", "jsonl"])
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_score = sub.add_parser("score", help="score a stream against a saved profile")
    p_score.add_argument("profile", help="profile file from train")
    p_score.add_argument("input", help="event stream file")
    p_score.add_argument("-o", "--output", required=True, help="decision CSV to write")
    p_score.add_argument("--force", action="store_true",
                         help="score even if the profile is still training")
    p_score.add_argument("--format", choices=["csv", "jsonl"])
    common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_sim = sub.add_parser("simulate", help="run a scenario file end to end")
    p_sim.add_argument("scenario", help="YAML scenario file")
    p_sim.add_argument("-o", "--outdir", required=True, help="output directory")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_gen = sub.add_parser("gen", help="generate a persona or attack stream")
    p_gen.add_argument("persona", help="YAML persona file")
    p_gen.add_argument("-o", "--output", required=True, help="stream file to write")
    p_gen.add_argument("--format", choices=["csv", "jsonl"])
    p_gen.add_argument("--attack", choices=[k.value for k in AttackKind])
    p_gen.add_argument("--attack-start", type=int, default=None,
                       help="attack start timestamp (default: midway, 2pm)")
    p_gen.add_argument("--attack-duration", type=int, default=4 * 3600)
    p_gen.set_defaults(func=cmd_gen)

    p_rep = sub.add_parser("report", help="aggregate run CSVs into plot data")
    p_rep.add_argument("rundir", help="directory written by train/simulate")
    p_rep.add_argument("-o", "--output", required=True, help="long-format CSV to write")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SensorAuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
