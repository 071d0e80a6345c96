"""End-to-end replay, attack, and drift scenario tests."""

import pytest

from sensorauth.config import RunConfig
from sensorauth.errors import InvalidScenario, NotDeployedBeforeAttack
from sensorauth.events import AttackKind, generate_persona, local_day
from sensorauth.harness import (
    build_move_stream,
    comfort_daily_csv,
    decisions_csv,
    default_persona,
    distances_csv,
    moved_persona,
    replay,
    run_attack,
    run_drift_case,
    scenario_summary_csv,
)
from sensorauth.lifecycle import Phase
from tests.conftest import MOVE_DAY


class TestReplay:
    def test_stationary_persona_reaches_deployment(self, base_replay):
        assert base_replay.converged_day is not None
        assert base_replay.deployed_day == base_replay.converged_day
        assert 3 <= base_replay.converged_day <= 14
        assert base_replay.profile.state.phase is Phase.DEPLOYED
        assert base_replay.deployed_snapshot is not None

    def test_threshold_stabilizes(self, base_replay):
        tail = [current for _, _, current in base_replay.threshold_history[-5:]]
        assert len(tail) == 5
        assert max(tail) - min(tail) < 0.1

    def test_daily_p2_rises_during_early_training(self, base_replay):
        p2 = {row.day: row.p2 for row in base_replay.daily if row.p2 is not None}
        deployed = [
            row.p2 for row in base_replay.daily if row.phase == "deployed"
        ]
        assert p2[1] < sum(deployed) / len(deployed)
        assert p2[1] < p2[2]

    def test_distances_fall_below_convergence_threshold(self, base_replay):
        history = base_replay.distance_history
        assert len(history) >= 2
        assert all(0.0 <= d.global_ <= 1.0 for d in history)
        converged_at = base_replay.converged_day
        upto = [
            d
            for d in history
            if base_replay.ordinal_of(d.day_index) <= converged_at
        ]
        assert len(upto) >= 2
        assert all(d.global_ < 0.1 for d in upto[-2:])

    def test_empty_stream_is_a_vacuous_run(self):
        result = replay([], RunConfig())
        assert result.converged_day is None
        assert result.deployed_day is None
        assert result.distance_history == []
        assert result.decisions == []
        assert result.daily == []

    def test_decision_log_matches_daily_counts(self, base_replay):
        challenges = sum(1 for d in base_replay.decisions if d.decision == "challenge")
        assert challenges == sum(r.challenges for r in base_replay.daily)
        assert len(base_replay.decisions) == sum(
            r.decisions_total for r in base_replay.daily
        )

    def test_windows_emitted_every_minute(self, base_replay):
        full_days = [r for r in base_replay.daily if 1 < r.day < len(base_replay.daily)]
        assert all(r.n_samples == 1440 for r in full_days)

    def test_no_ingestion_while_deployed(self, base_replay, owner_events):
        deployed_day = base_replay.deployed_day
        boundary = None
        for e in owner_events:
            ordinal = local_day(e.timestamp) + 1
            if ordinal <= deployed_day:
                boundary = e.timestamp
        assert base_replay.profile.last_event_ts == boundary

    def test_csv_emission_shapes(self, base_replay):
        lines = distances_csv(base_replay).strip().splitlines()
        assert lines[0] == "day,temporal,spatial,global"
        assert len(lines) == len(base_replay.distance_history) + 1
        daily = comfort_daily_csv(base_replay).strip().splitlines()
        assert len(daily) == len(base_replay.daily) + 1
        decisions = decisions_csv(base_replay.decisions).strip().splitlines()
        assert decisions[0] == "window_start,aggregate,threshold,decision,phase"


class TestAttacks:
    def test_owner_challenge_fraction_in_band(self, base_replay):
        challenged = sum(r.challenges for r in base_replay.daily)
        total = sum(r.decisions_total for r in base_replay.daily)
        assert 0.005 <= challenged / total <= 0.05

    def test_detection_metrics_consistent(self, attack_results):
        for result in attack_results.values():
            recomputed = sum(
                1 for s in result.samples if s.aggregate < result.threshold
            ) / len(result.samples)
            assert recomputed == result.detection_rate
            if result.detection_rate > 0:
                assert result.time_to_detect is not None
                first = min(
                    s.window_start
                    for s in result.samples
                    if s.aggregate < result.threshold
                )
                assert result.time_to_detect == first + 60 - result.attack_start
            else:
                assert result.time_to_detect is None

    def test_attack_ordering_property(self, attack_results):
        order = [
            AttackKind.UNINFORMED_OUTSIDER,
            AttackKind.INFORMED_OUTSIDER,
            AttackKind.UNINFORMED_INSIDER,
            AttackKind.INFORMED_INSIDER,
        ]
        means = [attack_results[k].mean_comfort for k in order]
        rates = [attack_results[k].detection_rate for k in order]
        assert all(a < b for a, b in zip(means, means[1:]))
        assert all(a > b for a, b in zip(rates, rates[1:]))
        assert rates[0] >= 0.95

    def test_self_attack_detection_near_percentile(
        self, owner_spec, owner_events, run_config, base_replay
    ):
        deployed_abs = base_replay.first_abs_day + base_replay.deployed_day - 1
        start = (deployed_abs + 3) * 86400 + 14 * 3600
        own_continuation = [e for e in owner_events if e.timestamp >= start]
        result = run_attack(
            owner_spec,
            None,
            run_config,
            start=start,
            duration=4 * 3600,
            attack_stream=own_continuation,
            base=base_replay,
        )
        assert result.kind == "custom"
        assert result.detection_rate <= 0.06
        assert result.mean_comfort > 0.5

    def test_not_deployed_before_attack(self, run_config):
        short = default_persona(seed=7, duration_days=3)
        with pytest.raises(NotDeployedBeforeAttack):
            run_attack(short, AttackKind.UNINFORMED_OUTSIDER, run_config)

    def test_summary_csv(self, attack_results):
        csv_text = scenario_summary_csv(list(attack_results.values()))
        lines = csv_text.strip().splitlines()
        assert len(lines) == 5
        assert lines[0].startswith("scenario,mean_comfort,detection_rate")


class TestDriftCases:
    def pre_move_mean(self, result):
        days = {r.day: r.mean_comfort for r in result.daily}
        values = [days[d] for d in range(2, MOVE_DAY)]
        return sum(values) / len(values)

    def test_no_retrain_leaves_comfort_depressed(self, drift_results):
        result = drift_results["none"]
        pre = self.pre_move_mean(result)
        post = [r.mean_comfort for r in result.daily if r.day >= MOVE_DAY]
        assert all(v <= pre - 0.2 for v in post)

    def test_both_retrain_modes_recover_within_seven_days(self, drift_results):
        for strategy in ("update", "fresh"):
            result = drift_results[strategy]
            pre = self.pre_move_mean(result)
            window = [
                r.mean_comfort
                for r in result.daily
                if MOVE_DAY <= r.day <= MOVE_DAY + 7
            ]
            assert max(window) >= 0.8 * pre, strategy

    def test_update_beats_fresh_early(self, drift_results):
        def first_days_mean(result):
            values = [
                r.mean_comfort
                for r in result.daily
                if MOVE_DAY <= r.day < MOVE_DAY + 3
            ]
            return sum(values) / len(values)

        assert first_days_mean(drift_results["update"]) >= first_days_mean(
            drift_results["fresh"]
        )

    def test_drift_detector_flags_unretrained_move(self, drift_results):
        events = [name for _, name in drift_results["none"].lifecycle_events]
        assert "drift_suggested" in events

    def test_fresh_retrain_restarts_profile(self, drift_results):
        result = drift_results["fresh"]
        moved_events = [name for _, name in result.lifecycle_events]
        assert "retrain_started:fresh" in moved_events
        assert "retrain_completed" in moved_events
        # The final profile only knows post-move days.
        assert result.profile.days_observed < MOVE_DAY

    def test_unknown_strategy_rejected(self, owner_spec, run_config):
        with pytest.raises(InvalidScenario):
            run_drift_case(owner_spec, MOVE_DAY, "sideways", run_config)

    def test_move_before_deployment_rejected(self, owner_spec, run_config):
        with pytest.raises(InvalidScenario):
            run_drift_case(owner_spec, 2, "none", run_config)

    def test_move_stream_changes_every_location(self, owner_spec):
        events, post_spec = build_move_stream(owner_spec, MOVE_DAY)
        pre_locs = {e.location_id for e in events if local_day(e.timestamp) < MOVE_DAY - 1}
        post_locs = {e.location_id for e in events if local_day(e.timestamp) >= MOVE_DAY - 1}
        assert pre_locs.isdisjoint(post_locs)
        assert set(post_spec.location_labels()) == post_locs
        moved = moved_persona(owner_spec)
        assert moved.app_labels() == owner_spec.app_labels()
