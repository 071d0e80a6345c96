"""Threshold, drift, and state-machine tests."""

import math
import random

import pytest

from sensorauth.comfort import ComfortSample
from sensorauth.config import RunConfig
from sensorauth.errors import (
    BaselineNotReady,
    DoubleClose,
    EmptyDay,
    NoHistory,
    NotAuthenticated,
)
from sensorauth.lifecycle import (
    DriftState,
    LifecycleController,
    Phase,
    RetrainMode,
    ThresholdState,
    check_drift,
    comfort_deciles,
    daily_percentile,
    decide,
)
from sensorauth.profile import Profile
from sensorauth.stability import DayDistance


def samples_of(values):
    return [
        ComfortSample(window_start=i * 60, aggregate=v, temporal=v, spatial=v)
        for i, v in enumerate(values)
    ]


def distances(values):
    return [
        DayDistance(day_index=i, temporal=v, spatial=v, global_=v)
        for i, v in enumerate(values)
    ]


class TestDailyPercentile:
    def test_constant_distribution(self):
        assert daily_percentile(samples_of([0.5] * 10), 2.0) == 0.5

    def test_nearest_rank_on_ten_items(self):
        values = [x / 10 for x in range(1, 11)]
        assert daily_percentile(samples_of(values), 2.0) == pytest.approx(0.1)

    def test_uniform_day_matches_sort_oracle(self):
        rng = random.Random(8)
        values = [rng.random() for _ in range(1440)]
        got = daily_percentile(samples_of(values), 2.0)
        # Oracle: explicit sort and 1-based index ceil(p/100 * N).
        expected = sorted(values)[math.ceil(0.02 * 1440) - 1]
        assert got == expected
        assert got == pytest.approx(0.02, abs=0.01)

    def test_empty_day_rejected(self):
        with pytest.raises(EmptyDay):
            daily_percentile([], 2.0)

    def test_percentile_bounds_validated(self):
        with pytest.raises(ValueError):
            daily_percentile(samples_of([0.1]), 0.0)
        with pytest.raises(ValueError):
            daily_percentile(samples_of([0.1]), 100.0)

    def test_fraction_strictly_below_is_bounded(self):
        rng = random.Random(15)
        for _ in range(50):
            n = rng.randrange(1, 300)
            values = [rng.choice([0.1, 0.3, 0.5, rng.random()]) for _ in range(n)]
            p = rng.uniform(0.5, 20.0)
            cut = daily_percentile(samples_of(values), p)
            below = sum(1 for v in values if v < cut)
            assert below / n <= p / 100.0 + 1.0 / n


class TestThreshold:
    def test_single_day(self):
        ts = ThresholdState()
        ts.add_day(1, 0.2)
        assert ts.current_threshold() == 0.2

    def test_median_resists_one_outlier(self):
        ts = ThresholdState()
        for day, v in enumerate([0.1, 0.2, 0.9]):
            ts.add_day(day, v)
        assert ts.current_threshold() == 0.2

    def test_stationary_week_within_range(self):
        rng = random.Random(2)
        values = [0.4 + 0.05 * rng.random() for _ in range(7)]
        ts = ThresholdState()
        for day, v in enumerate(values):
            ts.add_day(day, v)
        assert min(values) <= ts.current_threshold() <= max(values)

    def test_trailing_window(self):
        ts = ThresholdState(window_days=7)
        for day in range(30):
            ts.add_day(day, 0.9 if day < 20 else 0.1)
        assert ts.current_threshold() == 0.1

    def test_no_history(self):
        with pytest.raises(NoHistory):
            ThresholdState().current_threshold()


class TestDecide:
    def test_comfortable_above_threshold(self):
        ts = ThresholdState()
        ts.add_day(1, 0.2)
        (sample,) = samples_of([0.5])
        assert decide(sample, ts).decision == "comfortable"

    def test_challenge_below_threshold(self):
        ts = ThresholdState()
        ts.add_day(1, 0.2)
        (sample,) = samples_of([0.1])
        d = decide(sample, ts)
        assert d.decision == "challenge"
        assert d.challenged

    def test_decision_carries_breakdown(self):
        ts = ThresholdState()
        ts.add_day(1, 0.2)
        sample = ComfortSample(
            window_start=0, aggregate=0.1, temporal=0.05, spatial=0.15
        )
        d = decide(sample, ts)
        assert (d.temporal, d.spatial, d.threshold) == (0.05, 0.15, 0.2)


class TestDrift:
    def ready_state(self, baseline=0.5):
        ds = DriftState()
        ds.baseline_deciles = [baseline] * 9
        return ds

    def test_baseline_not_ready(self):
        with pytest.raises(BaselineNotReady):
            check_drift(DriftState(), samples_of([0.5] * 10))

    def test_day_equal_to_baseline_no_drift(self):
        ds = self.ready_state()
        for _ in range(5):
            ds, drifted = check_drift(ds, samples_of([0.5] * 100))
            assert not drifted
            assert ds.consecutive_breaches == 0

    def test_uniform_drop_three_days_flags_drift(self):
        # A 0.3 uniform comfort drop gives decile distance 3*0.3/2 = 0.45.
        ds = self.ready_state()
        flags = []
        for _ in range(3):
            ds, drifted = check_drift(ds, samples_of([0.2] * 100))
            flags.append(drifted)
        assert flags == [False, False, True]

    def test_single_bad_day_then_recovery_resets(self):
        ds = self.ready_state()
        ds, drifted = check_drift(ds, samples_of([0.2] * 100))
        assert not drifted and ds.consecutive_breaches == 1
        ds, drifted = check_drift(ds, samples_of([0.5] * 100))
        assert not drifted and ds.consecutive_breaches == 0

    def test_baseline_accumulates_over_first_days(self):
        ds = DriftState(baseline_days=3)
        for v in (0.4, 0.5, 0.6):
            ds.accumulate(comfort_deciles(samples_of([v] * 50)))
        assert ds.baseline_ready
        assert ds.baseline_deciles == pytest.approx([0.5] * 9)


def make_controller(config=None) -> LifecycleController:
    config = config or RunConfig()
    return LifecycleController(Profile("u1"), config)


class TestController:
    def test_training_day_with_converged_history_deploys(self):
        c = make_controller()
        events = c.end_of_day(10, distances([0.4, 0.08, 0.07]), samples_of([0.5] * 10), now=10 * 86400)
        assert "converged" in events
        assert c.phase is Phase.DEPLOYED
        assert c.state.deployed_since == 10
        assert c.threshold.current == 0.5

    def test_not_converged_stays_training(self):
        c = make_controller()
        events = c.end_of_day(3, distances([0.4, 0.3]), samples_of([0.2] * 10), now=3 * 86400)
        assert events == []
        assert c.phase is Phase.TRAINING
        assert not c.has_threshold()

    def test_no_deployment_without_convergence(self):
        c = make_controller()
        for day in range(1, 8):
            c.end_of_day(day, distances([0.5] * day), samples_of([0.3] * 5), now=day * 86400)
        assert c.phase is Phase.TRAINING

    def test_double_close_rejected(self):
        c = make_controller()
        c.end_of_day(1, [], samples_of([0.1]), now=86400)
        with pytest.raises(DoubleClose):
            c.end_of_day(1, [], samples_of([0.1]), now=86400)

    def test_deployed_day_updates_threshold_and_baseline(self):
        c = make_controller()
        c.end_of_day(1, distances([0.05, 0.05]), samples_of([0.5] * 10), now=86400)
        assert c.phase is Phase.DEPLOYED
        c.end_of_day(2, [], samples_of([0.6] * 10), now=2 * 86400)
        assert len(c.threshold.daily) == 2
        assert len(c.drift.pending) == 2  # accumulating toward the baseline

    def test_drift_suggested_after_breaches(self):
        config = RunConfig(drift_baseline_days=2, drift_breach_days=2)
        c = make_controller(config)
        c.profile.drift.baseline_days = 2
        c.profile.drift.breach_days = 2
        c.end_of_day(1, distances([0.05, 0.05]), samples_of([0.5] * 20), now=86400)
        c.end_of_day(2, [], samples_of([0.5] * 20), now=2 * 86400)
        assert c.drift.baseline_ready
        assert c.end_of_day(3, [], samples_of([0.1] * 20), now=3 * 86400) == []
        events = c.end_of_day(4, [], samples_of([0.1] * 20), now=4 * 86400)
        assert "drift_suggested" in events
        assert c.phase is Phase.DEPLOYED  # recommendation only, no auto retrain


class TestRetrain:
    def deployed_controller(self):
        c = make_controller()
        c.end_of_day(5, distances([0.05, 0.04]), samples_of([0.5] * 10), now=5 * 86400)
        assert c.phase is Phase.DEPLOYED
        c.profile.ingest_event.__self__  # profile is live
        return c

    def test_requires_authentication(self):
        c = self.deployed_controller()
        with pytest.raises(NotAuthenticated):
            c.begin_retrain(RetrainMode.UPDATE, authenticated=False, now=6 * 86400)

    def test_fresh_resets_profile(self):
        c = self.deployed_controller()
        from sensorauth.events import SensorEvent, SensorKind

        c.profile.ingest_event(SensorEvent(6 * 86400, "u1", SensorKind.APP, "a", "l"))
        assert c.profile.days_observed == 1
        c.begin_retrain(RetrainMode.FRESH, authenticated=True, now=6 * 86400)
        assert c.phase is Phase.RETRAINING
        assert c.profile.days_observed == 0
        assert c.profile.user_id == "u1"
        assert not c.has_threshold()
        assert c.state.retrain_deadline == 6 * 86400 + 4 * 3600

    def test_update_keeps_profile_and_threshold(self):
        c = self.deployed_controller()
        from sensorauth.events import SensorEvent, SensorKind

        c.profile.ingest_event(SensorEvent(6 * 86400, "u1", SensorKind.APP, "a", "l"))
        c.begin_retrain(RetrainMode.UPDATE, authenticated=True, now=6 * 86400)
        assert c.phase is Phase.RETRAINING
        assert c.profile.days_observed == 1
        assert c.has_threshold()

    def test_deadline_expiry_returns_to_deployed(self):
        config = RunConfig(retrain_auto_extend=False)
        c = LifecycleController(Profile("u1"), config)
        c.end_of_day(5, distances([0.05, 0.04]), samples_of([0.5] * 10), now=5 * 86400)
        c.begin_retrain(RetrainMode.UPDATE, authenticated=True, now=6 * 86400)
        deadline = c.state.retrain_deadline
        assert c.check_deadline(deadline - 1) == []
        assert c.phase is Phase.RETRAINING
        assert c.check_deadline(deadline) == ["retrain_expired"]
        assert c.phase is Phase.DEPLOYED
        assert c.state.retrain_deadline is None

    def test_deadline_auto_extends(self):
        c = self.deployed_controller()
        c.begin_retrain(RetrainMode.UPDATE, authenticated=True, now=6 * 86400)
        deadline = c.state.retrain_deadline
        assert c.check_deadline(deadline) == ["retrain_extended"]
        assert c.phase is Phase.RETRAINING
        assert c.state.retrain_deadline > deadline

    def test_retraining_converges_back_to_deployed(self):
        c = self.deployed_controller()
        c.begin_retrain(RetrainMode.UPDATE, authenticated=True, now=6 * 86400)
        events = c.end_of_day(
            7, distances([0.06, 0.05]), samples_of([0.4] * 10), now=7 * 86400
        )
        assert "converged" in events and "retrain_completed" in events
        assert c.phase is Phase.DEPLOYED
