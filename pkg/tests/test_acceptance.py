"""Acceptance criteria, one test per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
PASS/FAIL lines.  Every tolerance is pinned here; nothing is deferred to
later calibration.
"""

import itertools
import math
import random
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import yaml

from sensorauth.comfort import gap_penalty, score_window
from sensorauth.config import RunConfig
from sensorauth.density import ContinuousDensity, DiscreteDensity
from sensorauth.events import AttackKind, SensorEvent, SensorKind
from sensorauth.harness import simulate
from sensorauth.profile import Profile
from sensorauth.stability import day_distance, levenshtein
from tests.conftest import MOVE_DAY
from tests.test_comfort import hand_profile
from tests.test_density import kernel_sum_oracle
from tests.test_stability import lev_recursive


def criterion(number: int, description: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}")
    assert ok, f"criterion {number} failed: {description}"


class TestCriterion1EquationFidelity:
    def test_hand_worked_fixture_exact(self):
        snap = hand_profile()
        start = 15 * 3600 + 600
        events = [
            SensorEvent(start + 3, "u1", SensorKind.APP, "mail", "cell_7"),
            SensorEvent(start + 9, "u1", SensorKind.APP, "web", "cell_7"),
            SensorEvent(start + 15, "u1", SensorKind.APP, "chat", "cell_7"),
            SensorEvent(start + 21, "u1", SensorKind.WIFI, "net2", "cell_7"),
        ]
        sample = score_window(snap, start, events, prev_event_ts=start + 3 - 90)
        temporal = (Fraction(4, 9) + Fraction(1, 2)) / 2
        spatial = (Fraction(1, 3) + 1) / 2
        penalty = Fraction(30, 3540)
        expected = float((temporal + spatial) / 2 - penalty)
        ok = (
            abs(sample.temporal - float(temporal)) < 1e-12
            and abs(sample.spatial - float(spatial)) < 1e-12
            and abs(sample.gap_penalty - float(penalty)) < 1e-12
            and abs(sample.aggregate - expected) < 1e-12
        )
        criterion(1, "hand-worked two-sensor fixture matches to 1e-12", ok)

    def test_gap_penalty_boundary_values_exact(self):
        ok = (
            gap_penalty(0, 60) == 0.0
            and gap_penalty(0, 3600) == 1.0
            and gap_penalty(1000, 1000) == 0.0
            and gap_penalty(0, 10_000) == 1.0
        )
        criterion(1, "gap penalty is exactly 0 at 60 s and 1 at 3600 s", ok)


class TestCriterion2Density:
    def test_incremental_histogram_equals_batch_counts(self):
        rng = random.Random(1234)
        labels = "abcdefgh"
        ok = True
        for _ in range(1000):
            items = [rng.choice(labels) for _ in range(rng.randrange(0, 40))]
            order = list(items)
            rng.shuffle(order)
            d = DiscreteDensity()
            for item in order:
                d.observe(item)
            expected = Counter(items)
            ok = ok and d.counts == dict(expected) and d.total == len(items)
            ok = ok and d.max_count == (max(expected.values()) if expected else 0)
        criterion(2, "incremental histogram equals batch counts (1000 trials)", ok)

    def test_kde_matches_kernel_sum_oracle(self):
        rng = random.Random(99)
        xs = [0.3 + 0.5 * (rng.random() - 0.5) for _ in range(300)]
        d = ContinuousDensity()
        normalized = True
        for x in xs:
            d.observe(x)
            values = d.density()
            integral = float(np.trapezoid(values, dx=d.step))
            normalized = normalized and abs(integral - 1.0) <= 1e-3
        grid, expected = kernel_sum_oracle(xs)
        agree = bool(np.max(np.abs(d.density() - expected)) < 1e-6)
        criterion(2, "KDE grid matches direct kernel-sum oracle within 1e-6", agree)
        criterion(2, "KDE integrates to 1 +/- 1e-3 after every observation", normalized)


class TestCriterion3Stability:
    def test_identity_and_disjoint_distances(self):
        p = Profile("u1")
        base = 3 * 3600
        for i in range(60):
            p.ingest_event(SensorEvent(base + i, "u1", SensorKind.APP, "mail", "cell_a"))
        snap_a = p.snapshot_day(0)
        snap_same = p.snapshot_day(0)
        snap_same.day_number = 1
        identical = day_distance(snap_a, snap_same).global_ == 0.0

        q = Profile("u1")
        for i in range(60):
            q.ingest_event(
                SensorEvent(86400 + 17 * 3600 + i, "u1", SensorKind.WIFI, "n1", "cell_b")
            )
        snap_b = q.snapshot_day(1)
        disjoint = day_distance(snap_a, snap_b).global_ == 1.0
        criterion(3, "identical snapshots distance 0, disjoint snapshots 1",
                  identical and disjoint)

    def test_levenshtein_matches_recursive_oracle(self):
        words = ["".join(w) for k in range(5) for w in itertools.product("abc", repeat=k)]
        ok = all(
            levenshtein(a, b) == lev_recursive(a, b) for a in words for b in words
        )
        rng = random.Random(4242)
        for _ in range(2000):
            a = "".join(rng.choice("abc") for _ in range(rng.randrange(9)))
            b = "".join(rng.choice("abc") for _ in range(rng.randrange(9)))
            ok = ok and levenshtein(a, b) == lev_recursive(a, b)
        criterion(3, "Levenshtein matches brute-force recursive oracle (<=8, 3 letters)", ok)


class TestCriterion4Convergence:
    def test_default_persona_converges_in_3_to_14_days(self, base_replay):
        day = base_replay.converged_day
        criterion(4, f"stationary persona converged on day {day} (3..14)",
                  day is not None and 3 <= day <= 14)


class TestCriterion5Threshold:
    def test_owner_challenge_fraction(self, base_replay):
        challenged = sum(r.challenges for r in base_replay.daily)
        total = sum(r.decisions_total for r in base_replay.daily)
        fraction = challenged / total
        criterion(
            5,
            f"owner challenge fraction {fraction:.2%} within [0.5%, 5%]",
            0.005 <= fraction <= 0.05,
        )


class TestCriterion6AttackOrdering:
    def test_orderings(self, attack_results):
        order = [
            AttackKind.UNINFORMED_OUTSIDER,
            AttackKind.INFORMED_OUTSIDER,
            AttackKind.UNINFORMED_INSIDER,
            AttackKind.INFORMED_INSIDER,
        ]
        means = [attack_results[k].mean_comfort for k in order]
        rates = [attack_results[k].detection_rate for k in order]
        comfort_ok = all(a < b for a, b in zip(means, means[1:]))
        detect_ok = all(a > b for a, b in zip(rates, rates[1:]))
        floor_ok = rates[0] >= 0.95
        criterion(
            6,
            "mean comfort strictly increases along the four attacks "
            f"({', '.join(f'{m:+.3f}' for m in means)})",
            comfort_ok,
        )
        criterion(
            6,
            "detection rate strictly decreases, uninformed outsider >= 95% "
            f"({', '.join(f'{r:.1%}' for r in rates)})",
            detect_ok and floor_ok,
        )


class TestCriterion7Drift:
    def daily_means(self, result):
        return {r.day: r.mean_comfort for r in result.daily}

    def pre_move_mean(self, result):
        days = self.daily_means(result)
        values = [days[d] for d in range(2, MOVE_DAY)]
        return sum(values) / len(values)

    def test_drift_and_retraining(self, drift_results):
        none_result = drift_results["none"]
        pre = self.pre_move_mean(none_result)
        post = [v for d, v in self.daily_means(none_result).items() if d >= MOVE_DAY]
        depressed = all(v <= pre - 0.2 for v in post)
        criterion(
            7,
            "no-retrain strategy stays >= 0.2 below pre-move comfort",
            depressed,
        )

        recovered = True
        for strategy in ("update", "fresh"):
            result = drift_results[strategy]
            pre_s = self.pre_move_mean(result)
            window = [
                v
                for d, v in self.daily_means(result).items()
                if MOVE_DAY <= d <= MOVE_DAY + 7
            ]
            recovered = recovered and max(window) >= 0.8 * pre_s
        criterion(7, "update and fresh recover within 20% in 7 days", recovered)

        def early_mean(result):
            values = [
                v
                for d, v in self.daily_means(result).items()
                if MOVE_DAY <= d < MOVE_DAY + 3
            ]
            return sum(values) / len(values)

        criterion(
            7,
            "update >= fresh over the first 3 post-move days",
            early_mean(drift_results["update"]) >= early_mean(drift_results["fresh"]),
        )


class TestCriterion8Determinism:
    def test_simulate_twice_byte_identical(self, tmp_path):
        scenario = {
            "owner": "default",
            "seed": 11,
            "owner_days": 10,
            "attacks": [{"kind": k.value, "duration_hours": 2} for k in AttackKind],
            "drift": {"move_day": 6, "strategies": ["update", "fresh"]},
        }
        outs = []
        for run in ("a", "b"):
            outdir = tmp_path / run
            simulate(scenario, outdir, RunConfig())
            outs.append(
                {
                    p.name: p.read_bytes()
                    for p in sorted(outdir.iterdir())
                    if p.suffix == ".csv"
                }
            )
        ok = outs[0].keys() == outs[1].keys() and all(
            outs[0][name] == outs[1][name] for name in outs[0]
        )
        criterion(8, f"two simulate runs byte-identical ({len(outs[0])} CSVs)", ok)


class TestCriterion9Performance:
    def synthetic_events(self, n):
        rng = random.Random(0)
        labels = ["mail", "web", "chat", "docs", "maps"]
        locations = ["cell_a", "cell_b", "cell_c"]
        events = []
        for i in range(n):
            ts = i // 12
            loc = locations[i % 3]
            if i % 10 < 7:
                sensor = (SensorKind.APP, SensorKind.WIFI, SensorKind.CELL)[i % 3]
                value = labels[(i * 7) % 5]
            else:
                sensor = (SensorKind.LIGHT, SensorKind.NOISE, SensorKind.CPU)[i % 3]
                value = rng.gauss(100.0, 20.0)
            events.append(SensorEvent(ts, "perf", sensor, value, loc))
        return events

    def ingest_time(self, events, n, repeats=3):
        best = math.inf
        for _ in range(repeats):
            profile = Profile("perf")
            start = time.perf_counter()
            for e in events[:n]:
                profile.ingest_event(e)
            best = min(best, time.perf_counter() - start)
        return best

    def test_linear_time_ingestion(self):
        events = self.synthetic_events(1_000_000)
        self.ingest_time(events, 50_000, repeats=1)  # warm caches
        t_small = self.ingest_time(events, 400_000)
        t_large = self.ingest_time(events, 1_000_000)
        ratio = t_large / t_small
        criterion(
            9,
            f"1e6 events ingest in {t_large:.2f}s, "
            f"{ratio:.2f}x the 4e5-event time (limit 2.5x)",
            ratio <= 2.5,
        )
