"""Shared fixtures: one owner replay reused across harness and acceptance tests."""

import pytest

from sensorauth.config import RunConfig
from sensorauth.events import AttackKind, generate_persona
from sensorauth.harness import default_persona, replay, run_attack, run_drift_case

MOVE_DAY = 7


@pytest.fixture(scope="session")
def run_config():
    return RunConfig()


@pytest.fixture(scope="session")
def owner_spec():
    return default_persona(seed=7, duration_days=16)


@pytest.fixture(scope="session")
def owner_events(owner_spec):
    return generate_persona(owner_spec)


@pytest.fixture(scope="session")
def base_replay(owner_events, run_config):
    return replay(owner_events, run_config)


@pytest.fixture(scope="session")
def attack_results(owner_spec, run_config, base_replay):
    return {
        kind: run_attack(owner_spec, kind, run_config, base=base_replay)
        for kind in AttackKind
    }


@pytest.fixture(scope="session")
def drift_results(owner_spec, run_config):
    return {
        strategy: run_drift_case(owner_spec, MOVE_DAY, strategy, run_config)
        for strategy in ("none", "update", "fresh")
    }
