import numpy as np
import pytest

from phmprep.frame import EventLog, EventRecord, SensorFrame
from phmprep.synth import (
    ClusterSpec,
    DegradationSpec,
    SynthConfig,
    generate_scenario,
    random_schedule,
)


def small_synth_config(seed: int = 7) -> SynthConfig:
    """A fast scenario: ~7200 rows, 2 failures, same structure as the default."""
    cfg = SynthConfig(
        duration_hours=120.0,
        clusters=[ClusterSpec(3, "drift", 0.99), ClusterSpec(3, "stationary", 0.97)],
        n_constant_channels=1,
        n_unrelated_channels=4,
        n_dead_channels=1,
        seed=seed)
    cfg.schedule = random_schedule(
        duration_hours=cfg.duration_hours, n_failures=2, n_normal_stops=1,
        n_pauses=1, modes=("wear",), component="crusher",
        min_gap_hours=8.0, seed=seed)
    cfg.degradation = {
        "wear": DegradationSpec(clusters=(0,), channels=("noise0",))}
    return cfg


@pytest.fixture(scope="session")
def small_scenario():
    return generate_scenario(small_synth_config())


@pytest.fixture
def simple_frame():
    """5x3 frame with one missing cell, handy for exact-value assertions."""
    values = np.array([[1.0, 10.0, 5.0],
                       [2.0, 20.0, 5.0],
                       [3.0, np.nan, 5.0],
                       [4.0, 40.0, 5.0],
                       [5.0, 50.0, 5.0]])
    return SensorFrame(np.arange(5, dtype=np.int64) * 60,
                       ["a", "b", "c"], values)


@pytest.fixture
def simple_log():
    return EventLog([
        EventRecord(600, 720, "normal_stop"),
        EventRecord(2400, 2520, "failure", component="pump", failure_mode="wear"),
    ])
