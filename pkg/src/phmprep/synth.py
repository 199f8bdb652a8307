"""Seeded generator of machinery-monitoring scenarios with known ground truth.

Produces a sensor frame, a maintenance log, and a GroundTruth record that
pins down exactly which channels are redundant, which are constant, where
outliers and missing cells were injected, and which timestamps are truly
degraded. Every pipeline stage can therefore be checked against construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleCorrelationError, ScheduleOverflowError
from .frame import EventLog, EventRecord, SensorFrame

HOUR = 3600


@dataclass(frozen=True)
class ClusterSpec:
    size: int
    kind: str                 # drift | periodic | stationary
    correlation: float        # pairwise Pearson target within the cluster

    def __post_init__(self):
        if self.kind not in ("drift", "periodic", "stationary"):
            raise ValueError(f"unknown base signal kind: {self.kind}")


@dataclass(frozen=True)
class DegradationSpec:
    clusters: tuple[int, ...]          # cluster indices whose members all shift
    channels: tuple[str, ...]          # individual channels that shift
    effect: str = "mean_shift"         # mean_shift | variance_inflation
    magnitude: float = 2.0             # sigma units, or inflation factor


@dataclass(frozen=True)
class ScheduledEvent:
    kind: str
    start_hours: float
    duration_hours: float
    component: str | None = None
    mode: str | None = None


@dataclass
class SynthConfig:
    duration_hours: float = 2000.0
    sampling_period: int = 60
    clusters: list[ClusterSpec] = field(default_factory=list)
    n_constant_channels: int = 2
    n_unrelated_channels: int = 15
    n_dead_channels: int = 2              # mostly-missing columns
    dead_missing_ratio: float = 0.8
    cell_missing_rate: float = 0.002
    outlier_rate: float = 0.001           # fraction of rows given one outlier cell
    outlier_magnitude: float = 6.0        # sigma units beyond the nominal bounds
    schedule: list[ScheduledEvent] = field(default_factory=list)
    degradation: dict[str, DegradationSpec] = field(default_factory=dict)
    degraded_window_hours: float = 2.0
    transition_window_hours: float = 3.0
    warmup_hours: float = 0.5
    cooldown_hours: float = 0.5
    current_channel: str = "motor_current"
    seed: int = 42


@dataclass
class GroundTruth:
    labels: np.ndarray                    # labeling-module state codes per row
    label_modes: list[str | None]
    cluster_members: list[list[str]]
    constant_channels: list[str]
    dead_channels: list[str]
    unrelated_channels: list[str]
    outlier_cells: list[tuple[int, str]]  # (row index, channel)
    outlier_rows: list[int]
    nominal_bounds: dict[str, tuple[float, float]]
    failure_onsets: list[dict]            # {time, mode, onset}

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.tolist(),
            "label_modes": self.label_modes,
            "cluster_members": self.cluster_members,
            "constant_channels": self.constant_channels,
            "dead_channels": self.dead_channels,
            "unrelated_channels": self.unrelated_channels,
            "outlier_cells": [[r, c] for r, c in self.outlier_cells],
            "outlier_rows": self.outlier_rows,
            "nominal_bounds": {k: list(v) for k, v in self.nominal_bounds.items()},
            "failure_onsets": self.failure_onsets,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def from_json(cls, path) -> "GroundTruth":
        with open(path) as f:
            d = json.load(f)
        return cls(labels=np.asarray(d["labels"], dtype=np.int64),
                   label_modes=d["label_modes"],
                   cluster_members=d["cluster_members"],
                   constant_channels=d["constant_channels"],
                   dead_channels=d["dead_channels"],
                   unrelated_channels=d["unrelated_channels"],
                   outlier_cells=[(r, c) for r, c in d["outlier_cells"]],
                   outlier_rows=d["outlier_rows"],
                   nominal_bounds={k: (v[0], v[1])
                                   for k, v in d["nominal_bounds"].items()},
                   failure_onsets=d["failure_onsets"])


def default_config(seed: int = 42) -> SynthConfig:
    """The desk-scale default scenario: ~120k rows x 50 channels, 12 failures
    across 2 failure modes with a 2-sigma ramped mean shift."""
    clusters = [ClusterSpec(5, "drift", 0.99), ClusterSpec(5, "periodic", 0.98),
                ClusterSpec(5, "stationary", 0.97), ClusterSpec(5, "drift", 0.99),
                ClusterSpec(5, "periodic", 0.98), ClusterSpec(5, "stationary", 0.97)]
    cfg = SynthConfig(clusters=clusters, seed=seed)
    cfg.schedule = random_schedule(
        duration_hours=cfg.duration_hours, n_failures=12, n_normal_stops=6,
        n_pauses=4, modes=("wear", "clog"), component="crusher",
        min_gap_hours=12.0, seed=seed)
    cfg.degradation = {
        "wear": DegradationSpec(clusters=(0, 1), channels=("noise0", "noise1")),
        "clog": DegradationSpec(clusters=(2, 3), channels=("noise2", "noise3")),
    }
    return cfg


def random_schedule(duration_hours: float, n_failures: int, n_normal_stops: int,
                    n_pauses: int, modes: tuple[str, ...], component: str,
                    min_gap_hours: float, seed: int,
                    event_duration_hours: float = 1.0) -> list[ScheduledEvent]:
    """Non-overlapping events separated by at least min_gap_hours."""
    rng = np.random.default_rng(seed)
    kinds = (["failure"] * n_failures + ["normal_stop"] * n_normal_stops
             + ["pause"] * n_pauses)
    rng.shuffle(kinds)
    n = len(kinds)
    required = n * event_duration_hours + (n + 1) * min_gap_hours
    if required > duration_hours:
        raise ScheduleOverflowError(
            f"{n} events need {required:.0f} h, have {duration_hours:.0f} h")
    slack = duration_hours - required
    cuts = np.sort(rng.uniform(0.0, slack, n))
    schedule = []
    mode_cycle = 0
    for i, kind in enumerate(kinds):
        start = (i + 1) * min_gap_hours + i * event_duration_hours + cuts[i]
        mode = None
        comp = None
        if kind == "failure":
            mode = modes[mode_cycle % len(modes)]
            comp = component
            mode_cycle += 1
        schedule.append(ScheduledEvent(kind, float(start), event_duration_hours,
                                       comp, mode))
    return schedule


def _latent(kind: str, n: int, period: int, rng) -> np.ndarray:
    if kind == "drift":
        z = np.cumsum(rng.normal(0.0, 1.0, n))
    elif kind == "periodic":
        period_h = rng.uniform(24.0, 168.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        t = np.arange(n) * period / HOUR
        z = np.sin(2 * np.pi * t / period_h + phase) + 0.1 * rng.normal(0.0, 1.0, n)
    else:
        width = 30
        z = np.convolve(rng.normal(0.0, 1.0, n + width - 1),
                        np.ones(width) / width, mode="valid")
    return _standardize(z)


def _standardize(v: np.ndarray) -> np.ndarray:
    return (v - v.mean()) / v.std()


def _orthogonal_noise(z: np.ndarray, rng) -> np.ndarray:
    eps = rng.normal(0.0, 1.0, len(z))
    eps -= (eps @ z) / (z @ z) * z
    return _standardize(eps)


def generate_scenario(cfg: SynthConfig) -> tuple[SensorFrame, EventLog, GroundTruth]:
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.duration_hours * HOUR / cfg.sampling_period)
    timestamps = np.arange(n, dtype=np.int64) * cfg.sampling_period
    grid = cfg.sampling_period

    def snap(hours: float) -> int:
        return int(round(hours * HOUR / grid)) * grid

    # --- event log --------------------------------------------------------
    records = []
    for ev in cfg.schedule:
        start = snap(ev.start_hours)
        end = snap(ev.start_hours + ev.duration_hours)
        if end > timestamps[-1]:
            raise ScheduleOverflowError(f"event at {ev.start_hours} h past data end")
        records.append(EventRecord(start, end, ev.kind, ev.component, ev.mode))
    log = EventLog(records)
    failures = [r for r in log.records if r.kind == "failure"]

    # ramp fraction per row for each failure window [t_f - dt_w, t_f)
    dt_w = cfg.degraded_window_hours * HOUR
    ramp_by_mode: dict[str, np.ndarray] = {}
    for f in failures:
        lo, hi = f.start - dt_w, f.start
        frac = np.clip((timestamps - lo) / dt_w, 0.0, 1.0)
        frac[timestamps >= hi] = 0.0
        frac[timestamps < lo] = 0.0
        mode = f.failure_mode or "unknown"
        ramp_by_mode[mode] = np.maximum(ramp_by_mode.get(mode, 0.0), frac)

    def degradation_signal(mode_targets: list[str], sigma: float) -> np.ndarray:
        """Additive shift (or widening noise) for one channel, all modes."""
        total = np.zeros(n)
        for mode, spec in cfg.degradation.items():
            if mode not in ramp_by_mode:
                continue
            if not any(t in mode_targets for t in _targets(spec)):
                continue
            frac = ramp_by_mode[mode]
            if spec.effect == "mean_shift":
                total += frac * spec.magnitude * sigma
            else:
                total += rng.normal(0.0, 1.0, n) * frac \
                    * np.sqrt(max(spec.magnitude - 1.0, 0.0)) * sigma
        return total

    def _targets(spec: DegradationSpec) -> list[str]:
        return [f"cluster{i}" for i in spec.clusters] + list(spec.channels)

    names: list[str] = []
    columns: list[np.ndarray] = []
    cluster_members: list[list[str]] = []

    for ci, cluster in enumerate(cfg.clusters):
        if not 0.0 < cluster.correlation < 1.0:
            raise InfeasibleCorrelationError(
                f"cluster {ci}: correlation {cluster.correlation}")
        z = _latent(cluster.kind, n, cfg.sampling_period, rng)
        members = []
        shift = degradation_signal([f"cluster{ci}"], 1.0)
        for j in range(cluster.size):
            eps = _orthogonal_noise(z, rng)
            base = (np.sqrt(cluster.correlation) * z
                    + np.sqrt(1.0 - cluster.correlation) * eps)
            scale = rng.uniform(0.5, 2.0)
            offset = scale / 0.2       # cv ~ 0.2, safely above the 0.05 filter
            name = f"c{ci}_{j}"
            names.append(name)
            columns.append(offset + scale * (base + shift))
            members.append(name)
        cluster_members.append(members)

    unrelated = []
    for j in range(cfg.n_unrelated_channels):
        u = _standardize(np.convolve(rng.normal(0.0, 1.0, n + 19),
                                     np.ones(20) / 20, mode="valid"))
        scale = rng.uniform(0.5, 2.0)
        offset = scale / 0.2
        name = f"noise{j}"
        shift = degradation_signal([name], 1.0)
        names.append(name)
        columns.append(offset + scale * (u + shift))
        unrelated.append(name)

    constant = []
    for j in range(cfg.n_constant_channels):
        name = f"const{j}"
        names.append(name)
        columns.append(np.full(n, float(rng.uniform(1.0, 10.0))))
        constant.append(name)

    dead = []
    for j in range(cfg.n_dead_channels):
        name = f"dead{j}"
        names.append(name)
        columns.append(rng.normal(5.0, 1.0, n))
        dead.append(name)

    # motor current: positive while operating, zero during any event
    off = np.zeros(n, dtype=bool)
    for rec in log.records:
        off |= (timestamps >= rec.start) & (timestamps < rec.end)
    current = 40.0 + rng.normal(0.0, 1.0, n).clip(-10, 10)
    current[off] = 0.0
    names.append(cfg.current_channel)
    columns.append(current)

    values = np.column_stack(columns)

    # --- nominal bounds, then outlier injection ---------------------------
    eligible = [f for ms in cluster_members for f in ms] + unrelated
    bounds: dict[str, tuple[float, float]] = {}
    for name in eligible:
        col = values[:, names.index(name)]
        margin = 0.05 * (col.max() - col.min()) + 1e-9
        bounds[name] = (float(col.min() - margin), float(col.max() + margin))

    n_outlier_rows = int(round(cfg.outlier_rate * n))
    outlier_rows = sorted(int(r) for r in
                          rng.choice(n, size=n_outlier_rows, replace=False))
    outlier_cells: list[tuple[int, str]] = []
    for r in outlier_rows:
        name = eligible[int(rng.integers(len(eligible)))]
        j = names.index(name)
        lo, hi = bounds[name]
        sigma = values[:, j].std()
        if rng.random() < 0.5:
            values[r, j] = lo - cfg.outlier_magnitude * sigma
        else:
            values[r, j] = hi + cfg.outlier_magnitude * sigma
        outlier_cells.append((r, name))

    # --- missing injection ------------------------------------------------
    outlier_set = {(r, names.index(c)) for r, c in outlier_cells}
    for name in dead:
        j = names.index(name)
        kill = rng.random(n) < cfg.dead_missing_ratio
        values[kill, j] = np.nan
    if cfg.cell_missing_rate > 0:
        maskable = [names.index(f) for f in eligible + constant]
        hit = rng.random((n, len(maskable))) < cfg.cell_missing_rate
        for k, j in enumerate(maskable):
            rows = np.where(hit[:, k])[0]
            for r in rows:
                if (int(r), j) not in outlier_set:
                    values[r, j] = np.nan

    frame = SensorFrame(timestamps, names, values,
                        sampling_period_hint=float(cfg.sampling_period))

    truth = GroundTruth(
        labels=np.zeros(n, dtype=np.int64),
        label_modes=[None] * n,
        cluster_members=cluster_members,
        constant_channels=constant,
        dead_channels=dead,
        unrelated_channels=unrelated,
        outlier_cells=outlier_cells,
        outlier_rows=outlier_rows,
        nominal_bounds=bounds,
        failure_onsets=[{"time": f.start, "mode": f.failure_mode,
                         "onset": f.start - int(dt_w)} for f in failures])
    _fill_true_labels(truth, cfg, log, timestamps, current)
    return frame, log, truth


def _fill_true_labels(truth: GroundTruth, cfg: SynthConfig, log: EventLog,
                      timestamps: np.ndarray, current: np.ndarray) -> None:
    """Per-timestamp truth labels, directly from construction."""
    from .labeling import DEGRADED, EXCLUDED, HEALTHY, TRANSITION

    n = len(timestamps)
    dt_w = cfg.degraded_window_hours * HOUR
    dt_tr = cfg.transition_window_hours * HOUR
    warm = cfg.warmup_hours * HOUR
    cool = cfg.cooldown_hours * HOUR

    excluded = current <= 0
    for rec in log.records:
        excluded |= (timestamps >= rec.start) & (timestamps < rec.end)

    # warm-up / cool-down around each inter-event interval
    edges = [timestamps[0]]
    for rec in log.records:
        edges.extend([rec.start, rec.end])
    edges.append(timestamps[-1] + 1)
    for k in range(0, len(edges), 2):
        start, end = edges[k], edges[k + 1]
        if start >= end:
            continue
        excluded |= (timestamps >= start) & (timestamps < start + warm)
        excluded |= (timestamps >= end - cool) & (timestamps < end)

    states = np.full(n, HEALTHY, dtype=np.int64)
    modes: list[str | None] = [None] * n
    for f in sorted(log.failures(), key=lambda r: -r.start):
        tr = (timestamps >= f.start - dt_w - dt_tr) & (timestamps < f.start - dt_w)
        states[tr & ~excluded] = TRANSITION
    for f in sorted(log.failures(), key=lambda r: -r.start):
        dg = (timestamps >= f.start - dt_w) & (timestamps < f.start)
        pick = dg & ~excluded
        states[pick] = DEGRADED
        for i in np.where(pick)[0]:
            modes[i] = f.failure_mode
    states[excluded] = EXCLUDED
    truth.labels = states
    truth.label_modes = modes
