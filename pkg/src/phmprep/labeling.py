"""Health-state label generation from maintenance logs.

Labels per timestamp: healthy, transition, degraded(component, failure mode),
or excluded. Degraded windows extend backwards from each failure event;
transition windows buffer the degraded windows; warm-up/cool-down trims and
non-operation periods are excluded outright.

Precedence: excluded > degraded > transition > healthy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatchError
from .frame import EventLog, SensorFrame

HEALTHY = 0
TRANSITION = 1
DEGRADED = 2
EXCLUDED = 3

STATE_NAMES = {HEALTHY: "healthy", TRANSITION: "transition",
               DEGRADED: "degraded", EXCLUDED: "excluded"}


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    sensors: list[str]
    failure_modes: list[str]


@dataclass(frozen=True)
class SystemModel:
    id: str
    components: list[ComponentSpec]

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValueError("component ids must be unique")


@dataclass(frozen=True)
class WindowSpec:
    degraded: float       # seconds before the failure event
    transition: float     # buffer before the degraded window


@dataclass
class LabelingConfig:
    degraded_window: float = 2 * 3600.0
    transition_window: float = 3 * 3600.0
    warmup: float = 30 * 60.0
    cooldown: float = 30 * 60.0
    operation_signal: tuple[str, float] | None = None   # (feature, threshold)
    per_mode_windows: dict[str, WindowSpec] = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.degraded_window, self.transition_window,
                  self.warmup, self.cooldown):
            if v < 0:
                raise ValueError("durations must be nonnegative")

    def windows_for(self, mode: str | None) -> WindowSpec:
        if mode is not None and mode in self.per_mode_windows:
            return self.per_mode_windows[mode]
        return WindowSpec(self.degraded_window, self.transition_window)


@dataclass(frozen=True)
class OperationalInterval:
    start: int
    end: int              # exclusive; start of the terminating event
    cause_kind: str       # event kind or "end-of-data"
    cause_component: str | None = None
    cause_mode: str | None = None


@dataclass
class LabelSequence:
    states: np.ndarray                  # int codes, aligned with frame rows
    components: list[str | None]        # component for degraded rows
    modes: list[str | None]             # failure mode for degraded rows
    provenance: list[str]               # interval/event id per row

    def __len__(self):
        return len(self.states)

    def state_names(self) -> list[str]:
        return [STATE_NAMES[int(s)] for s in self.states]


def extract_operational_intervals(log: EventLog, frame: SensorFrame,
                                  cfg: LabelingConfig,
                                  ) -> tuple[list[OperationalInterval], np.ndarray]:
    """Maximal intervals between consecutive events, tagged with the cause of
    the terminating event.

    Also returns a boolean in-operation mask over frame rows: False inside any
    event span and wherever the configured operation signal is at or below its
    threshold.
    """
    if frame.n_rows == 0:
        raise ValueError("frame must be non-empty")
    t0 = int(frame.timestamps[0])
    t_end = int(frame.timestamps[-1]) + 1

    intervals: list[OperationalInterval] = []
    cursor = t0
    for rec in log.records:
        if rec.start > cursor:
            intervals.append(OperationalInterval(
                cursor, rec.start, rec.kind, rec.component, rec.failure_mode))
        cursor = max(cursor, rec.end)
    if cursor < t_end:
        intervals.append(OperationalInterval(cursor, t_end, "end-of-data"))

    in_operation = np.ones(frame.n_rows, dtype=bool)
    for rec in log.records:
        in_operation &= ~((frame.timestamps >= rec.start)
                          & (frame.timestamps < rec.end))
    if cfg.operation_signal is not None:
        name, threshold = cfg.operation_signal
        signal = frame.column(name)
        in_operation &= ~np.isnan(signal) & (signal > threshold)
    return intervals, in_operation


def generate_labels(intervals: list[OperationalInterval], log: EventLog,
                    cfg: LabelingConfig, frame: SensorFrame,
                    in_operation: np.ndarray | None = None) -> LabelSequence:
    """Assign a health state to every frame row.

    Failure windows clip at the start of the operational interval the failure
    terminates: degradation evidence cannot predate the most recent restart.
    When windows of several failures overlap, the nearest upcoming failure
    provides the provenance, and degraded beats transition.
    """
    n = frame.n_rows
    if in_operation is None:
        _, in_operation = extract_operational_intervals(log, frame, cfg)
    if len(in_operation) != n:
        raise LengthMismatchError("operation mask does not match frame")

    t = frame.timestamps
    states = np.full(n, EXCLUDED, dtype=np.int64)
    components: list[str | None] = [None] * n
    modes: list[str | None] = [None] * n
    provenance = ["non-operation"] * n

    # rows inside an operational interval, outside warm-up/cool-down
    usable = np.zeros(n, dtype=bool)
    for k, iv in enumerate(intervals):
        inside = (t >= iv.start) & (t < iv.end)
        core = inside & (t >= iv.start + cfg.warmup) & (t < iv.end - cfg.cooldown)
        usable |= core
        for i in np.where(inside)[0]:
            provenance[i] = f"interval-{k}" if core[i] else f"interval-{k}-trim"
    usable &= in_operation

    states[usable] = HEALTHY

    # failure windows, clipped at the interval start each failure terminates
    failures = []
    for iv in intervals:
        if iv.cause_kind == "failure":
            failures.append((iv.end, iv.start, iv.cause_component, iv.cause_mode))
    # descending failure time: later overwrites give nearest-upcoming-failure
    # provenance; the degraded pass runs second so degraded beats transition
    failures.sort(reverse=True)

    for t_f, clip_start, component, mode in failures:
        w = cfg.windows_for(mode)
        d_start = max(t_f - w.degraded, clip_start)
        tr_start = max(t_f - w.degraded - w.transition, clip_start)
        mask = usable & (t >= tr_start) & (t < d_start)
        states[mask] = TRANSITION
        for i in np.where(mask)[0]:
            provenance[i] = f"failure@{t_f}"
    for t_f, clip_start, component, mode in failures:
        w = cfg.windows_for(mode)
        d_start = max(t_f - w.degraded, clip_start)
        mask = usable & (t >= d_start) & (t < t_f)
        states[mask] = DEGRADED
        for i in np.where(mask)[0]:
            components[i] = component
            modes[i] = mode
            provenance[i] = f"failure@{t_f}"
    return LabelSequence(states, components, modes, provenance)


def partition_by_state(frame: SensorFrame, labels: LabelSequence,
                       ) -> tuple[SensorFrame, dict[str, SensorFrame], SensorFrame]:
    """Split rows into (healthy, degraded-by-failure-mode, transition) frames.

    Excluded rows appear in no output.
    """
    if len(labels) != frame.n_rows:
        raise LengthMismatchError(
            f"labels ({len(labels)}) vs frame rows ({frame.n_rows})")
    healthy = frame.select_rows(labels.states == HEALTHY)
    transition = frame.select_rows(labels.states == TRANSITION)
    degraded: dict[str, SensorFrame] = {}
    deg_mask = labels.states == DEGRADED
    mode_ids = sorted({m for m, d in zip(labels.modes, deg_mask) if d and m}
                      | ({"unknown"} if any(d and m is None
                                            for m, d in zip(labels.modes, deg_mask))
                         else set()))
    for mode in mode_ids:
        mask = np.array([d and ((m or "unknown") == mode)
                         for m, d in zip(labels.modes, deg_mask)])
        degraded[mode] = frame.select_rows(mask)
    return healthy, degraded, transition
