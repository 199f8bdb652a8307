"""Per-sensor descriptive statistics and human-chosen cutoff application.

Cutoffs are not derived automatically; they are configured by an engineer
after inspecting the emitted time-series and boxplot diagnostics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvertedBoundsError, IoFailureError, UnknownFeatureError
from .frame import SensorFrame


@dataclass
class FeatureStats:
    name: str
    mean: float
    std: float            # population std (divide by n)
    min: float
    max: float
    q1: float
    median: float
    q3: float
    iqr_low_whisker: float
    iqr_high_whisker: float
    p2_5: float
    p97_5: float
    missing_ratio: float
    cv: float | None      # std/mean; None when mean == 0
    degenerate: bool = False


@dataclass(frozen=True)
class CutoffSpec:
    """Per-feature (lower, upper) bounds in native sensor units; None = unbounded."""
    bounds: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)

    def __post_init__(self):
        for name, (lo, hi) in self.bounds.items():
            if lo is not None and hi is not None and not lo < hi:
                raise InvertedBoundsError(f"{name}: lower={lo} upper={hi}")


@dataclass
class OutlierReport:
    below_lower: dict[str, int]
    above_upper: dict[str, int]
    rows_removed: int
    stats_before: dict[str, tuple[float, float]]   # feature -> (mean, std)
    stats_after: dict[str, tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "below_lower": self.below_lower,
            "above_upper": self.above_upper,
            "rows_removed": self.rows_removed,
            "stats_before": {k: list(v) for k, v in self.stats_before.items()},
            "stats_after": {k: list(v) for k, v in self.stats_after.items()},
        }


def _column_stats(name: str, col: np.ndarray, n_rows: int) -> FeatureStats:
    vals = col[~np.isnan(col)]
    missing_ratio = 1.0 - len(vals) / n_rows if n_rows else 1.0
    if len(vals) < 2:
        v = float(vals[0]) if len(vals) == 1 else float("nan")
        return FeatureStats(name, v, 0.0, v, v, v, v, v, v, v, v, v,
                            missing_ratio, None if v == 0 or np.isnan(v) else 0.0,
                            degenerate=True)
    mean = float(vals.mean())
    std = float(vals.std())  # ddof=0
    q1, med, q3, p2_5, p97_5 = (float(x) for x in
                                np.percentile(vals, [25, 50, 75, 2.5, 97.5]))
    iqr = q3 - q1
    return FeatureStats(
        name=name, mean=mean, std=std, min=float(vals.min()), max=float(vals.max()),
        q1=q1, median=med, q3=q3,
        iqr_low_whisker=q1 - 1.5 * iqr, iqr_high_whisker=q3 + 1.5 * iqr,
        p2_5=p2_5, p97_5=p97_5, missing_ratio=missing_ratio,
        cv=(std / mean) if mean != 0 else None)


def compute_feature_stats(frame: SensorFrame) -> dict[str, FeatureStats]:
    """Descriptive statistics over non-missing cells, per feature."""
    if frame.n_rows == 0 or frame.n_cols == 0:
        raise ValueError("frame must be non-empty")
    return {name: _column_stats(name, frame.values[:, j], frame.n_rows)
            for j, name in enumerate(frame.feature_names)}


def emit_diagnostics(frame: SensorFrame, out_dir) -> list[Path]:
    """Write per-feature time-series CSVs and one boxplot summary CSV.

    These are the inputs to the manual cutoff decision.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for j, name in enumerate(frame.feature_names):
            col = frame.values[:, j]
            ok = ~np.isnan(col)
            path = out_dir / f"{name}.series.csv"
            with open(path, "w", newline="") as f:
                w = csv.writer(f)
                w.writerow(["timestamp", "value"])
                for t, v in zip(frame.timestamps[ok], col[ok]):
                    w.writerow([int(t), repr(float(v))])
            written.append(path)

        summary = out_dir / "boxplot_summary.csv"
        stats = compute_feature_stats(frame) if frame.n_cols else {}
        with open(summary, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["feature", "min", "q1", "median", "q3", "max",
                        "low_whisker", "high_whisker", "p2_5", "p97_5",
                        "missing_ratio", "degenerate"])
            for name in frame.feature_names:
                s = stats[name]
                w.writerow([name, s.min, s.q1, s.median, s.q3, s.max,
                            s.iqr_low_whisker, s.iqr_high_whisker,
                            s.p2_5, s.p97_5, s.missing_ratio, int(s.degenerate)])
        written.append(summary)
        return written
    except OSError as exc:
        raise IoFailureError(str(exc)) from exc


def apply_cutoffs(frame: SensorFrame,
                  cutoffs: CutoffSpec) -> tuple[SensorFrame, OutlierReport]:
    """Remove every row with at least one cell strictly outside its bounds.

    Missing cells never trigger removal.
    """
    unknown = set(cutoffs.bounds) - set(frame.feature_names)
    if unknown:
        raise UnknownFeatureError(sorted(unknown)[0])

    below: dict[str, int] = {}
    above: dict[str, int] = {}
    stats_before: dict[str, tuple[float, float]] = {}
    bad_rows = np.zeros(frame.n_rows, dtype=bool)
    for name, (lo, hi) in cutoffs.bounds.items():
        col = frame.column(name)
        ok = ~np.isnan(col)
        lo_mask = ok & (col < lo) if lo is not None else np.zeros_like(ok)
        hi_mask = ok & (col > hi) if hi is not None else np.zeros_like(ok)
        below[name] = int(lo_mask.sum())
        above[name] = int(hi_mask.sum())
        vals = col[ok]
        stats_before[name] = ((float(vals.mean()), float(vals.std()))
                              if len(vals) else (float("nan"), 0.0))
        bad_rows |= lo_mask | hi_mask

    out = frame.select_rows(~bad_rows)
    stats_after: dict[str, tuple[float, float]] = {}
    for name in cutoffs.bounds:
        col = out.column(name)
        vals = col[~np.isnan(col)]
        stats_after[name] = ((float(vals.mean()), float(vals.std()))
                             if len(vals) else (float("nan"), 0.0))
    report = OutlierReport(below_lower=below, above_upper=above,
                           rows_removed=int(bad_rows.sum()),
                           stats_before=stats_before, stats_after=stats_after)
    return out, report
