"""Expert-knowledge feature exclusion and missing-ratio filtering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllColumnsDroppedError, UnknownFeatureError
from .frame import SensorFrame

DEFAULT_COL_THRESHOLD = 0.50
DEFAULT_ROW_THRESHOLD = 0.20


@dataclass
class SelectionReport:
    excluded_by_expert: list[str] = field(default_factory=list)
    dropped_columns: list[tuple[str, float]] = field(default_factory=list)
    dropped_row_count: int = 0
    remaining_shape: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "excluded_by_expert": self.excluded_by_expert,
            "dropped_columns": [{"name": n, "missing_ratio": r}
                                for n, r in self.dropped_columns],
            "dropped_row_count": self.dropped_row_count,
            "remaining_shape": list(self.remaining_shape),
        }


def apply_exclusions(frame: SensorFrame, exclude: set[str],
                     keep_window: tuple[int, int] | None = None) -> SensorFrame:
    """Drop expert-flagged columns and rows outside the keep window."""
    unknown = set(exclude) - set(frame.feature_names)
    if unknown:
        raise UnknownFeatureError(sorted(unknown)[0])
    keep_names = [n for n in frame.feature_names if n not in exclude]
    out = frame.select_columns(keep_names)
    if keep_window is not None:
        lo, hi = keep_window
        mask = (out.timestamps >= lo) & (out.timestamps <= hi)
        out = out.select_rows(mask)
    return out


def missing_ratio_filter(frame: SensorFrame,
                         col_threshold: float = DEFAULT_COL_THRESHOLD,
                         row_threshold: float | None = DEFAULT_ROW_THRESHOLD,
                         ) -> tuple[SensorFrame, SelectionReport]:
    """Drop columns with missing ratio >= col_threshold, then rows with
    missing ratio (over the surviving columns) > row_threshold.

    Pass ``row_threshold=None`` to disable the row rule.
    """
    if not (0.0 <= col_threshold <= 1.0):
        raise ValueError("col_threshold must be in [0, 1]")
    if row_threshold is not None and not (0.0 <= row_threshold <= 1.0):
        raise ValueError("row_threshold must be in [0, 1]")

    report = SelectionReport()
    missing = frame.missing_mask()
    col_ratio = missing.mean(axis=0) if frame.n_rows else np.ones(frame.n_cols)
    keep_cols = [n for n, r in zip(frame.feature_names, col_ratio) if r < col_threshold]
    report.dropped_columns = [(n, float(r))
                              for n, r in zip(frame.feature_names, col_ratio)
                              if r >= col_threshold]
    if not keep_cols:
        raise AllColumnsDroppedError(f"col_threshold={col_threshold}")
    out = frame.select_columns(keep_cols)

    if row_threshold is not None:
        row_ratio = out.missing_mask().mean(axis=1)
        keep_rows = row_ratio <= row_threshold
        report.dropped_row_count = int((~keep_rows).sum())
        out = out.select_rows(keep_rows)
    report.remaining_shape = (out.n_rows, out.n_cols)
    return out, report
