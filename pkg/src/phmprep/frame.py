"""Sensor tables and maintenance logs: parsing, validation, categorical encoding.

Timestamps are integer epoch seconds. Missing cells are represented as NaN in
the value matrix; columns that contain non-numeric text keep their raw strings
alongside so they can be encoded later.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    ColumnNotFoundError,
    DuplicateTimestampError,
    EmptyTableError,
    FileUnreadableError,
    InvertedIntervalError,
    MissingTimeColumnError,
    UnknownKindError,
    UnmappedCategoryError,
)

DEFAULT_MISSING_TOKENS = frozenset({"", "NaN", "nan", "NA", "null"})

EVENT_KINDS = ("normal_stop", "pause", "external", "failure")


@dataclass
class SensorFrame:
    """Time-indexed numeric table; the currency passed between pipeline stages."""

    timestamps: np.ndarray          # int64 epoch seconds, strictly increasing
    feature_names: list[str]
    values: np.ndarray              # float64, shape (len(timestamps), len(feature_names))
    sampling_period_hint: float | None = None
    # raw strings for columns whose cells were not parseable as numbers;
    # None marks a missing cell. Keyed by feature name.
    raw_text: dict[str, list[str | None]] = field(default_factory=dict)

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        n, d = self.values.shape
        if len(self.timestamps) != n:
            raise ValueError("timestamp count must equal row count")
        if len(self.feature_names) != d:
            raise ValueError("feature name count must equal column count")
        if len(set(self.feature_names)) != d or any(not f for f in self.feature_names):
            raise ValueError("feature names must be unique and non-empty")
        if n > 1 and not np.all(np.diff(self.timestamps) > 0):
            dup = self.timestamps[np.where(np.diff(self.timestamps) <= 0)[0][0] + 1]
            raise DuplicateTimestampError(int(dup))
        if np.isinf(self.values).any():
            raise ValueError("cells must be finite or missing (NaN); got infinity")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise ColumnNotFoundError(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_index(name)]

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    def select_columns(self, names: list[str]) -> "SensorFrame":
        idx = [self.column_index(n) for n in names]
        raw = {n: self.raw_text[n] for n in names if n in self.raw_text}
        return SensorFrame(self.timestamps.copy(), list(names),
                           self.values[:, idx].copy(),
                           self.sampling_period_hint, raw)

    def select_rows(self, mask: np.ndarray) -> "SensorFrame":
        mask = np.asarray(mask, dtype=bool)
        raw = {n: [v for v, keep in zip(col, mask) if keep]
               for n, col in self.raw_text.items()}
        return SensorFrame(self.timestamps[mask], list(self.feature_names),
                           self.values[mask], self.sampling_period_hint, raw)

    def to_dataframe(self, time_column: str = "t") -> pd.DataFrame:
        df = pd.DataFrame(self.values, columns=self.feature_names)
        for name, col in self.raw_text.items():
            df[name] = ["" if v is None else v for v in col]
        df.insert(0, time_column, self.timestamps)
        return df


@dataclass(frozen=True)
class EventRecord:
    start: int
    end: int
    kind: str
    component: str | None = None
    failure_mode: str | None = None
    note: str = ""

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise UnknownKindError(self.kind)
        if self.end < self.start:
            raise InvertedIntervalError(f"start={self.start} end={self.end}")
        if self.failure_mode is not None and self.kind != "failure":
            raise ValueError("failure_mode only valid on failure events")
        if self.failure_mode is not None and self.component is None:
            raise ValueError("failure_mode requires a component")


@dataclass
class EventLog:
    records: list[EventRecord]

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: (r.start, r.end))

    def failures(self) -> list[EventRecord]:
        return [r for r in self.records if r.kind == "failure"]


@dataclass(frozen=True)
class CategoricalEncoding:
    column: str
    mapping: dict[str, int]
    one_hot: bool = False

    def __post_init__(self):
        codes = sorted(self.mapping.values())
        if len(set(codes)) != len(codes):
            raise ValueError("category mapping must be injective")
        if codes != list(range(len(codes))):
            raise ValueError("category codes must be contiguous from 0")


def _parse_times(raw: pd.Series) -> np.ndarray:
    """ISO-8601 strings or integer epoch seconds -> int64 epoch seconds."""
    numeric = pd.to_numeric(raw, errors="coerce")
    if numeric.notna().all():
        return numeric.astype(np.int64).to_numpy()
    parsed = pd.to_datetime(raw, errors="coerce", utc=True, format="ISO8601")
    if parsed.isna().any():
        bad = raw[parsed.isna()].iloc[0]
        raise FileUnreadableError(f"unparseable timestamp: {bad!r}")
    return (parsed.astype("int64") // 10**9).to_numpy()


def load_sensor_frame(path, time_column: str = "t",
                      missing_tokens=DEFAULT_MISSING_TOKENS) -> SensorFrame:
    """Parse a sensor CSV into a validated SensorFrame.

    Cells matching ``missing_tokens`` become NaN. Columns with unparseable
    numeric cells keep their raw strings for later categorical encoding.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as exc:
        raise FileUnreadableError(str(exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise EmptyTableError(str(path)) from exc
    if time_column not in df.columns:
        raise MissingTimeColumnError(time_column)
    if len(df) == 0:
        raise EmptyTableError(str(path))

    times = _parse_times(df[time_column])
    order = np.argsort(times, kind="stable")
    times = times[order]
    dup = np.where(np.diff(times) == 0)[0]
    if dup.size:
        raise DuplicateTimestampError(int(times[dup[0]]))

    feature_names = [c for c in df.columns if c != time_column]
    n = len(df)
    values = np.full((n, len(feature_names)), np.nan)
    raw_text: dict[str, list[str | None]] = {}
    for j, name in enumerate(feature_names):
        col = df[name].str.strip()
        missing = col.isin(missing_tokens)
        numeric = pd.to_numeric(col.where(~missing), errors="coerce")
        unparseable = numeric.isna() & ~missing
        if unparseable.any():
            raw_text[name] = [None if m else v
                              for v, m in zip(col.iloc[order], missing.iloc[order])]
        else:
            # re-parse through the correctly-rounded converter: pd.to_numeric
            # can be off by one ulp on 17-digit values, which would break the
            # exact CSV round trip the pipeline relies on
            values[:, j] = col.where(~missing, "nan").to_numpy(
                dtype=np.float64)[order]
    frame = SensorFrame(times, feature_names, values, raw_text=raw_text)
    return frame


def write_csv(df: pd.DataFrame, path) -> None:
    """Fast CSV write with exact float round-trip (shortest repr)."""
    import pyarrow
    import pyarrow.csv
    pyarrow.csv.write_csv(pyarrow.Table.from_pandas(df, preserve_index=False),
                          str(path))


def save_sensor_frame(frame: SensorFrame, path, time_column: str = "t") -> None:
    write_csv(frame.to_dataframe(time_column), path)


def load_event_log(path) -> EventLog:
    """Parse a maintenance-log CSV (start,end,kind,component,failure_mode,note)."""
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as exc:
        raise FileUnreadableError(str(exc)) from exc
    except pd.errors.EmptyDataError:
        return EventLog([])
    required = {"start", "end", "kind"}
    if not required.issubset(df.columns):
        raise FileUnreadableError(f"event log must have columns {sorted(required)}")
    if len(df) == 0:
        return EventLog([])
    starts = _parse_times(df["start"])
    ends = _parse_times(df["end"])
    records = []
    for i in range(len(df)):
        component = df["component"].iloc[i].strip() if "component" in df.columns else ""
        mode = df["failure_mode"].iloc[i].strip() if "failure_mode" in df.columns else ""
        note = df["note"].iloc[i] if "note" in df.columns else ""
        records.append(EventRecord(
            start=int(starts[i]), end=int(ends[i]), kind=df["kind"].iloc[i].strip(),
            component=component or None, failure_mode=mode or None, note=note))
    return EventLog(records)


def save_event_log(log: EventLog, path) -> None:
    rows = [{"start": r.start, "end": r.end, "kind": r.kind,
             "component": r.component or "", "failure_mode": r.failure_mode or "",
             "note": r.note} for r in log.records]
    pd.DataFrame(rows, columns=["start", "end", "kind", "component",
                                "failure_mode", "note"]).to_csv(path, index=False)


def _raw_categories(frame: SensorFrame, column: str) -> list[str | None]:
    if column in frame.raw_text:
        return frame.raw_text[column]
    # numerically-parsed column: treat each distinct value's string form as a category
    col = frame.column(column)
    out: list[str | None] = []
    for v in col:
        if np.isnan(v):
            out.append(None)
        else:
            out.append(str(int(v)) if float(v).is_integer() else str(v))
    return out


def encode_categorical(frame: SensorFrame, spec: CategoricalEncoding) -> SensorFrame:
    """Replace a categorical column by ordinal codes or one-hot indicator columns."""
    j = frame.column_index(spec.column)
    raw = _raw_categories(frame, spec.column)
    for v in raw:
        if v is not None and v not in spec.mapping:
            raise UnmappedCategoryError(v)
    codes = np.array([np.nan if v is None else spec.mapping[v] for v in raw])

    names = list(frame.feature_names)
    raw_text = {k: v for k, v in frame.raw_text.items() if k != spec.column}
    if not spec.one_hot:
        values = frame.values.copy()
        values[:, j] = codes
        return SensorFrame(frame.timestamps.copy(), names, values,
                           frame.sampling_period_hint, raw_text)

    categories = sorted(spec.mapping, key=spec.mapping.get)
    indicators = np.full((frame.n_rows, len(categories)), np.nan)
    ok = ~np.isnan(codes)
    for k in range(len(categories)):
        indicators[ok, k] = (codes[ok] == k).astype(float)
    new_names = (names[:j]
                 + [f"{spec.column}={c}" for c in categories]
                 + names[j + 1:])
    values = np.hstack([frame.values[:, :j], indicators, frame.values[:, j + 1:]])
    return SensorFrame(frame.timestamps.copy(), new_names, values,
                       frame.sampling_period_hint, raw_text)
