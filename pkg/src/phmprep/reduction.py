"""Statistical feature reduction: low-variability drop and correlation dedup."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, TooFewRowsError
from .frame import SensorFrame

DEFAULT_CV_THRESHOLD = 0.05
DEFAULT_CORRELATION_THRESHOLD = 0.95


@dataclass
class CorrelationMatrix:
    feature_names: list[str]
    r: np.ndarray                 # symmetric, diagonal 1 for non-degenerate features
    degenerate: np.ndarray        # boolean mask of zero-variance pairs

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        if not np.allclose(self.r, self.r.T, atol=0):
            raise ValueError("correlation matrix must be symmetric")
        if np.nanmax(np.abs(self.r)) > 1 + 1e-12:
            raise ValueError("correlation coefficients must lie in [-1, 1]")


@dataclass
class ReductionReport:
    dropped_low_cv: list[tuple[str, float]] = field(default_factory=list)
    undefined_cv: list[str] = field(default_factory=list)
    correlation_groups: list[dict] = field(default_factory=list)
    final_features: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dropped_low_cv": [{"name": n, "cv": c} for n, c in self.dropped_low_cv],
            "undefined_cv": self.undefined_cv,
            "correlation_groups": self.correlation_groups,
            "final_features": self.final_features,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)


def coefficient_of_variation(values) -> float | None:
    """Population std over mean; None when the mean is zero."""
    values = np.asarray(values, dtype=np.float64)
    values = values[~np.isnan(values)]
    if len(values) == 0:
        raise EmptyInputError("coefficient of variation of an empty sequence")
    mean = values.mean()
    if mean == 0:
        return None
    return float(values.std() / mean)


def low_variability_filter(frame: SensorFrame,
                           cv_threshold: float = DEFAULT_CV_THRESHOLD,
                           protect: set[str] = frozenset(),
                           ) -> tuple[SensorFrame, ReductionReport]:
    """Drop features whose coefficient of variation falls below the threshold.

    Features with undefined cv (zero mean) are retained and flagged. Features
    in ``protect`` are never dropped (e.g. the operation-detection signal).
    """
    if cv_threshold <= 0:
        raise ValueError("cv_threshold must be positive")
    report = ReductionReport()
    keep = []
    for j, name in enumerate(frame.feature_names):
        col = frame.values[:, j]
        vals = col[~np.isnan(col)]
        if len(vals) == 0:
            report.undefined_cv.append(name)
            keep.append(name)
            continue
        cv = coefficient_of_variation(vals)
        if cv is None:
            report.undefined_cv.append(name)
            keep.append(name)
        elif abs(cv) < cv_threshold and name not in protect:
            report.dropped_low_cv.append((name, cv))
        else:
            keep.append(name)
    report.final_features = keep
    return frame.select_columns(keep), report


def pearson_matrix(frame: SensorFrame) -> CorrelationMatrix:
    """Pairwise Pearson correlation with pairwise deletion of missing cells.

    Zero-variance pairs get r = 0 with a degeneracy mark.
    """
    if frame.n_rows < 2:
        raise TooFewRowsError("need at least 2 rows for correlation")
    d = frame.n_cols
    x = frame.values
    missing = np.isnan(x)
    r = np.eye(d)
    degenerate = np.zeros((d, d), dtype=bool)

    if not missing.any():
        # fast path: single vectorized computation
        std = x.std(axis=0)
        zero = std == 0
        xc = x - x.mean(axis=0)
        safe_std = np.where(zero, 1.0, std)
        z = xc / safe_std
        r = (z.T @ z) / len(x)
        np.clip(r, -1.0, 1.0, out=r)
        r[zero, :] = 0.0
        r[:, zero] = 0.0
        degenerate[zero, :] = True
        degenerate[:, zero] = True
        np.fill_diagonal(r, 1.0)
        np.fill_diagonal(degenerate, False)
        dz = np.where(zero)[0]
        degenerate[dz, dz] = True
        r[dz, dz] = 0.0
        return CorrelationMatrix(list(frame.feature_names), r, degenerate)

    # pairwise deletion via masked matrix products; columns are centered by
    # their global means first to limit cancellation error
    m = (~missing).astype(np.float64)
    col_mean = np.nanmean(x, axis=0)
    z = np.where(missing, 0.0, x - col_mean)
    z2 = z * z
    n_pair = m.T @ m
    sx = z.T @ m            # sum of x_i over rows where x_j is present
    sxy = z.T @ z
    sxx = z2.T @ m
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_x = sx / n_pair
        mean_y = mean_x.T
        cov = sxy / n_pair - mean_x * mean_y
        var_x = sxx / n_pair - mean_x ** 2
        var_y = var_x.T
        denom = np.sqrt(np.maximum(var_x, 0.0) * np.maximum(var_y, 0.0))
        r = cov / denom
    degenerate = (n_pair < 2) | (denom <= 0) | ~np.isfinite(r)
    r = np.where(degenerate, 0.0, np.clip(r, -1.0, 1.0))
    diag_deg = np.diag(degenerate).copy()
    np.fill_diagonal(r, 1.0)
    np.fill_diagonal(degenerate, False)
    idx = np.where(diag_deg)[0]
    r[idx, :] = 0.0
    r[:, idx] = 0.0
    degenerate[idx, :] = True
    degenerate[:, idx] = True
    return CorrelationMatrix(list(frame.feature_names), r, degenerate)


def correlation_dedup(matrix: CorrelationMatrix,
                      threshold: float = DEFAULT_CORRELATION_THRESHOLD,
                      seed: int = 0,
                      protect: set[str] = frozenset()) -> ReductionReport:
    """Group features connected through |r| > threshold and keep one per group.

    The kept member is chosen uniformly by the seeded generator, except that a
    protected feature is always kept when present in its group.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    names = matrix.feature_names
    d = len(names)
    adj = (np.abs(matrix.r) > threshold) & ~matrix.degenerate
    np.fill_diagonal(adj, False)

    # connected components by iterative DFS
    comp = -np.ones(d, dtype=int)
    n_comp = 0
    for start in range(d):
        if comp[start] >= 0:
            continue
        stack = [start]
        comp[start] = n_comp
        while stack:
            u = stack.pop()
            for v in np.where(adj[u])[0]:
                if comp[v] < 0:
                    comp[v] = n_comp
                    stack.append(v)
        n_comp += 1

    rng = np.random.default_rng(seed)
    report = ReductionReport()
    kept: list[str] = []
    for c in range(n_comp):
        members = [i for i in range(d) if comp[i] == c]
        if len(members) == 1:
            kept.append(names[members[0]])
            continue
        protected = [i for i in members if names[i] in protect]
        choice = protected[0] if protected else members[int(rng.integers(len(members)))]
        kept.append(names[choice])
        dropped = [i for i in members if i != choice]
        report.correlation_groups.append({
            "kept": names[choice],
            "dropped": [names[i] for i in dropped],
            "r_with_kept": [float(matrix.r[choice, i]) for i in dropped],
        })
    report.final_features = [n for n in names if n in set(kept)]
    return report
