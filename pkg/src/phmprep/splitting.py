"""Class balancing, train/validation/test splitting, and normalization.

The healthy class is downsampled without replacement to the degraded class
size, both classes are split 85/15, and the validation set is drawn from the
combined train pool. Scalers are fit on train rows only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFeatureError,
    DegradedEmptyError,
    FeatureMismatchError,
    HealthySmallerThanDegradedError,
)
from .frame import SensorFrame


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.15
    validation_fraction_of_train: float = 0.10
    balance: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must be in (0, 1)")
        if not 0 < self.validation_fraction_of_train < 1:
            raise ValueError("validation_fraction_of_train must be in (0, 1)")


@dataclass
class SplitPart:
    x: np.ndarray           # feature matrix
    y: np.ndarray           # binary labels, 1 = degraded
    timestamps: np.ndarray


@dataclass
class DataSplits:
    train: SplitPart
    validation: SplitPart
    test: SplitPart
    feature_names: list[str]


@dataclass
class ScalerParams:
    kind: str                              # "minmax" | "standard"
    feature_names: list[str]
    a: np.ndarray                          # per-feature min, or mean
    b: np.ndarray                          # per-feature max, or std

    def to_dict(self) -> dict:
        return {"kind": self.kind, "feature_names": self.feature_names,
                "a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(d["kind"], list(d["feature_names"]),
                   np.asarray(d["a"], dtype=float), np.asarray(d["b"], dtype=float))


def _split_class(n: int, test_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    idx = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    return idx[n_test:], idx[:n_test]


def balance_and_split(healthy: SensorFrame, degraded: SensorFrame,
                      spec: SplitSpec) -> DataSplits:
    """Downsample healthy to the degraded size, split both 85/15, and carve
    the validation set out of the combined train pool. Deterministic per seed.
    """
    if degraded.n_rows == 0:
        raise DegradedEmptyError("no degraded-labeled rows")
    if healthy.feature_names != degraded.feature_names:
        raise FeatureMismatchError("healthy/degraded feature sets differ")
    rng = np.random.default_rng(spec.seed)

    n_d = degraded.n_rows
    if spec.balance:
        if healthy.n_rows < n_d:
            raise HealthySmallerThanDegradedError(
                f"healthy={healthy.n_rows} < degraded={n_d}")
        sample = np.sort(rng.choice(healthy.n_rows, size=n_d, replace=False))
        healthy_used = healthy.select_rows(np.isin(np.arange(healthy.n_rows), sample))
    else:
        healthy_used = healthy

    d_train_idx, d_test_idx = _split_class(n_d, spec.test_fraction, rng)
    h_train_idx, h_test_idx = _split_class(healthy_used.n_rows,
                                           spec.test_fraction, rng)

    def stack(frames_idx):
        xs, ys, ts = [], [], []
        for frame, idx, label in frames_idx:
            xs.append(frame.values[idx])
            ys.append(np.full(len(idx), label, dtype=np.int64))
            ts.append(frame.timestamps[idx])
        return (np.vstack(xs), np.concatenate(ys), np.concatenate(ts))

    x_pool, y_pool, t_pool = stack([(degraded, d_train_idx, 1),
                                    (healthy_used, h_train_idx, 0)])
    x_test, y_test, t_test = stack([(degraded, d_test_idx, 1),
                                    (healthy_used, h_test_idx, 0)])

    n_pool = len(y_pool)
    n_val = int(round(spec.validation_fraction_of_train * n_pool))
    if spec.balance:
        # stratified validation draw keeps every split balanced within +-1
        d_pool = np.where(y_pool == 1)[0]
        h_pool = np.where(y_pool == 0)[0]
        n_val_d = n_val // 2
        n_val_h = n_val - n_val_d
        val_idx = np.concatenate([rng.permutation(d_pool)[:n_val_d],
                                  rng.permutation(h_pool)[:n_val_h]])
        val_idx = rng.permutation(val_idx)
    else:
        val_idx = rng.permutation(n_pool)[:n_val]
    train_idx = np.setdiff1d(np.arange(n_pool), val_idx)

    return DataSplits(
        train=SplitPart(x_pool[train_idx], y_pool[train_idx], t_pool[train_idx]),
        validation=SplitPart(x_pool[val_idx], y_pool[val_idx], t_pool[val_idx]),
        test=SplitPart(x_test, y_test, t_test),
        feature_names=list(healthy.feature_names))


def fit_scaler(x: np.ndarray, kind: str, feature_names: list[str],
               exempt: set[str] = frozenset()) -> ScalerParams:
    """Fit min-max or standard scaler parameters on training rows only.

    Features in ``exempt`` (e.g. one-hot indicators) pass through unscaled.
    """
    if kind not in ("minmax", "standard"):
        raise ValueError(f"unknown scaler kind: {kind}")
    if len(x) == 0:
        raise ValueError("train matrix must be non-empty")
    a = np.zeros(x.shape[1])
    b = np.ones(x.shape[1])
    for j, name in enumerate(feature_names):
        if name in exempt:
            continue
        col = x[:, j]
        if kind == "minmax":
            lo, hi = col.min(), col.max()
            if hi <= lo:
                raise DegenerateFeatureError(name)
            a[j], b[j] = lo, hi - lo
        else:
            mu, sigma = col.mean(), col.std()
            if sigma <= 0:
                raise DegenerateFeatureError(name)
            a[j], b[j] = mu, sigma
    return ScalerParams(kind, list(feature_names), a, b)


def transform(x: np.ndarray, params: ScalerParams) -> np.ndarray:
    if x.shape[1] != len(params.feature_names):
        raise FeatureMismatchError(
            f"got {x.shape[1]} features, scaler has {len(params.feature_names)}")
    return (x - params.a) / params.b


def inverse_transform(x: np.ndarray, params: ScalerParams) -> np.ndarray:
    if x.shape[1] != len(params.feature_names):
        raise FeatureMismatchError(
            f"got {x.shape[1]} features, scaler has {len(params.feature_names)}")
    return x * params.b + params.a
