"""Random forest of CART trees with Gini-impurity splits, built from scratch."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FeatureMismatchError, SingleClassInputError


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_depth: int = 10
    min_samples_leaf: int = 1
    features_per_split: int | None = None     # default ceil(sqrt(d))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_leaf < 1:
            raise ValueError("n_trees, max_depth, min_samples_leaf must be >= 1")


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    prediction: int = 0
    is_leaf: bool = False


def _best_split(x, y, feature_ids, min_leaf):
    """Best (feature, threshold) by weighted Gini over midpoint thresholds."""
    n = len(y)
    n_pos = y.sum()
    best_gain, best = 0.0, None
    parent_gini = 1.0 - (n_pos / n) ** 2 - ((n - n_pos) / n) ** 2
    for j in feature_ids:
        order = np.argsort(x[:, j], kind="stable")
        xs, ys = x[order, j], y[order]
        pos_left = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        # split between i and i+1 only where the value actually changes
        valid = xs[1:] != xs[:-1]
        valid &= (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        nl = n_left[valid].astype(float)
        nr = n - nl
        pl = pos_left[valid]
        pr = n_pos - pl
        gini_l = 1.0 - (pl / nl) ** 2 - ((nl - pl) / nl) ** 2
        gini_r = 1.0 - (pr / nr) ** 2 - ((nr - pr) / nr) ** 2
        weighted = (nl * gini_l + nr * gini_r) / n
        k = int(np.argmin(weighted))
        gain = parent_gini - weighted[k]
        if gain > best_gain + 1e-15:
            i = np.where(valid)[0][k]
            best_gain = gain
            best = (j, (xs[i] + xs[i + 1]) / 2.0)
    return best


def _grow(x, y, depth, params, rng, d):
    node = _Node()
    n_pos = int(y.sum())
    if depth >= params.max_depth or n_pos == 0 or n_pos == len(y):
        node.is_leaf = True
        node.prediction = int(n_pos * 2 >= len(y))
        return node
    m = params.features_per_split or int(np.ceil(np.sqrt(d)))
    feature_ids = rng.choice(d, size=min(m, d), replace=False)
    split = _best_split(x, y, feature_ids, params.min_samples_leaf)
    if split is None:
        node.is_leaf = True
        node.prediction = int(n_pos * 2 >= len(y))
        return node
    node.feature, node.threshold = split
    mask = x[:, node.feature] <= node.threshold
    node.left = _grow(x[mask], y[mask], depth + 1, params, rng, d)
    node.right = _grow(x[~mask], y[~mask], depth + 1, params, rng, d)
    return node


def _predict_node(node, x, out, idx):
    if node.is_leaf:
        out[idx] = node.prediction
        return
    mask = x[idx, node.feature] <= node.threshold
    _predict_node(node.left, x, out, idx[mask])
    _predict_node(node.right, x, out, idx[~mask])


def _node_to_dict(node):
    if node.is_leaf:
        return {"leaf": node.prediction}
    return {"feature": int(node.feature), "threshold": float(node.threshold),
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(d):
    node = _Node()
    if "leaf" in d:
        node.is_leaf = True
        node.prediction = int(d["leaf"])
        return node
    node.feature = d["feature"]
    node.threshold = d["threshold"]
    node.left = _node_from_dict(d["left"])
    node.right = _node_from_dict(d["right"])
    return node


@dataclass
class ForestModel:
    params: ForestParams
    n_features: int
    trees: list[_Node] = field(default_factory=list)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise FeatureMismatchError(
                f"expected {self.n_features} features, got {x.shape}")
        if len(x) == 0:
            return np.zeros(0, dtype=np.int64)
        votes = np.zeros(len(x), dtype=np.int64)
        out = np.empty(len(x), dtype=np.int64)
        idx = np.arange(len(x))
        for tree in self.trees:
            _predict_node(tree, x, out, idx)
            votes += out
        return (votes * 2 >= len(self.trees)).astype(np.int64)

    def to_dict(self) -> dict:
        return {"model": "forest",
                "params": {"n_trees": self.params.n_trees,
                           "max_depth": self.params.max_depth,
                           "min_samples_leaf": self.params.min_samples_leaf,
                           "features_per_split": self.params.features_per_split,
                           "seed": self.params.seed},
                "n_features": self.n_features,
                "trees": [_node_to_dict(t) for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        params = ForestParams(**d["params"])
        model = cls(params, d["n_features"])
        model.trees = [_node_from_dict(t) for t in d["trees"]]
        return model


def train_forest(x: np.ndarray, y: np.ndarray, params: ForestParams) -> ForestModel:
    """Bagged CART ensemble; deterministic given the seed (per-tree sub-seeds
    are derived from it by fixed spawning)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise SingleClassInputError("training labels contain a single class")
    n, d = x.shape
    model = ForestModel(params, d)
    master = np.random.SeedSequence(params.seed)
    for child in master.spawn(params.n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, size=n)
        model.trees.append(_grow(x[boot], y[boot], 0, params, rng, d))
    return model
