"""Hyperparameter search: k-fold cross validation for the forest and
stochastic (random) grid search for the MLP."""

from __future__ import annotations

import numpy as np

from ..errors import GridEmptyError, SpaceEmptyError
from .forest import ForestParams, train_forest
from .metrics import evaluate
from .mlp import MlpParams, train_mlp


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded partition of range(n) into k near-equal folds."""
    if k < 2 or n < k:
        raise ValueError(f"need k >= 2 and n >= k (n={n}, k={k})")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def cross_validate(x, y, param_grid: list[ForestParams], k: int = 5,
                   seed: int = 0) -> tuple[ForestParams, list[float]]:
    """Mean validation accuracy per grid point; argmax wins, ties broken by
    grid order."""
    if not param_grid:
        raise GridEmptyError("empty forest parameter grid")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    folds = kfold_indices(len(y), k, seed)
    scores = []
    for params in param_grid:
        accs = []
        for i in range(k):
            val_idx = folds[i]
            train_idx = np.concatenate([folds[j] for j in range(k) if j != i])
            model = train_forest(x[train_idx], y[train_idx], params)
            accs.append(evaluate(model.predict(x[val_idx]), y[val_idx]).accuracy)
        scores.append(float(np.mean(accs)))
    best = int(np.argmax(scores))
    return param_grid[best], scores


def random_search(x_train, y_train, x_val, y_val, param_space: dict,
                  n_draws: int, seed: int) -> tuple[MlpParams, list[float]]:
    """Uniform seeded draws from a discrete MLP parameter space.

    ``param_space`` maps MlpParams field names to candidate value lists.
    """
    if not param_space or any(not v for v in param_space.values()):
        raise SpaceEmptyError("empty MLP parameter space")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    rng = np.random.default_rng(seed)
    candidates = []
    for _ in range(n_draws):
        choice = {name: values[int(rng.integers(len(values)))]
                  for name, values in param_space.items()}
        choice.setdefault("seed", seed)
        if "hidden_layer_sizes" in choice:
            choice["hidden_layer_sizes"] = tuple(choice["hidden_layer_sizes"])
        candidates.append(MlpParams(**choice))
    scores = []
    for params in candidates:
        model = train_mlp(x_train, y_train, x_val, y_val, params)
        scores.append(evaluate(model.predict(x_val), y_val).accuracy)
    best = int(np.argmax(scores))
    return candidates[best], scores
