"""Feed-forward binary classifier trained by mini-batch gradient descent.

ReLU hidden layers, one sigmoid output, binary cross-entropy loss. Kept as
plain numpy so the analytic gradients can be checked against finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FeatureMismatchError, NonFiniteLossError


@dataclass(frozen=True)
class MlpParams:
    hidden_layer_sizes: tuple[int, ...] = (32, 16)
    learning_rate: float = 0.05
    batch_size: int = 64
    epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if any(s < 1 for s in self.hidden_layer_sizes):
            raise ValueError("hidden layer sizes must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainingCurve:
    epochs: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)

    def rows(self):
        return zip(self.epochs, self.train_loss, self.val_loss,
                   self.train_acc, self.val_acc)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_weights(layer_sizes: list[int], seed: int):
    """He-style initialization; returns (weights, biases) lists."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, x):
    """Returns (activations per layer, output probabilities)."""
    acts = [x]
    a = x
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w + b
        a = _sigmoid(z) if k == len(weights) - 1 else np.maximum(z, 0.0)
        acts.append(a)
    return acts, a[:, 0]


def bce_loss(p, y, eps=1e-12):
    p = np.clip(p, eps, 1 - eps)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def gradients(weights, biases, x, y):
    """Analytic BCE gradients for every weight and bias."""
    acts, p = forward(weights, biases, x)
    n = len(y)
    # dL/dz at the sigmoid output; hidden deltas via ReLU mask
    delta = ((p - y) / n)[:, None]
    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for k in reversed(range(len(weights))):
        grads_w[k] = acts[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ weights[k].T) * (acts[k] > 0)
    return grads_w, grads_b


@dataclass
class MlpModel:
    params: MlpParams
    n_features: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    curve: TrainingCurve = field(default_factory=TrainingCurve)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise FeatureMismatchError(
                f"expected {self.n_features} features, got {x.shape}")
        if len(x) == 0:
            return np.zeros(0)
        _, p = forward(self.weights, self.biases, x)
        return p

    def predict(self, x: np.ndarray) -> np.ndarray:
        if len(x) == 0:
            return np.zeros(0, dtype=np.int64)
        return (self.predict_proba(x) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {"model": "mlp",
                "params": {"hidden_layer_sizes": list(self.params.hidden_layer_sizes),
                           "learning_rate": self.params.learning_rate,
                           "batch_size": self.params.batch_size,
                           "epochs": self.params.epochs,
                           "seed": self.params.seed},
                "n_features": self.n_features,
                "weights": [w.tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases]}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        p = dict(d["params"])
        p["hidden_layer_sizes"] = tuple(p["hidden_layer_sizes"])
        return cls(MlpParams(**p), d["n_features"],
                   [np.asarray(w) for w in d["weights"]],
                   [np.asarray(b) for b in d["biases"]])


def train_mlp(x_train, y_train, x_val, y_val, params: MlpParams) -> MlpModel:
    """Seeded mini-batch gradient descent; records per-epoch loss/accuracy."""
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    x_val = np.asarray(x_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.float64)
    if len(x_val) == 0:
        raise ValueError("validation set must be non-empty")

    layer_sizes = [x_train.shape[1], *params.hidden_layer_sizes, 1]
    weights, biases = init_weights(layer_sizes, params.seed)
    model = MlpModel(params, x_train.shape[1], weights, biases)
    rng = np.random.default_rng(params.seed + 1)

    n = len(x_train)
    for epoch in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            idx = order[start:start + params.batch_size]
            gw, gb = gradients(weights, biases, x_train[idx], y_train[idx])
            for k in range(len(weights)):
                weights[k] -= params.learning_rate * gw[k]
                biases[k] -= params.learning_rate * gb[k]
        _, p_train = forward(weights, biases, x_train)
        _, p_val = forward(weights, biases, x_val)
        tl, vl = bce_loss(p_train, y_train), bce_loss(p_val, y_val)
        if not (np.isfinite(tl) and np.isfinite(vl)):
            raise NonFiniteLossError(f"epoch {epoch}: loss diverged")
        model.curve.epochs.append(epoch)
        model.curve.train_loss.append(tl)
        model.curve.val_loss.append(vl)
        model.curve.train_acc.append(float(((p_train >= 0.5) == y_train).mean()))
        model.curve.val_acc.append(float(((p_val >= 0.5) == y_val).mean()))
    return model
