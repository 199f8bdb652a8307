"""Comparison baselines: PCA with explained-variance component selection and
an unsupervised autoencoder anomaly detector."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    KTooLargeError,
    MissingValuesError,
    NonFiniteError,
    NonFiniteLossError,
    SingleClassInputError,
)
from .models.mlp import MlpParams, TrainingCurve


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray                 # rows = principal directions
    eigenvalues: np.ndarray                # descending, nonnegative
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return len(self.eigenvalues)


def fit_pca(x: np.ndarray) -> PcaModel:
    """Center by column means and eigendecompose the covariance matrix."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise MissingValuesError("PCA input contains missing cells")
    if np.isinf(x).any():
        raise NonFiniteError("PCA input contains infinities")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / len(x)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    components = eigenvectors[:, order].T
    trace = eigenvalues.sum()
    ratio = eigenvalues / trace if trace > 0 else np.zeros_like(eigenvalues)
    return PcaModel(mean=mean, components=components,
                    eigenvalues=eigenvalues, explained_variance_ratio=ratio)


def select_components(model: PcaModel, threshold: float) -> int:
    """Smallest k whose cumulative explained-variance ratio meets the threshold."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    cumulative = np.cumsum(model.explained_variance_ratio)
    hits = np.where(cumulative >= threshold - 1e-12)[0]
    return int(hits[0]) + 1 if hits.size else model.n_components


def project(model: PcaModel, k: int, x: np.ndarray) -> np.ndarray:
    if k > model.n_components:
        raise KTooLargeError(f"k={k} > {model.n_components}")
    x = np.asarray(x, dtype=np.float64)
    return (x - model.mean) @ model.components[:k].T


def write_explained_variance(model: PcaModel, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["component", "ratio", "cumulative"])
        cumulative = 0.0
        for i, r in enumerate(model.explained_variance_ratio):
            cumulative += float(r)
            w.writerow([i + 1, repr(float(r)), repr(cumulative)])


# --- autoencoder ----------------------------------------------------------

@dataclass
class AeModel:
    """Two-layer autoencoder: ReLU encoder into the latent space, linear decoder."""
    latent_dim: int
    w_enc: np.ndarray
    b_enc: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    threshold: float = 0.0
    curve: TrainingCurve = field(default_factory=TrainingCurve)

    def encode(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(np.asarray(x, dtype=np.float64) @ self.w_enc
                          + self.b_enc, 0.0)

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return self.encode(x) @ self.w_dec + self.b_dec

    def reconstruction_errors(self, x: np.ndarray) -> np.ndarray:
        """Per-row mean squared reconstruction error."""
        diff = self.reconstruct(x) - x
        return (diff ** 2).mean(axis=1)

    def classify(self, x: np.ndarray) -> np.ndarray:
        """1 (degraded/anomalous) when the error exceeds the fitted threshold."""
        return (self.reconstruction_errors(x) > self.threshold).astype(np.int64)


def ae_gradients(model: AeModel, x: np.ndarray):
    """Analytic MSE gradients for the four parameter arrays."""
    n, d = x.shape
    z = x @ model.w_enc + model.b_enc
    h = np.maximum(z, 0.0)
    recon = h @ model.w_dec + model.b_dec
    delta_out = 2.0 * (recon - x) / (n * d)
    gw_dec = h.T @ delta_out
    gb_dec = delta_out.sum(axis=0)
    delta_h = (delta_out @ model.w_dec.T) * (z > 0)
    gw_enc = x.T @ delta_h
    gb_enc = delta_h.sum(axis=0)
    return gw_enc, gb_enc, gw_dec, gb_dec


def ae_loss(model: AeModel, x: np.ndarray) -> float:
    return float(((model.reconstruct(x) - x) ** 2).mean())


def train_autoencoder(x: np.ndarray, latent_dim: int,
                      params: MlpParams) -> AeModel:
    """Minimize mean squared reconstruction error by seeded mini-batch
    gradient descent."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise MissingValuesError("autoencoder input contains missing cells")
    n, d = x.shape
    if not 0 < latent_dim < d:
        raise ValueError(f"latent_dim must lie in (0, {d})")
    rng = np.random.default_rng(params.seed)
    model = AeModel(
        latent_dim=latent_dim,
        w_enc=rng.normal(0.0, np.sqrt(2.0 / d), (d, latent_dim)),
        b_enc=np.zeros(latent_dim),
        w_dec=rng.normal(0.0, np.sqrt(2.0 / latent_dim), (latent_dim, d)),
        b_dec=np.zeros(d))

    for epoch in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            batch = x[order[start:start + params.batch_size]]
            gw_enc, gb_enc, gw_dec, gb_dec = ae_gradients(model, batch)
            model.w_enc -= params.learning_rate * gw_enc
            model.b_enc -= params.learning_rate * gb_enc
            model.w_dec -= params.learning_rate * gw_dec
            model.b_dec -= params.learning_rate * gb_dec
        loss = ae_loss(model, x)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"epoch {epoch}: reconstruction loss diverged")
        model.curve.epochs.append(epoch)
        model.curve.train_loss.append(loss)
        model.curve.val_loss.append(loss)
        model.curve.train_acc.append(0.0)
        model.curve.val_acc.append(0.0)
    return model


def choose_error_threshold(errors: np.ndarray, labels: np.ndarray,
                           criterion: str = "accuracy") -> float:
    """Exhaustive scan over midpoints of sorted unique errors; picks the cut
    maximizing training accuracy (or F1 when requested). Rows with error above
    the threshold are classified degraded."""
    errors = np.asarray(errors, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(np.unique(labels)) < 2:
        raise SingleClassInputError("both classes required to fit a threshold")
    if criterion not in ("accuracy", "f1"):
        raise ValueError(f"unknown criterion: {criterion}")
    n = len(errors)
    order = np.argsort(errors, kind="stable")
    e_sorted = errors[order]
    l_sorted = labels[order]
    # cutting after sorted position k predicts degraded for the n - k rows
    # above the cut; evaluating every distinct cut via prefix sums is
    # equivalent to scanning all midpoints but linear instead of quadratic
    cum_pos = np.concatenate([[0], np.cumsum(l_sorted)])
    boundary = np.concatenate([[True], e_sorted[1:] != e_sorted[:-1], [True]])
    cuts = np.where(boundary)[0]
    thresholds = np.empty(len(cuts))
    thresholds[0] = e_sorted[0] - 1.0
    thresholds[-1] = e_sorted[-1] + 1.0
    inner = cuts[1:-1]
    thresholds[1:-1] = (e_sorted[inner - 1] + e_sorted[inner]) / 2.0
    total_pos = cum_pos[-1]
    fn = cum_pos[cuts]
    tp = total_pos - fn
    tn = cuts - fn
    fp = (n - cuts) - tp
    if criterion == "accuracy":
        scores = (tp + tn) / n
    else:
        denom = 2 * tp + fp + fn
        scores = np.divide(2 * tp, denom, out=np.zeros(len(cuts)),
                           where=denom > 0)
    return float(thresholds[int(np.argmax(scores))])


def write_reconstruction_errors(errors: np.ndarray, threshold: float, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["row", "error", "threshold"])
        for i, e in enumerate(errors):
            w.writerow([i, repr(float(e)), repr(float(threshold))])
