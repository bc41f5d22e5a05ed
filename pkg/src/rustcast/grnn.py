"""General regression neural network: Gaussian-kernel weighted averaging over
stored training patterns with a single smoothing factor sigma.

Prediction is the Nadaraya-Watson estimate
y(x) = sum_i t_i w_i / sum_i w_i, w_i = exp(-||x - x_i||^2 / (2 sigma^2)),
computed with max-exponent subtraction so distant queries stay stable. If
every kernel weight underflows to zero the unweighted target mean is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, EmptyInput


class NonPositiveSigma(ValueError):
    pass


@dataclass
class GrnnModel:
    patterns: np.ndarray  # (N, n_in)
    targets: np.ndarray  # (N, n_out)
    sigma: float


def train_grnn(data: Dataset, train_idx, sigma: float) -> GrnnModel:
    """Store the training rows verbatim; there is no iterative optimization."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if train_idx.size == 0:
        raise EmptyInput("train_idx must be non-empty")
    return GrnnModel(
        patterns=data.features[train_idx].copy(),
        targets=data.targets[train_idx].copy(),
        sigma=float(sigma),
    )


def predict_grnn(model: GrnnModel, x) -> np.ndarray:
    """Kernel-weighted target average for one normalized row or a batch."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    diff = rows[:, None, :] - model.patterns[None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    with np.errstate(over="ignore", divide="ignore"):
        expo = -d2 / (2.0 * model.sigma * model.sigma)
    peak = expo.max(axis=1)
    mean_target = model.targets.mean(axis=0)
    out = np.empty((rows.shape[0], model.targets.shape[1]))
    dead = ~np.isfinite(peak)  # every exponent underflowed to -inf
    out[dead] = mean_target
    alive = ~dead
    if alive.any():
        w = np.exp(expo[alive] - peak[alive, None])
        out[alive] = (w @ model.targets) / w.sum(axis=1)[:, None]
    return out[0] if single else out
