"""Radial-basis-function network grown one neuron at a time.

Growth picks the training row with the largest current residual norm as the
next center (skipping rows already chosen, ties to the lowest row index) and
re-solves the output layer by least squares after every addition, so the
training MSE trace is non-increasing by construction.

The basis is Gaussian with response 0.5 at distance == spread:
phi(d) = exp(-(d * beta)^2), beta = sqrt(ln 2) / spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .linalg import solve_least_squares


class NonPositiveSpread(ValueError):
    pass


class RbfConfigError(ValueError):
    pass


@dataclass
class RbfNetwork:
    centers: np.ndarray  # (K, n_in) rows copied from the training inputs
    spread: float
    beta: float
    w: np.ndarray  # (n_out, K)
    b: np.ndarray  # (n_out,)

    @property
    def n_neurons(self) -> int:
        return self.centers.shape[0]


@dataclass
class RbfTrainConfig:
    spread: float = 0.2
    goal_mse: float = 0.0
    max_neurons: int | None = None  # None: training-set size, capped at 2000
    neurons_between_records: int = 1

    def validate(self, n_train: int) -> int:
        if self.spread <= 0:
            raise NonPositiveSpread(f"spread must be positive, got {self.spread}")
        if self.goal_mse < 0:
            raise RbfConfigError("goal_mse must be >= 0")
        if self.neurons_between_records < 1:
            raise RbfConfigError("neurons_between_records must be >= 1")
        cap = min(n_train, 2000)
        if self.max_neurons is None:
            return cap
        if not 1 <= self.max_neurons <= n_train:
            raise RbfConfigError(
                f"max_neurons must be in [1, {n_train}] (training-set size), got {self.max_neurons}"
            )
        return min(self.max_neurons, 2000)


@dataclass
class GrowthStep:
    neurons: int
    train_mse: float
    val_mse: float | None = None


def radbas(distance, spread: float):
    """Gaussian response: 1 at the center, 0.5 at distance == spread."""
    if spread <= 0:
        raise NonPositiveSpread(f"spread must be positive, got {spread}")
    beta = np.sqrt(np.log(2.0)) / spread
    d = np.asarray(distance, dtype=np.float64)
    return np.exp(-((d * beta) ** 2))


def _pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def train_rbf(
    data: Dataset, train_idx, cfg: RbfTrainConfig, val_idx=None
) -> tuple[RbfNetwork, list[GrowthStep]]:
    """Grow centers greedily; returns the network and the growth trace.

    The growth trace records (neuron_count, train_mse) every
    `neurons_between_records` additions and always at the final size; when
    `val_idx` is given each step also carries the validation MSE.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if train_idx.size == 0:
        raise RbfConfigError("train_idx must be non-empty")
    x = data.features[train_idx]
    t = data.targets[train_idx]
    max_neurons = cfg.validate(train_idx.size)
    x_val = data.features[np.asarray(val_idx, dtype=np.int64)] if val_idx is not None else None
    t_val = data.targets[np.asarray(val_idx, dtype=np.int64)] if val_idx is not None else None

    n = x.shape[0]
    dist_all = None  # lazily built (n, n) distance table
    pred = np.zeros_like(t)
    chosen: list[int] = []
    used = np.zeros(n, dtype=bool)
    growth: list[GrowthStep] = []
    net = None

    for k in range(1, max_neurons + 1):
        resid = np.linalg.norm(t - pred, axis=1)
        resid[used] = -np.inf  # a row can host at most one center
        pick = int(np.argmax(resid))  # argmax takes the first max: lowest index wins ties
        chosen.append(pick)
        used[pick] = True
        if dist_all is None:
            dist_all = _pairwise_dist(x, x)
        phi = radbas(dist_all[:, chosen], cfg.spread)
        design = np.hstack([phi, np.ones((n, 1))])
        wb = solve_least_squares(design, t)
        pred = design @ wb
        train_mse = float(np.mean((t - pred) ** 2))
        net = RbfNetwork(
            centers=x[chosen].copy(),
            spread=cfg.spread,
            beta=float(np.sqrt(np.log(2.0)) / cfg.spread),
            w=wb[:-1].T.copy(),
            b=wb[-1].copy(),
        )
        if k % cfg.neurons_between_records == 0 or k == max_neurons or train_mse <= cfg.goal_mse:
            val_mse = (
                float(np.mean((t_val - predict_rbf(net, x_val)) ** 2)) if x_val is not None else None
            )
            growth.append(GrowthStep(neurons=k, train_mse=train_mse, val_mse=val_mse))
        if train_mse <= cfg.goal_mse:
            break

    return net, growth


def predict_rbf(net: RbfNetwork, x) -> np.ndarray:
    """Outputs for one normalized row or a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    phi = radbas(_pairwise_dist(rows, net.centers), net.spread)
    y = phi @ net.w.T + net.b
    return y[0] if single else y
