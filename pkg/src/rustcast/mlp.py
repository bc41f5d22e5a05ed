"""One-hidden-layer perceptron with selectable transfer functions and ten
full-batch training algorithms, trained with validation-based early stopping.

Loss everywhere is the mean squared error over samples AND output units, so a
perfect 3-output batch of n rows divides the squared residuals by 3n.

Parameter vectors flatten in the fixed order [w1 row-major, b1, w2 row-major,
b2]; gradients, Jacobian columns and optimizer state all follow it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .dataset import Dataset, Severity, SplitIndices
from .linalg import SeededRng, solve_damped_normal


class ConfigError(ValueError):
    pass


class EmptyBatch(ValueError):
    pass


class NonFiniteLoss(FloatingPointError):
    """Training diverged; reported instead of being silently clamped."""


class Transfer(str, Enum):
    TANSIG = "tansig"  # 2/(1+e^(-2n)) - 1, i.e. tanh(n)
    LOGSIG = "logsig"  # 1/(1+e^(-n))
    PURELIN = "purelin"  # n

    @classmethod
    def parse(cls, text: str) -> "Transfer":
        aliases = {"tanh": cls.TANSIG, "sigmoid": cls.LOGSIG, "linear": cls.PURELIN}
        key = text.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown transfer function {text!r}") from None


def transfer(f: Transfer, n):
    n = np.asarray(n, dtype=np.float64)
    if f is Transfer.TANSIG:
        return np.tanh(n)
    if f is Transfer.LOGSIG:
        return _logsig(n)
    return n.copy()


def transfer_deriv(f: Transfer, n):
    n = np.asarray(n, dtype=np.float64)
    if f is Transfer.TANSIG:
        t = np.tanh(n)
        return 1.0 - t * t
    if f is Transfer.LOGSIG:
        s = _logsig(n)
        return s * (1.0 - s)
    return np.ones_like(n)


def _logsig(n: np.ndarray) -> np.ndarray:
    # piecewise form avoids exp overflow for large negative inputs
    out = np.empty_like(n)
    pos = n >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-n[pos]))
    en = np.exp(n[~pos])
    out[~pos] = en / (1.0 + en)
    return out


class Algo(str, Enum):
    LEVENBERG_MARQUARDT = "lm"
    QUASI_NEWTON_BFGS = "bfg"
    RESILIENT_BACKPROP = "rp"
    GD_ADAPTIVE_LR_MOMENTUM = "gdx"
    SCALED_CONJUGATE_GRADIENT = "scg"
    CONJUGATE_GRADIENT_POWELL_BEALE = "cgb"
    ONE_STEP_SECANT = "oss"
    CONJUGATE_GRADIENT_FLETCHER_REEVES = "cgf"
    GD_MOMENTUM = "gdm"
    GRADIENT_DESCENT = "gd"

    @classmethod
    def parse(cls, text: str) -> "Algo":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigError(f"unknown training algorithm {text!r}") from None


class StopReason(Enum):
    GOAL_MET = "goal_met"
    MAX_EPOCHS = "max_epochs"
    VALIDATION_STOP = "validation_stop"
    MU_OVERFLOW = "mu_overflow"
    LINE_SEARCH_STALL = "line_search_stall"


@dataclass
class MlpNetwork:
    n_in: int
    n_hidden: int
    n_out: int
    w1: np.ndarray  # (n_hidden, n_in)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_out, n_hidden)
    b2: np.ndarray  # (n_out,)
    f_hidden: Transfer
    f_out: Transfer

    @property
    def n_params(self) -> int:
        return self.n_hidden * self.n_in + self.n_hidden + self.n_out * self.n_hidden + self.n_out

    def copy(self) -> "MlpNetwork":
        return replace(self, w1=self.w1.copy(), b1=self.b1.copy(), w2=self.w2.copy(), b2=self.b2.copy())


@dataclass
class TrainConfig:
    algorithm: Algo = Algo.LEVENBERG_MARQUARDT
    max_epochs: int = 1000
    goal_mse: float = 0.0
    patience: int = 6
    learning_rate: float = 0.01
    momentum: float = 0.9
    lm_mu0: float = 0.001
    lm_mu_inc: float = 10.0
    lm_mu_dec: float = 0.1
    lm_mu_max: float = 1e10
    rng_seed: int = 0

    def validate(self) -> None:
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.goal_mse < 0:
            raise ConfigError("goal_mse must be >= 0")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        if self.lm_mu0 <= 0 or self.lm_mu_max <= 0:
            raise ConfigError("LM mu bounds must be positive")
        if self.lm_mu_inc <= 1.0 or not 0.0 < self.lm_mu_dec < 1.0:
            raise ConfigError("need lm_mu_inc > 1 and lm_mu_dec in (0, 1)")


@dataclass
class TrainRecord:
    """Per-epoch trace (epoch 0 is the untrained starting point)."""

    train_mse: np.ndarray
    val_mse: np.ndarray
    test_mse: np.ndarray
    gradient_norm: np.ndarray
    best_epoch: int
    stop_reason: StopReason

    @property
    def n_epochs(self) -> int:
        return len(self.train_mse) - 1


def init_network(
    n_in: int, n_hidden: int, n_out: int, f_hidden: Transfer, f_out: Transfer, rng: SeededRng
) -> MlpNetwork:
    """Weights and biases drawn uniformly from [-0.5, 0.5] / sqrt(fan_in).

    Draw order is fixed (w1 row-major, b1, w2 row-major, b2) so a seed pins
    the network bit-for-bit.
    """
    if n_hidden < 1 or n_in < 1 or n_out < 1:
        raise ConfigError("layer sizes must be >= 1")

    def draw(rows, cols, fan_in):
        scale = 1.0 / np.sqrt(fan_in)
        vals = [rng.uniform(-0.5, 0.5) * scale for _ in range(rows * cols)]
        return np.array(vals).reshape(rows, cols)

    w1 = draw(n_hidden, n_in, n_in)
    b1 = draw(n_hidden, 1, n_in).ravel()
    w2 = draw(n_out, n_hidden, n_hidden)
    b2 = draw(n_out, 1, n_hidden).ravel()
    return MlpNetwork(n_in, n_hidden, n_out, w1, b1, w2, b2, f_hidden, f_out)


def get_params(net: MlpNetwork) -> np.ndarray:
    return np.concatenate([net.w1.ravel(), net.b1, net.w2.ravel(), net.b2])


def set_params(net: MlpNetwork, vec: np.ndarray) -> None:
    h, i, o = net.n_hidden, net.n_in, net.n_out
    pos = 0
    net.w1[...] = vec[pos : pos + h * i].reshape(h, i)
    pos += h * i
    net.b1[...] = vec[pos : pos + h]
    pos += h
    net.w2[...] = vec[pos : pos + o * h].reshape(o, h)
    pos += o * h
    net.b2[...] = vec[pos : pos + o]


def forward(net: MlpNetwork, x) -> tuple[np.ndarray, np.ndarray]:
    """Outputs and hidden activations for one (normalized) input row."""
    x = np.asarray(x, dtype=np.float64)
    a1 = transfer(net.f_hidden, net.w1 @ x + net.b1)
    y = transfer(net.f_out, net.w2 @ a1 + net.b2)
    return y, a1


def _forward_batch(net: MlpNetwork, x: np.ndarray):
    # divergence shows up as inf/nan and is reported by the training loop,
    # so the transient overflow warnings are suppressed here
    with np.errstate(over="ignore", invalid="ignore"):
        z1 = x @ net.w1.T + net.b1
        a1 = transfer(net.f_hidden, z1)
        z2 = a1 @ net.w2.T + net.b2
        y = transfer(net.f_out, z2)
    return y, a1, z1, z2


def batch_mse(net: MlpNetwork, x: np.ndarray, t: np.ndarray) -> float:
    y, _, _, _ = _forward_batch(net, x)
    with np.errstate(over="ignore", invalid="ignore"):
        d = t - y
        return float(np.mean(d * d))


def backprop_gradient(net: MlpNetwork, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Gradient of the batch MSE with respect to the flattened parameters."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    t = np.atleast_2d(np.asarray(t, dtype=np.float64))
    n, k = t.shape
    if n == 0:
        raise EmptyBatch("gradient of an empty batch")
    y, a1, z1, z2 = _forward_batch(net, x)
    with np.errstate(over="ignore", invalid="ignore"):
        dz2 = -(2.0 / (n * k)) * (t - y) * transfer_deriv(net.f_out, z2)
        gw2 = dz2.T @ a1
        gb2 = dz2.sum(axis=0)
        dz1 = (dz2 @ net.w2) * transfer_deriv(net.f_hidden, z1)
        gw1 = dz1.T @ x
        gb1 = dz1.sum(axis=0)
    return np.concatenate([gw1.ravel(), gb1, gw2.ravel(), gb2])


def jacobian(net: MlpNetwork, x: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Jacobian of the residuals e = t - y and the flattened residual vector.

    Row r = i*n_out + k holds d(e[i,k])/d(theta). Because the loss is the mean
    of e^2 over n*n_out entries, backprop_gradient == 2/(n*n_out) * J^T e.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    t = np.atleast_2d(np.asarray(t, dtype=np.float64))
    n, k = t.shape
    if n == 0:
        raise EmptyBatch("jacobian of an empty batch")
    h = net.n_hidden
    y, a1, z1, z2 = _forward_batch(net, x)
    e = (t - y).ravel()
    go = transfer_deriv(net.f_out, z2)  # (n, k)
    gh = transfer_deriv(net.f_hidden, z1)  # (n, h)

    # second layer: de[i,k]/dw2[k,:] = -go[i,k] * a1[i,:], zero for other rows
    jw2 = np.zeros((n, k, k, h))
    rng_k = np.arange(k)
    jw2[:, rng_k, rng_k, :] = -go[:, :, None] * a1[:, None, :]
    jb2 = np.zeros((n, k, k))
    jb2[:, rng_k, rng_k] = -go

    # first layer through the chain rule
    dzh = -go[:, :, None] * net.w2[None, :, :] * gh[:, None, :]  # (n, k, h)
    jw1 = dzh[:, :, :, None] * x[:, None, None, :]  # (n, k, h, n_in)

    j = np.concatenate(
        [
            jw1.reshape(n * k, h * net.n_in),
            dzh.reshape(n * k, h),
            jw2.reshape(n * k, k * h),
            jb2.reshape(n * k, k),
        ],
        axis=1,
    )
    return j, e


def predict_class(net: MlpNetwork, x) -> Severity:
    y, _ = forward(net, x)
    return Severity(int(np.argmax(y)))  # first max wins -> higher severity


class EarlyStopper:
    """Tracks the best validation MSE and stops after `patience` epochs
    without a new best; keeps a snapshot of the best parameters."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_val = np.inf
        self.best_epoch = 0
        self.best_params: np.ndarray | None = None
        self.fails = 0

    def update(self, epoch: int, val_mse: float, params: np.ndarray) -> bool:
        if val_mse < self.best_val:
            self.best_val = val_mse
            self.best_epoch = epoch
            self.best_params = params.copy()
            self.fails = 0
            return False
        self.fails += 1
        return self.fails >= self.patience


# ---------------------------------------------------------------------------
# line search shared by the quasi-Newton / conjugate-gradient family


def _line_search(loss_at, theta, direction, f0, slope, alpha0=1.0, max_trials=20):
    """Backtracking search for the 1e-4 sufficient-decrease condition.

    Expands by doubling while that keeps helping, otherwise interpolates
    (quadratic first, then cubic) down to at most `max_trials` evaluations.
    Returns (alpha, f_alpha) or (None, f0) when no acceptable step exists.
    """
    c1 = 1e-4
    alpha = alpha0
    f1 = loss_at(theta + alpha * direction)
    trials = 1
    if np.isfinite(f1) and f1 <= f0 + c1 * alpha * slope:
        while trials < max_trials:
            f2 = loss_at(theta + 2.0 * alpha * direction)
            trials += 1
            if np.isfinite(f2) and f2 < f1 and f2 <= f0 + c1 * 2.0 * alpha * slope:
                alpha *= 2.0
                f1 = f2
            else:
                break
        return alpha, f1

    # quadratic model through f0, slope, (alpha, f1)
    prev_alpha, prev_f = alpha, f1
    denom = f1 - f0 - slope * alpha
    alpha = -slope * alpha * alpha / (2.0 * denom) if denom > 0 else 0.5 * alpha
    alpha = float(np.clip(alpha, 0.1 * prev_alpha, 0.5 * prev_alpha))
    while trials < max_trials:
        f1 = loss_at(theta + alpha * direction)
        trials += 1
        if np.isfinite(f1) and f1 <= f0 + c1 * alpha * slope:
            return alpha, f1
        # cubic through f0, slope and the two most recent trials
        a, b = _cubic_coeffs(f0, slope, prev_alpha, prev_f, alpha, f1)
        new_alpha = None
        if a is not None:
            disc = b * b - 3.0 * a * slope
            if disc >= 0 and abs(a) > 1e-300:
                new_alpha = (-b + np.sqrt(disc)) / (3.0 * a)
        if new_alpha is None or not np.isfinite(new_alpha):
            new_alpha = 0.5 * alpha
        prev_alpha, prev_f = alpha, f1
        alpha = float(np.clip(new_alpha, 0.1 * alpha, 0.5 * alpha))
        if alpha < 1e-300:
            break
    return None, f0


def _cubic_coeffs(f0, slope, a0, fa0, a1, fa1):
    d = a0 * a0 * a1 * a1 * (a1 - a0)
    if abs(d) < 1e-300:
        return None, None
    r0 = fa0 - f0 - slope * a0
    r1 = fa1 - f0 - slope * a1
    a = (a0 * a0 * r1 - a1 * a1 * r0) / d
    b = (-(a0 ** 3) * r1 + a1 ** 3 * r0) / d
    return a, b


# ---------------------------------------------------------------------------
# one-epoch steppers; each mutates `work` in place and returns a status


_OK = "ok"
_STALL = "stall"
_MU_OVERFLOW = "mu_overflow"


def _step_gd(work, x, t, state, cfg):
    g = backprop_gradient(work, x, t)
    set_params(work, get_params(work) - cfg.learning_rate * g)
    return _OK


def _step_gdm(work, x, t, state, cfg):
    g = backprop_gradient(work, x, t)
    v = state.setdefault("v", np.zeros_like(g))
    v[...] = cfg.momentum * v - cfg.learning_rate * g
    set_params(work, get_params(work) + v)
    return _OK


def _step_gdx(work, x, t, state, cfg):
    # adaptive rate: grow 1.05x on improvement, shrink 0.7x (and reject the
    # step) when the loss worsens by more than 4%
    g = backprop_gradient(work, x, t)
    lr = state.setdefault("lr", cfg.learning_rate)
    v = state.setdefault("v", np.zeros_like(g))
    prev_loss = state.get("loss")
    if prev_loss is None:
        prev_loss = state["loss"] = batch_mse(work, x, t)
    theta = get_params(work)
    step = cfg.momentum * v - lr * g
    set_params(work, theta + step)
    new_loss = batch_mse(work, x, t)
    if not np.isfinite(new_loss) or new_loss > prev_loss * 1.04:
        set_params(work, theta)
        v[...] = 0.0
        state["lr"] = max(lr * 0.7, 1e-12)
    else:
        v[...] = step
        if new_loss < prev_loss:
            state["lr"] = min(lr * 1.05, 1e3)
        state["loss"] = new_loss
    return _OK


def _step_rp(work, x, t, state, cfg):
    # iRprop-: sign-based steps, eta+ = 1.2, eta- = 0.5, delta in [1e-6, 50]
    g = backprop_gradient(work, x, t)
    delta = state.setdefault("delta", np.full_like(g, 0.07))
    g_prev = state.setdefault("g_prev", np.zeros_like(g))
    prod = g * g_prev
    delta[prod > 0] = np.minimum(delta[prod > 0] * 1.2, 50.0)
    delta[prod < 0] = np.maximum(delta[prod < 0] * 0.5, 1e-6)
    g_eff = g.copy()
    g_eff[prod < 0] = 0.0
    set_params(work, get_params(work) - np.sign(g_eff) * delta)
    state["g_prev"] = g_eff
    return _OK


def _step_lm(work, x, t, state, cfg):
    mu = state.setdefault("mu", cfg.lm_mu0)
    j, e = jacobian(work, x, t)
    theta = get_params(work)
    mse0 = float(e @ e) / e.size
    while True:
        delta = solve_damped_normal(j, e, mu)
        set_params(work, theta - delta)
        mse1 = batch_mse(work, x, t)
        if np.isfinite(mse1) and mse1 < mse0:
            state["mu"] = max(mu * cfg.lm_mu_dec, 1e-20)
            return _OK
        mu *= cfg.lm_mu_inc
        if mu > cfg.lm_mu_max:
            set_params(work, theta)  # no acceptable step; leave params alone
            state["mu"] = mu
            return _MU_OVERFLOW


def _loss_fn(work, x, t):
    scratch = work.copy()

    def loss_at(vec):
        set_params(scratch, vec)
        return batch_mse(scratch, x, t)

    return loss_at


def _step_bfg(work, x, t, state, cfg):
    loss_at = _loss_fn(work, x, t)
    theta = get_params(work)
    g = state.get("g")
    if g is None:
        g = backprop_gradient(work, x, t)
    h = state.setdefault("h", np.eye(theta.size))
    d = -(h @ g)
    slope = float(g @ d)
    if slope >= 0:  # curvature lost; reset to steepest descent
        h[...] = np.eye(theta.size)
        d = -g
        slope = float(g @ d)
    f0 = batch_mse(work, x, t)
    alpha, _ = _line_search(loss_at, theta, d, f0, slope, alpha0=1.0)
    if alpha is None:
        return _STALL
    s = alpha * d
    set_params(work, theta + s)
    g_new = backprop_gradient(work, x, t)
    y = g_new - g
    sy = float(s @ y)
    if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
        rho = 1.0 / sy
        v = np.eye(theta.size) - rho * np.outer(s, y)
        h[...] = v @ h @ v.T + rho * np.outer(s, s)
    state["g"] = g_new
    return _OK


def _cg_alpha0(state, slope):
    prev_alpha, prev_slope = state.get("alpha_slope", (1.0, slope))
    if slope >= 0 or prev_slope == 0:
        return 1.0
    return float(np.clip(prev_alpha * prev_slope / slope, 1e-6, 1e3))


def _step_cgf(work, x, t, state, cfg):
    # Fletcher-Reeves beta, restart every n_params epochs or on a bad slope
    loss_at = _loss_fn(work, x, t)
    theta = get_params(work)
    g = backprop_gradient(work, x, t)
    d_prev, g_prev = state.get("d"), state.get("g")
    since_restart = state.get("since_restart", 0)
    if d_prev is None or since_restart >= theta.size:
        d = -g
        since_restart = 0
    else:
        beta = float(g @ g) / float(g_prev @ g_prev)
        d = -g + beta * d_prev
    slope = float(g @ d)
    if slope >= 0:
        d = -g
        slope = float(g @ d)
        since_restart = 0
    f0 = batch_mse(work, x, t)
    alpha, _ = _line_search(loss_at, theta, d, f0, slope, alpha0=_cg_alpha0(state, slope))
    if alpha is None:
        return _STALL
    set_params(work, theta + alpha * d)
    state.update(d=d, g=g, since_restart=since_restart + 1, alpha_slope=(alpha, slope))
    return _OK


def _step_cgb(work, x, t, state, cfg):
    # Powell-Beale restarts: steepest descent when successive gradients stay
    # too parallel, otherwise Hestenes-Stiefel beta plus the restart-direction
    # correction term built from the gradient change across the restart step
    loss_at = _loss_fn(work, x, t)
    theta = get_params(work)
    g = backprop_gradient(work, x, t)
    g_prev, d_prev = state.get("g"), state.get("d")
    if state.get("g_restart") is not None and state.get("yt") is None:
        state["yt"] = g - state.pop("g_restart")
    restart = (
        d_prev is None
        or abs(float(g_prev @ g)) >= 0.2 * float(g @ g)
        or state.get("since_restart", 0) >= theta.size
    )
    if not restart:
        y = g - g_prev
        dy = float(d_prev @ y)
        beta = float(g @ y) / dy if abs(dy) > 1e-300 else 0.0
        d = -g + beta * d_prev
        dt, yt = state.get("dt"), state.get("yt")
        if dt is not None and yt is not None:
            dtyt = float(dt @ yt)
            if abs(dtyt) > 1e-300:
                d = d + (float(g @ yt) / dtyt) * dt
        if float(g @ d) >= 0:
            restart = True
    if restart:
        d = -g
        state["dt"] = d
        state["g_restart"] = g
        state["yt"] = None
        state["since_restart"] = 0
    slope = float(g @ d)
    f0 = batch_mse(work, x, t)
    alpha, _ = _line_search(loss_at, theta, d, f0, slope, alpha0=_cg_alpha0(state, slope))
    if alpha is None:
        return _STALL
    set_params(work, theta + alpha * d)
    state.update(g=g, d=d, since_restart=state.get("since_restart", 0) + 1, alpha_slope=(alpha, slope))
    return _OK


def _step_oss(work, x, t, state, cfg):
    # memoryless quasi-Newton (one-step secant) direction
    loss_at = _loss_fn(work, x, t)
    theta = get_params(work)
    g = backprop_gradient(work, x, t)
    theta_prev, g_prev = state.get("theta"), state.get("g")
    if theta_prev is None:
        d = -g
    else:
        s = theta - theta_prev
        y = g - g_prev
        sy = float(s @ y)
        if abs(sy) < 1e-300:
            d = -g
        else:
            b_coef = float(s @ g) / sy
            a_coef = -(1.0 + float(y @ y) / sy) * b_coef + float(y @ g) / sy
            d = -g + a_coef * s + b_coef * y
    slope = float(g @ d)
    if slope >= 0:
        d = -g
        slope = float(g @ d)
    f0 = batch_mse(work, x, t)
    alpha, _ = _line_search(loss_at, theta, d, f0, slope, alpha0=_cg_alpha0(state, slope))
    if alpha is None:
        return _STALL
    set_params(work, theta + alpha * d)
    state.update(theta=theta, g=g, alpha_slope=(alpha, slope))
    return _OK


def _step_scg(work, x, t, state, cfg):
    # Moller's scaled conjugate gradient, one iteration per epoch
    sigma0 = 5e-5
    theta = get_params(work)
    n = theta.size
    if "r" not in state:
        state["r"] = -backprop_gradient(work, x, t)
        state["p"] = state["r"].copy()
        state["lam"] = 5e-7
        state["lam_bar"] = 0.0
        state["success"] = True
        state["k"] = 1
    r, p = state["r"], state["p"]
    lam, lam_bar = state["lam"], state["lam_bar"]
    p_norm2 = float(p @ p)
    if p_norm2 < 1e-300:
        return _STALL
    if state["success"]:
        sigma = sigma0 / np.sqrt(p_norm2)
        scratch = work.copy()
        set_params(scratch, theta + sigma * p)
        g_plus = backprop_gradient(scratch, x, t)
        g_here = -r
        state["delta"] = float(p @ (g_plus - g_here)) / sigma
    delta = state["delta"] + (lam - lam_bar) * p_norm2
    if delta <= 0:
        lam_bar = 2.0 * (lam - delta / p_norm2)
        delta = -delta + lam * p_norm2
        lam = lam_bar
    mu = float(p @ r)
    alpha = mu / delta
    f0 = batch_mse(work, x, t)
    scratch = work.copy()
    set_params(scratch, theta + alpha * p)
    f1 = batch_mse(scratch, x, t)
    comparison = 2.0 * delta * (f0 - f1) / (mu * mu) if mu != 0 else -1.0
    if np.isfinite(comparison) and comparison >= 0:
        set_params(work, theta + alpha * p)
        r_new = -backprop_gradient(work, x, t)
        lam_bar = 0.0
        state["success"] = True
        if state["k"] % n == 0:
            p_new = r_new.copy()
        else:
            beta = (float(r_new @ r_new) - float(r_new @ r)) / mu
            p_new = r_new + beta * p
        if comparison >= 0.75:
            lam = max(lam * 0.25, 1e-20)
        state["r"], state["p"] = r_new, p_new
    else:
        lam_bar = lam
        state["success"] = False
    if comparison < 0.25:
        lam = lam + delta * (1.0 - comparison) / p_norm2
    state["lam"], state["lam_bar"] = lam, lam_bar
    state["k"] += 1
    return _OK


_STEPPERS = {
    Algo.GRADIENT_DESCENT: _step_gd,
    Algo.GD_MOMENTUM: _step_gdm,
    Algo.GD_ADAPTIVE_LR_MOMENTUM: _step_gdx,
    Algo.RESILIENT_BACKPROP: _step_rp,
    Algo.LEVENBERG_MARQUARDT: _step_lm,
    Algo.QUASI_NEWTON_BFGS: _step_bfg,
    Algo.CONJUGATE_GRADIENT_FLETCHER_REEVES: _step_cgf,
    Algo.CONJUGATE_GRADIENT_POWELL_BEALE: _step_cgb,
    Algo.ONE_STEP_SECANT: _step_oss,
    Algo.SCALED_CONJUGATE_GRADIENT: _step_scg,
}


def train(
    net: MlpNetwork, data: Dataset, split: SplitIndices, cfg: TrainConfig
) -> tuple[MlpNetwork, TrainRecord]:
    """Train a copy of `net` with the configured algorithm.

    Features in `data` must already be normalized. Stops on the MSE goal, the
    epoch limit, `patience` validation failures (restoring the best-epoch
    weights), LM mu overflow, or a stalled line search. Raises NonFiniteLoss
    if the training loss diverges.
    """
    cfg.validate()
    x_train, t_train = data.features[split.train], data.targets[split.train]
    x_val, t_val = data.features[split.val], data.targets[split.val]
    x_test, t_test = data.features[split.test], data.targets[split.test]
    if len(x_train) == 0 or len(x_val) == 0 or len(x_test) == 0:
        raise ConfigError("all three partitions must be non-empty")

    work = net.copy()
    stepper = _STEPPERS[cfg.algorithm]
    state: dict = {}
    stopper = EarlyStopper(cfg.patience)

    train_hist, val_hist, test_hist, grad_hist = [], [], [], []

    def record(epoch: int) -> tuple[float, float]:
        tr = batch_mse(work, x_train, t_train)
        va = batch_mse(work, x_val, t_val)
        te = batch_mse(work, x_test, t_test)
        gn = float(np.linalg.norm(backprop_gradient(work, x_train, t_train)))
        train_hist.append(tr)
        val_hist.append(va)
        test_hist.append(te)
        grad_hist.append(gn)
        if not np.isfinite(tr):
            raise NonFiniteLoss(f"training loss became non-finite at epoch {epoch}")
        return tr, va

    tr, va = record(0)
    stopper.update(0, va, get_params(work))
    reason = StopReason.MAX_EPOCHS
    if tr <= cfg.goal_mse:
        reason = StopReason.GOAL_MET
    else:
        for epoch in range(1, cfg.max_epochs + 1):
            status = stepper(work, x_train, t_train, state, cfg)
            tr, va = record(epoch)
            should_stop = stopper.update(epoch, va, get_params(work))
            if tr <= cfg.goal_mse:
                reason = StopReason.GOAL_MET
                break
            if status == _MU_OVERFLOW:
                reason = StopReason.MU_OVERFLOW
                break
            if status == _STALL:
                reason = StopReason.LINE_SEARCH_STALL
                break
            if should_stop:
                reason = StopReason.VALIDATION_STOP
                set_params(work, stopper.best_params)
                break

    rec = TrainRecord(
        train_mse=np.array(train_hist),
        val_mse=np.array(val_hist),
        test_mse=np.array(test_hist),
        gradient_norm=np.array(grad_hist),
        best_epoch=stopper.best_epoch,
        stop_reason=reason,
    )
    return work, rec
