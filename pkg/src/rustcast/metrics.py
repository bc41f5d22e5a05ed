"""Evaluation criteria and diagnostic artifacts: MSE/RMSE/MAE/R/R2, 20-bin
error histograms, regression-plot data and the class confusion matrix.

R is the Pearson correlation of the flattened output and target matrices
(one overall number for a multi-output model); R2 is 1 - SSE/SST about the
flattened target mean, not the square of R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Severity


class ShapeMismatch(ValueError):
    pass


class DegenerateTargets(ValueError):
    """Target variance is zero, so R (and the regression fit) is undefined."""


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    r: float
    r2: float
    n: int
    per_output_r: list[float]
    mape: float  # over entries with |target| > 0 only; nan if none
    mbe: float  # mean(output - target)


@dataclass
class ErrorHistogram:
    bin_edges: np.ndarray  # 21 edges, strictly increasing
    counts: np.ndarray  # 20 bins, right-closed last bin
    min_error: float
    max_error: float


@dataclass
class RegressionPlotData:
    targets: np.ndarray  # flattened
    outputs: np.ndarray  # flattened
    fit_slope: float
    fit_intercept: float
    r: float


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (3, 3) rows true, cols predicted; order high/medium/low
    accuracy: float
    labels: tuple[str, str, str] = ("high", "medium", "low")


def _check_pair(outputs, targets):
    outputs = np.asarray(outputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if outputs.shape != targets.shape:
        raise ShapeMismatch(f"outputs {outputs.shape} vs targets {targets.shape}")
    return outputs, targets


def _pearson(y: np.ndarray, t: np.ndarray) -> float:
    ty = t - t.mean()
    yy = y - y.mean()
    syy = float(yy @ yy)
    stt = float(ty @ ty)
    if stt == 0.0:
        raise DegenerateTargets("targets have zero variance; R is undefined")
    if syy == 0.0:
        return 0.0  # constant outputs carry no linear relationship
    return float(np.clip((yy @ ty) / np.sqrt(syy * stt), -1.0, 1.0))


def compute_metrics(outputs, targets) -> MetricsReport:
    outputs, targets = _check_pair(outputs, targets)
    if outputs.ndim != 2 or outputs.shape[0] < 2:
        raise ShapeMismatch("need 2-D matrices with at least 2 rows")
    err = targets - outputs
    mse = float(np.mean(err * err))
    t_flat, y_flat = targets.ravel(), outputs.ravel()
    sse = float(err.ravel() @ err.ravel())
    sst = float(((t_flat - t_flat.mean()) ** 2).sum())
    if sst == 0.0:
        raise DegenerateTargets("targets have zero variance; R and R2 are undefined")
    per_output = []
    for col in range(outputs.shape[1]):
        tc, yc = targets[:, col], outputs[:, col]
        if np.ptp(tc) == 0.0:
            per_output.append(float("nan"))
        else:
            per_output.append(_pearson(yc, tc))
    active = np.abs(t_flat) > 0
    mape = float(np.mean(np.abs(err.ravel()[active]) / np.abs(t_flat[active])) * 100) if active.any() else float("nan")
    return MetricsReport(
        mse=mse,
        rmse=float(np.sqrt(mse)),
        mae=float(np.mean(np.abs(err))),
        r=_pearson(y_flat, t_flat),
        r2=1.0 - sse / sst,
        n=outputs.shape[0],
        per_output_r=per_output,
        mape=mape,
        mbe=float(np.mean(y_flat - t_flat)),
    )


def error_histogram(outputs, targets) -> ErrorHistogram:
    """Residuals t - y over all entries, binned into 20 equal-width bins.

    A single-valued residual range is padded by +-1e-9 so the bins stay
    well-formed; counts always total the number of residuals.
    """
    outputs, targets = _check_pair(outputs, targets)
    resid = (targets - outputs).ravel()
    if resid.size == 0:
        raise EmptyInput("no residuals to bin")
    lo, hi = float(resid.min()), float(resid.max())
    if lo == hi:
        lo -= 1e-9
        hi += 1e-9
    edges = np.linspace(lo, hi, 21)
    counts, _ = np.histogram(resid, bins=edges)
    return ErrorHistogram(bin_edges=edges, counts=counts, min_error=float(resid.min()), max_error=float(resid.max()))


def regression_plot(outputs, targets) -> RegressionPlotData:
    """Least-squares line of output on target over the flattened points."""
    outputs, targets = _check_pair(outputs, targets)
    y, t = outputs.ravel(), targets.ravel()
    if y.size < 2:
        raise ShapeMismatch("need at least 2 points")
    tc = t - t.mean()
    stt = float(tc @ tc)
    if stt == 0.0:
        raise DegenerateTargets("targets have zero variance; no regression line")
    slope = float((y - y.mean()) @ tc) / stt
    intercept = float(y.mean() - slope * t.mean())
    return RegressionPlotData(targets=t.copy(), outputs=y.copy(), fit_slope=slope, fit_intercept=intercept, r=_pearson(y, t))


def confusion(pred_classes, true_classes) -> ConfusionMatrix:
    pred = list(pred_classes)
    true = list(true_classes)
    if len(pred) != len(true):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(true)} labels")
    if not pred:
        raise EmptyInput("no samples")
    counts = np.zeros((3, 3), dtype=np.int64)
    for p, tr in zip(pred, true):
        counts[Severity(tr).value, Severity(p).value] += 1
    return ConfusionMatrix(counts=counts, accuracy=float(np.trace(counts)) / len(pred))
