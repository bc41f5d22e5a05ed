"""Report emission: headered CSV tables plus matplotlib renderings of the
same data (training curves, gradient trace, regression fits, 20-bin error
histograms, sweep curves, growth traces and the model comparison chart).

CSV files are the primary machine-readable interface; figures are rendered
alongside them for human review. All text output uses \\n line endings and
``.`` decimal points; floats go through repr so files are byte-stable.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .metrics import ConfusionMatrix, ErrorHistogram, MetricsReport, RegressionPlotData
from .mlp import TrainRecord
from .rbfnn import GrowthStep
from .sweep import ComparisonReport, Family, SweepResult


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _open(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="", encoding="utf-8")


# ---------------------------------------------------------------------------
# CSV tables


def write_metrics_csv(path, rows: list[tuple[str, MetricsReport, float | None]]) -> None:
    """Rows of (partition name, report, classification accuracy or None)."""
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["partition", "n", "mse", "rmse", "mae", "r", "r2", "mape", "mbe", "accuracy"])
        for name, m, acc in rows:
            w.writerow([name, m.n, m.mse, m.rmse, m.mae, m.r, m.r2, m.mape, m.mbe,
                        "" if acc is None else acc])


def write_regression_csv(path, parts: dict[str, RegressionPlotData]) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["partition", "target", "output"])
        for name, data in parts.items():
            for t, y in zip(data.targets, data.outputs):
                w.writerow([name, t, y])


def write_regression_fit_csv(path, parts: dict[str, RegressionPlotData]) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["partition", "slope", "intercept", "r"])
        for name, data in parts.items():
            w.writerow([name, data.fit_slope, data.fit_intercept, data.r])


def write_histogram_csv(path, hist: ErrorHistogram) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["bin_left", "bin_right", "count"])
        for i in range(len(hist.counts)):
            w.writerow([hist.bin_edges[i], hist.bin_edges[i + 1], int(hist.counts[i])])


def write_confusion_csv(path, cm: ConfusionMatrix) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["true\\pred", *cm.labels, "accuracy"])
        for i, label in enumerate(cm.labels):
            w.writerow([label, *[int(c) for c in cm.counts[i]], ""])
        w.writerow(["total", "", "", "", cm.accuracy])


def write_training_curve_csv(path, record: TrainRecord) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["epoch", "train_mse", "val_mse", "test_mse", "gradient_norm"])
        for e in range(len(record.train_mse)):
            w.writerow([e, record.train_mse[e], record.val_mse[e], record.test_mse[e], record.gradient_norm[e]])


def write_growth_csv(path, growth: list[GrowthStep]) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow(["neurons", "train_mse", "val_mse"])
        for g in growth:
            w.writerow([g.neurons, g.train_mse, "" if g.val_mse is None else g.val_mse])


_SWEEP_GRID_COLUMN = {
    Family.MLP_HIDDEN: "hidden",
    Family.MLP_DIVIDE: "divide",
    Family.MLP_TRANSFER: "transfer",
    Family.MLP_LEARNING: "learning",
    Family.MLP_ALGO: "algorithm",
    Family.RBF_SPREAD: "spread",
    Family.GRNN_SIGMA: "sigma",
}


def write_sweep_csv(path, result: SweepResult) -> None:
    """Grid value, model size where applicable, best validation MSE, epoch."""
    grid_col = _SWEEP_GRID_COLUMN[result.family]
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow([grid_col, "hidden_neurons", "best_val_mse", "epoch", "train_mse", "seed", "selected", "error"])
        for i, r in enumerate(result.rows):
            w.writerow([
                r.grid_label,
                "" if r.hidden is None else r.hidden,
                r.best_val_mse,
                r.epoch_of_best,
                "" if r.train_mse is None else r.train_mse,
                r.seed,
                1 if i == result.selected else 0,
                r.error or "",
            ])


def write_comparison_csv(path, report: ComparisonReport) -> None:
    with _open(path) as fh:
        w = _writer(fh)
        w.writerow([
            "model", "train_rmse", "train_r", "train_r2", "train_mae",
            "test_rmse", "test_r", "test_r2", "test_mae",
        ])
        for fam in report.families:
            w.writerow([
                fam.name,
                fam.train.rmse, fam.train.r, fam.train.r2, fam.train.mae,
                fam.test.rmse, fam.test.r, fam.test.r2, fam.test.mae,
            ])


# ---------------------------------------------------------------------------
# figures


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    _plt().close(fig)


def training_curve_figure(record: TrainRecord, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    epochs = np.arange(len(record.train_mse))
    ax.semilogy(epochs, record.train_mse, label="train", color="tab:blue")
    ax.semilogy(epochs, record.val_mse, label="validation", color="tab:green")
    ax.semilogy(epochs, record.test_mse, label="test", color="tab:red")
    ax.axvline(record.best_epoch, color="gray", ls=":", lw=1,
               label=f"best epoch {record.best_epoch}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE")
    ax.set_title(f"training performance (stop: {record.stop_reason.value})")
    ax.legend()
    _save(fig, path)


def gradient_figure(record: TrainRecord, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.semilogy(np.arange(len(record.gradient_norm)), record.gradient_norm, color="tab:purple")
    ax.set_xlabel("epoch")
    ax.set_ylabel("gradient norm")
    ax.set_title("training state")
    _save(fig, path)


def regression_figure(parts: dict[str, RegressionPlotData], path) -> None:
    plt = _plt()
    n = len(parts)
    fig, axes = plt.subplots(1, n, figsize=(4 * n, 4), squeeze=False)
    for ax, (name, data) in zip(axes[0], parts.items()):
        ax.scatter(data.targets, data.outputs, s=12, alpha=0.6, edgecolors="none")
        lo = min(data.targets.min(), data.outputs.min())
        hi = max(data.targets.max(), data.outputs.max())
        span = np.array([lo, hi])
        ax.plot(span, span, "k--", lw=1, label="output = target")
        ax.plot(span, data.fit_slope * span + data.fit_intercept, "r-", lw=1.5, label="fit")
        ax.set_xlabel("target")
        ax.set_ylabel("output")
        ax.set_title(f"{name}: R = {data.r:.5f}")
        ax.legend(fontsize=8)
    _save(fig, path)


def histogram_figure(hist: ErrorHistogram, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    centers = (hist.bin_edges[:-1] + hist.bin_edges[1:]) / 2.0
    width = (hist.bin_edges[-1] - hist.bin_edges[0]) / len(hist.counts)
    ax.bar(centers, hist.counts, width=width * 0.95, color="tab:blue")
    ax.axvline(0.0, color="tab:orange", lw=1.5, label="zero error")
    ax.set_xlabel("error (target - output)")
    ax.set_ylabel("instances")
    ax.set_title(f"error histogram, {len(hist.counts)} bins "
                 f"[{hist.min_error:.5g}, {hist.max_error:.5g}]")
    ax.legend()
    _save(fig, path)


def growth_figure(growth: list[GrowthStep], path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    neurons = [g.neurons for g in growth]
    ax.semilogy(neurons, [g.train_mse for g in growth], label="train", color="tab:blue")
    if growth and growth[0].val_mse is not None:
        ax.semilogy(neurons, [g.val_mse for g in growth], label="validation", color="tab:green")
    ax.set_xlabel("neurons")
    ax.set_ylabel("MSE")
    ax.set_title("error variation while growing the network")
    ax.legend()
    _save(fig, path)


def sweep_figure(result: SweepResult, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.5, 4))
    labels = [r.grid_label for r in result.rows]
    values = [r.best_val_mse for r in result.rows]
    x = np.arange(len(labels))
    ax.plot(x, values, "o-", color="tab:blue")
    sel = result.selected
    ax.plot([sel], [values[sel]], "r*", ms=14, label=f"selected: {labels[sel]}")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_xlabel(_SWEEP_GRID_COLUMN[result.family])
    ax.set_ylabel("best validation MSE")
    ax.set_title(f"{result.family.value} sweep")
    ax.legend()
    _save(fig, path)


def comparison_figure(report: ComparisonReport, path) -> None:
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    names = [f.name for f in report.families]
    x = np.arange(len(names))
    for ax, which in zip(axes, ("train", "test")):
        rmse = [getattr(f, which).rmse for f in report.families]
        r2 = [getattr(f, which).r2 for f in report.families]
        ax.bar(x - 0.2, rmse, width=0.4, label="RMSE", color="tab:blue")
        ax.bar(x + 0.2, r2, width=0.4, label="R2", color="tab:green")
        ax.set_xticks(x)
        ax.set_xticklabels(names)
        ax.set_title(which)
        ax.legend()
    fig.suptitle("model comparison")
    _save(fig, path)
