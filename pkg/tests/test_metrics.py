import numpy as np
import pytest

from rustcast.dataset import Severity
from rustcast.metrics import (
    DegenerateTargets,
    EmptyInput,
    LengthMismatch,
    ShapeMismatch,
    compute_metrics,
    confusion,
    error_histogram,
    regression_plot,
)


class TestComputeMetrics:
    def test_perfect_fit(self):
        t = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        m = compute_metrics(t.copy(), t)
        assert m.mse == 0.0 and m.rmse == 0.0 and m.mae == 0.0
        assert m.r == pytest.approx(1.0, abs=1e-12)
        assert m.r2 == 1.0

    def test_single_row_rejected(self):
        with pytest.raises(ShapeMismatch):
            compute_metrics(np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 0.0, 0.0]]))

    def test_hand_counted_third(self):
        out = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        t = np.zeros((2, 3))
        with pytest.raises(DegenerateTargets):
            compute_metrics(out, t)  # all-zero targets have no variance
        t = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        m = compute_metrics(np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 1.0]]), t)
        assert m.mse == pytest.approx(1 / 3)

    def test_pearson_hand_value(self):
        # flattened y=(1,2,3,4), t=(2,4,5,4): r = 3.5 / sqrt(5 * 4.75)
        y = np.array([[1.0, 2.0], [3.0, 4.0]])
        t = np.array([[2.0, 4.0], [5.0, 4.0]])
        m = compute_metrics(y, t)
        assert m.r == pytest.approx(3.5 / np.sqrt(5 * 4.75), abs=1e-12)
        assert m.r == pytest.approx(0.7182, abs=1e-4)

    def test_rmse_squared_is_mse(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            t = rng.normal(size=(10, 3))
            y = rng.normal(size=(10, 3))
            m = compute_metrics(y, t)
            assert m.rmse ** 2 == pytest.approx(m.mse, rel=1e-12)

    def test_r_affine_invariance(self):
        rng = np.random.default_rng(1)
        t = rng.normal(size=(20, 3))
        y = rng.normal(size=(20, 3))
        base = compute_metrics(y, t).r
        for a, b in [(2.0, 1.0), (0.3, -5.0), (17.0, 0.0)]:
            assert abs(compute_metrics(a * y + b, t).r - base) < 1e-9

    def test_r2_is_one_minus_sse_over_sst(self):
        t = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]])
        m = compute_metrics(y, t)
        sst = float(((t - t.mean()) ** 2).sum())
        sse = float(((t - y) ** 2).sum())
        assert m.r2 == pytest.approx(1 - sse / sst, rel=1e-12)

    def test_r2_drops_with_noise(self):
        rng = np.random.default_rng(2)
        t = rng.normal(size=(50, 3))
        clean = compute_metrics(t, t).r2
        noisy = compute_metrics(t + rng.normal(scale=0.5, size=t.shape), t).r2
        assert noisy < clean == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            compute_metrics(np.zeros((3, 3)), np.zeros((3, 2)))

    def test_mbe_sign_convention(self):
        t = np.zeros((2, 2))
        y = np.full((2, 2), 0.5)
        t[0, 0] = 1.0  # give targets variance
        m = compute_metrics(y, t)
        assert m.mbe == pytest.approx(np.mean(y - t))


class TestErrorHistogram:
    def test_twenty_residuals_one_per_bin(self):
        # residual k lands in bin k: use bin centers of [0, 20)
        targets = (np.arange(20, dtype=float) + 0.5)[:, None]
        outputs = np.zeros((20, 1))
        h = error_histogram(outputs, targets)
        assert h.counts.tolist() == [1] * 20
        assert len(h.bin_edges) == 21

    def test_all_zero_residuals_padded(self):
        t = np.ones((4, 3))
        h = error_histogram(t.copy(), t)
        assert h.counts.sum() == 12
        assert (h.counts > 0).sum() == 1
        assert h.bin_edges[0] < 0.0 < h.bin_edges[-1]

    def test_counts_conserve_total(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = rng.integers(1, 40)
            t = rng.normal(size=(n, 3))
            y = rng.normal(size=(n, 3))
            h = error_histogram(y, t)
            assert h.counts.sum() == n * 3

    def test_edges_span_min_max(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=(30, 3))
        y = rng.normal(size=(30, 3))
        h = error_histogram(y, t)
        resid = (t - y).ravel()
        assert h.bin_edges[0] == pytest.approx(resid.min())
        assert h.bin_edges[-1] == pytest.approx(resid.max())
        assert h.min_error == resid.min() and h.max_error == resid.max()

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            error_histogram(np.empty((0, 3)), np.empty((0, 3)))


class TestRegressionPlot:
    def test_identity_fit(self):
        t = np.array([[0.0, 1.0], [1.0, 0.0]])
        d = regression_plot(t.copy(), t)
        assert d.fit_slope == pytest.approx(1.0)
        assert d.fit_intercept == pytest.approx(0.0)
        assert d.r == pytest.approx(1.0, abs=1e-12)

    def test_affine_image(self):
        t = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.25]])
        d = regression_plot(2 * t + 1, t)
        assert d.fit_slope == pytest.approx(2.0)
        assert d.fit_intercept == pytest.approx(1.0)
        assert d.r == pytest.approx(1.0, abs=1e-12)

    def test_anticorrelated(self):
        t = np.array([[0.0], [1.0], [2.0]])
        d = regression_plot(-t, t)
        assert d.r == pytest.approx(-1.0, abs=1e-12)

    def test_degenerate_targets(self):
        with pytest.raises(DegenerateTargets):
            regression_plot(np.array([[1.0], [2.0]]), np.ones((2, 1)))


class TestConfusion:
    def test_all_correct_diagonal(self):
        classes = [Severity.HIGH, Severity.MEDIUM, Severity.LOW, Severity.HIGH]
        cm = confusion(classes, classes)
        assert cm.accuracy == 1.0
        assert np.array_equal(cm.counts, np.diag([2, 1, 1]))

    def test_single_misprediction(self):
        cm = confusion([Severity.LOW], [Severity.HIGH])
        assert cm.counts[Severity.HIGH.value, Severity.LOW.value] == 1
        assert cm.accuracy == 0.0

    def test_accuracy_is_trace_over_total(self):
        rng = np.random.default_rng(5)
        pred = [Severity(int(v)) for v in rng.integers(0, 3, 60)]
        true = [Severity(int(v)) for v in rng.integers(0, 3, 60)]
        cm = confusion(pred, true)
        assert cm.accuracy == pytest.approx(np.trace(cm.counts) / 60)
        assert cm.counts.sum() == 60

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion([Severity.LOW], [Severity.LOW, Severity.HIGH])
