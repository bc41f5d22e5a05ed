import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rustcast.dataset import Dataset, EmptyInput
from rustcast.grnn import GrnnModel, NonPositiveSigma, predict_grnn, train_grnn
from rustcast.linalg import SeededRng


def make_dataset(n, seed=0):
    rng = SeededRng(seed)
    x = np.array([[rng.uniform(-1, 1) for _ in range(6)] for _ in range(n)])
    t = np.array([[rng.uniform(0, 1) for _ in range(3)] for _ in range(n)])
    return Dataset(features=x, targets=t)


class TestTrainGrnn:
    def test_stores_patterns_verbatim(self):
        ds = make_dataset(10)
        model = train_grnn(ds, list(range(10)), sigma=0.3)
        assert model.patterns.shape == (10, 6)
        assert np.array_equal(model.patterns, ds.features)
        assert np.array_equal(model.targets, ds.targets)

    def test_sigma_zero_rejected(self):
        ds = make_dataset(5)
        with pytest.raises(NonPositiveSigma):
            train_grnn(ds, [0, 1], sigma=0.0)

    def test_empty_train_idx(self):
        ds = make_dataset(5)
        with pytest.raises(EmptyInput):
            train_grnn(ds, [], sigma=0.1)

    def test_training_twice_identical(self):
        ds = make_dataset(8)
        a = train_grnn(ds, list(range(8)), 0.2)
        b = train_grnn(ds, list(range(8)), 0.2)
        assert np.array_equal(a.patterns, b.patterns)
        assert a.sigma == b.sigma


class TestPredictGrnn:
    def test_single_pattern_dominates(self):
        ds = make_dataset(1)
        model = train_grnn(ds, [0], sigma=0.5)
        for probe in (np.zeros(6), np.full(6, 3.0)):
            assert np.allclose(predict_grnn(model, probe), ds.targets[0])

    def test_equidistant_average(self):
        x = np.zeros((2, 6))
        x[0, 0] = 1.0
        x[1, 0] = -1.0
        t = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        model = GrnnModel(patterns=x, targets=t, sigma=0.7)
        mid = predict_grnn(model, np.zeros(6))
        assert np.allclose(mid, t.mean(axis=0))

    def test_flat_kernel_limit(self):
        ds = make_dataset(20, seed=1)
        model = train_grnn(ds, list(range(20)), sigma=1e6)
        pred = predict_grnn(model, ds.features[3])
        assert np.abs(pred - ds.targets.mean(axis=0)).max() < 1e-6

    def test_sharp_kernel_recovers_stored_target(self):
        ds = make_dataset(15, seed=2)
        model = train_grnn(ds, list(range(15)), sigma=1e-4)
        for i in (0, 7, 14):
            pred = predict_grnn(model, ds.features[i])
            assert np.abs(pred - ds.targets[i]).max() < 1e-9

    def test_underflow_falls_back_to_target_mean(self):
        ds = make_dataset(6, seed=3)
        model = train_grnn(ds, list(range(6)), sigma=1e-300)
        far = predict_grnn(model, np.full(6, 500.0))
        assert np.allclose(far, ds.targets.mean(axis=0))

    def test_permutation_invariance(self):
        ds = make_dataset(12, seed=4)
        model = train_grnn(ds, list(range(12)), sigma=0.4)
        perm = np.arange(12)[::-1]
        shuffled = GrnnModel(patterns=model.patterns[perm], targets=model.targets[perm], sigma=0.4)
        probes = make_dataset(5, seed=5).features
        assert np.allclose(predict_grnn(model, probes), predict_grnn(shuffled, probes))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0.01, max_value=100.0),
           st.integers(min_value=0, max_value=10_000))
    def test_outputs_inside_target_hull(self, sigma, probe_seed):
        ds = make_dataset(9, seed=6)
        model = train_grnn(ds, list(range(9)), sigma=sigma)
        rng = SeededRng(probe_seed)
        probe = np.array([rng.uniform(-3, 3) for _ in range(6)])
        pred = predict_grnn(model, probe)
        lo = ds.targets.min(axis=0) - 1e-12
        hi = ds.targets.max(axis=0) + 1e-12
        assert np.all(pred >= lo) and np.all(pred <= hi)

    def test_batch_and_single_agree(self):
        ds = make_dataset(10, seed=7)
        model = train_grnn(ds, list(range(10)), sigma=0.3)
        probes = make_dataset(4, seed=8).features
        batch = predict_grnn(model, probes)
        for i in range(4):
            assert np.allclose(predict_grnn(model, probes[i]), batch[i])
