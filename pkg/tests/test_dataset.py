import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rustcast.dataset import (
    CSV_HEADER,
    CoverageError,
    EmptyPartition,
    NormalizationParams,
    OverlapError,
    ParseError,
    RangeError,
    RawRecord,
    SchemaError,
    Severity,
    TooFewRows,
    VocabularyError,
    apply_normalizer,
    chronological_holdout,
    denormalize,
    encode,
    encode_with_vocab,
    fit_normalizer,
    load_csv,
    normalize,
    save_csv,
    split_by_index,
    split_block,
    split_random,
)
from rustcast.linalg import SeededRng


def record(year=2005, rainfall=100.0, tmax=25.0, tmin=8.0, tavg=16.0, rh=70.0,
           variety="Kubsa", severity=Severity.LOW):
    return RawRecord(year, rainfall, tmax, tmin, tavg, rh, variety, severity)


def write_csv(tmp_path, rows, header=None):
    path = tmp_path / "data.csv"
    lines = [",".join(header or CSV_HEADER)] + rows
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadCsv:
    def test_single_valid_row(self, tmp_path):
        path = write_csv(tmp_path, ["2005,100.0,25.0,8.0,16.0,70.0,Kubsa,low"])
        records = load_csv(path)
        assert len(records) == 1
        assert records[0].variety == "Kubsa"

    def test_case_insensitive_severity(self, tmp_path):
        path = write_csv(tmp_path, ["2005,100.0,25.0,8.0,16.0,70.0,Kubsa,HIGH"])
        assert load_csv(path)[0].severity is Severity.HIGH

    def test_humidity_out_of_range(self, tmp_path):
        path = write_csv(tmp_path, ["2005,100.0,25.0,8.0,16.0,150.0,Kubsa,low"])
        with pytest.raises(RangeError, match=":2:"):
            load_csv(path)

    def test_missing_column_is_schema_error(self, tmp_path):
        path = write_csv(tmp_path, [], header=CSV_HEADER[:-1])
        with pytest.raises(SchemaError):
            load_csv(path)

    def test_bad_float_reports_line(self, tmp_path):
        path = write_csv(tmp_path, [
            "2005,100.0,25.0,8.0,16.0,70.0,Kubsa,low",
            "2006,oops,25.0,8.0,16.0,70.0,Kubsa,low",
        ])
        with pytest.raises(ParseError, match=":3:"):
            load_csv(path)

    def test_unknown_severity(self, tmp_path):
        path = write_csv(tmp_path, ["2005,100.0,25.0,8.0,16.0,70.0,Kubsa,extreme"])
        with pytest.raises(ParseError):
            load_csv(path)

    def test_roundtrip_with_save(self, tmp_path):
        records = [record(year=2001 + i, rainfall=10.0 * i, severity=s)
                   for i, s in enumerate([Severity.LOW, Severity.MEDIUM, Severity.HIGH])]
        path = tmp_path / "rt.csv"
        save_csv(records, path)
        assert load_csv(path) == records


class TestEncode:
    def test_one_hot_rows(self):
        ds = encode([record(severity=Severity.HIGH), record(severity=Severity.MEDIUM),
                     record(severity=Severity.LOW)])
        assert ds.targets.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

    def test_variety_first_appearance_order(self):
        ds = encode([record(variety="Kubsa"), record(variety="Digalu"), record(variety="Kubsa")])
        assert ds.variety_vocab == ["Kubsa", "Digalu"]
        assert ds.features[:, 5].tolist() == [0.0, 1.0, 0.0]

    def test_every_row_exactly_one_hot(self):
        recs = [record(severity=s) for s in (Severity.LOW, Severity.HIGH, Severity.MEDIUM)] * 4
        ds = encode(recs)
        assert np.array_equal(np.sort(ds.targets, axis=1)[:, ::-1][:, 0], np.ones(12))
        assert np.allclose(ds.targets.sum(axis=1), 1.0)

    def test_encode_with_vocab_rejects_unknown(self):
        with pytest.raises(VocabularyError, match="Digalu"):
            encode_with_vocab([record(variety="Digalu")], ["Kubsa"])


class TestNormalization:
    def test_fit_single_row(self):
        ds = encode([record()])
        p = fit_normalizer(ds, [0])
        assert np.array_equal(p.min, p.max)

    def test_fit_min_max(self):
        ds = encode([record(rainfall=0.0), record(rainfall=10.0)])
        p = fit_normalizer(ds, [0, 1])
        assert p.min[0] == 0.0 and p.max[0] == 10.0

    def test_midpoint_and_endpoints(self):
        p = NormalizationParams(min=np.zeros(6), max=np.full(6, 10.0))
        assert normalize(np.full(6, 5.0), p).tolist() == [0.0] * 6
        assert normalize(np.zeros(6), p).tolist() == [-1.0] * 6
        assert normalize(np.full(6, 10.0), p).tolist() == [1.0] * 6

    def test_out_of_range_value(self):
        p = NormalizationParams(min=np.zeros(6), max=np.full(6, 10.0))
        assert normalize(np.full(6, 12.0), p)[0] == pytest.approx(1.4)

    def test_constant_column_maps_to_zero(self):
        p = NormalizationParams(min=np.full(6, 3.0), max=np.full(6, 3.0))
        assert normalize(np.full(6, 3.0), p).tolist() == [0.0] * 6
        assert denormalize(np.full(6, 0.7), p).tolist() == [3.0] * 6

    @given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=6, max_size=6))
    def test_roundtrip(self, values):
        p = NormalizationParams(min=np.array([-5.0, 0.0, 1.0, -2.0, 10.0, 0.0]),
                                max=np.array([5.0, 400.0, 1.0, 30.0, 95.0, 4.0]))
        x = np.array(values)
        back = denormalize(normalize(x, p), p)
        nz = p.max - p.min != 0
        assert np.all(np.abs(back[nz] - x[nz]) <= 1e-12 * np.maximum(1.0, np.abs(x[nz])))

    def test_train_rows_attain_both_endpoints(self):
        rng = np.random.default_rng(2)
        recs = [record(rainfall=float(r), rh=float(h))
                for r, h in zip(rng.uniform(0, 400, 30), rng.uniform(0, 100, 30))]
        ds = encode(recs)
        idx = list(range(20))
        nds = apply_normalizer(ds, fit_normalizer(ds, idx))
        train_rows = nds.features[idx]
        for col in range(6):
            if np.ptp(train_rows[:, col]) > 0:
                assert train_rows[:, col].min() == -1.0
                assert train_rows[:, col].max() == 1.0


class TestSplits:
    def test_canonical_sizes_at_100(self):
        s = split_random(100, (0.7, 0.15, 0.15), SeededRng(1))
        assert (len(s.train), len(s.val), len(s.test)) == (70, 15, 15)

    def test_floor_rule_at_10(self):
        s = split_random(10, (0.7, 0.15, 0.15), SeededRng(1))
        assert (len(s.train), len(s.val), len(s.test)) == (8, 1, 1)

    def test_deterministic(self):
        a = split_random(50, (0.7, 0.15, 0.15), SeededRng(7))
        b = split_random(50, (0.7, 0.15, 0.15), SeededRng(7))
        for pa, pb in zip((a.train, a.val, a.test), (b.train, b.val, b.test)):
            assert np.array_equal(pa, pb)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            split_random(2, (0.7, 0.15, 0.15), SeededRng(0))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=3, max_value=500))
    def test_disjoint_and_exhaustive(self, n):
        s = split_random(n, (0.7, 0.15, 0.15), SeededRng(n))
        joined = np.concatenate([s.train, s.val, s.test])
        assert np.array_equal(np.sort(joined), np.arange(n))

    def test_sorted_ascending(self):
        s = split_random(30, (0.7, 0.15, 0.15), SeededRng(3))
        for part in (s.train, s.val, s.test):
            assert np.array_equal(part, np.sort(part))

    def test_split_by_index_valid(self):
        s = split_by_index([0, 1], [2], [3], n=4)
        assert s.train.tolist() == [0, 1]

    def test_split_by_index_overlap(self):
        with pytest.raises(OverlapError):
            split_by_index([0, 1], [1], [2, 3], n=4)

    def test_split_by_index_coverage(self):
        with pytest.raises(CoverageError):
            split_by_index([0, 1], [2], [], n=4)

    def test_split_block_is_contiguous(self):
        s = split_block(10, (0.7, 0.15, 0.15))
        assert s.train.tolist() == list(range(8))
        assert s.val.tolist() == [8]
        assert s.test.tolist() == [9]


class TestChronologicalHoldout:
    def test_split_at_cutoff(self):
        recs = [record(year=2016), record(year=2017)]
        dev, held = chronological_holdout(recs, 2016)
        assert [r.year for r in dev] == [2016]
        assert [r.year for r in held] == [2017]

    def test_empty_holdout(self):
        with pytest.raises(EmptyPartition):
            chronological_holdout([record(year=2010)], 2016)

    def test_empty_dev(self):
        with pytest.raises(EmptyPartition):
            chronological_holdout([record(year=2018)], 2016)
