import json

import numpy as np
import pytest

from rustcast.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "d.csv"
    assert main(["generate", "--rows", "80", "--seed", "7", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def mlp_model(tmp_path_factory, data_csv):
    path = tmp_path_factory.mktemp("model") / "mlp.json"
    code = main(["train", "--family", "mlp", "--data", str(data_csv), "--out", str(path),
                 "--hidden", "5", "--max-epochs", "40", "--seed", "3"])
    assert code == 0
    return path


class TestGenerate:
    def test_row_count_and_header(self, tmp_path, capsys):
        out_path = tmp_path / "g.csv"
        code, out, _ = run(capsys, "generate", "--rows", "30", "--seed", "1",
                           "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 31  # header + 30 rows
        assert lines[0] == "year,rainfall_mm,tmax_c,tmin_c,tavg_c,rh_pct,variety,severity"
        assert "30 rows" in out

    def test_missing_out_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--rows", "10"])
        assert exc.value.code == 2

    def test_too_few_rows_is_runtime_error(self, tmp_path, capsys):
        code, _, err = run(capsys, "generate", "--rows", "2", "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "n_rows" in err

    def test_byte_identical_reruns(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "generate", "--rows", "25", "--seed", "9", "--out", str(a))
        run(capsys, "generate", "--rows", "25", "--seed", "9", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestTrain:
    def test_mlp_model_file(self, mlp_model):
        doc = json.loads(mlp_model.read_text())
        assert doc["family"] == "mlp"
        assert doc["payload"]["n_hidden"] == 5
        assert doc["format_version"] == 1
        assert "train_record" in doc

    def test_prints_fixed_format_table(self, data_csv, tmp_path, capsys):
        code, out, _ = run(capsys, "train", "--family", "grnn", "--data", str(data_csv),
                           "--out", str(tmp_path / "g.json"), "--sigma", "0.15")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("partition")
        assert lines[1].startswith("train") and lines[2].startswith("val")
        assert lines[3].startswith("test")

    def test_rbf_spread_recorded(self, data_csv, tmp_path, capsys):
        out_path = tmp_path / "r.json"
        code, _, _ = run(capsys, "train", "--family", "rbf", "--data", str(data_csv),
                         "--out", str(out_path), "--spread", "0.2", "--max-neurons", "20")
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["payload"]["spread"] == 0.2
        assert doc["family"] == "rbf"
        assert "growth" in doc

    def test_grnn_sigma_recorded(self, data_csv, tmp_path, capsys):
        out_path = tmp_path / "g.json"
        code, _, _ = run(capsys, "train", "--family", "grnn", "--data", str(data_csv),
                         "--out", str(out_path), "--sigma", "0.1")
        assert code == 0
        assert json.loads(out_path.read_text())["payload"]["sigma"] == 0.1

    def test_cutoff_year_holdout_row(self, data_csv, tmp_path, capsys):
        code, out, _ = run(capsys, "train", "--family", "grnn", "--data", str(data_csv),
                           "--out", str(tmp_path / "h.json"), "--cutoff-year", "2016")
        assert code == 0
        assert "holdout" in out

    def test_model_reruns_byte_identical(self, data_csv, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            run(capsys, "train", "--family", "mlp", "--data", str(data_csv),
                "--out", str(path), "--hidden", "4", "--max-epochs", "25", "--seed", "5")
        assert a.read_bytes() == b.read_bytes()


class TestEval:
    def test_replay_matches_training_summary(self, data_csv, mlp_model, tmp_path, capsys):
        code, train_out, _ = run(capsys, "train", "--family", "mlp", "--data", str(data_csv),
                                 "--out", str(tmp_path / "m.json"), "--hidden", "5",
                                 "--max-epochs", "40", "--seed", "3")
        code, eval_out, _ = run(capsys, "eval", "--model", str(tmp_path / "m.json"),
                                "--data", str(data_csv), "--outdir", str(tmp_path / "ev"),
                                "--no-figures")
        assert code == 0
        train_lines = {l.split()[0]: l for l in train_out.splitlines()[1:4]}
        eval_lines = {l.split()[0]: l for l in eval_out.splitlines() if l.split() and l.split()[0] in train_lines}
        for part in ("train", "val", "test"):
            assert train_lines[part] == eval_lines[part]

    def test_histogram_has_20_rows(self, data_csv, mlp_model, tmp_path, capsys):
        outdir = tmp_path / "ev"
        code, _, _ = run(capsys, "eval", "--model", str(mlp_model), "--data", str(data_csv),
                         "--outdir", str(outdir), "--no-figures")
        assert code == 0
        hist = (outdir / "histogram.csv").read_text().splitlines()
        assert hist[0] == "bin_left,bin_right,count"
        assert len(hist) == 21

    def test_emits_artifacts_and_figures(self, data_csv, mlp_model, tmp_path, capsys):
        outdir = tmp_path / "evf"
        code, _, _ = run(capsys, "eval", "--model", str(mlp_model), "--data", str(data_csv),
                         "--outdir", str(outdir))
        assert code == 0
        for name in ("metrics.csv", "regression_points.csv", "regression_fit.csv",
                     "histogram.csv", "confusion.csv", "training_curve.csv",
                     "regression.png", "histogram.png", "training_curve.png", "gradient.png"):
            assert (outdir / name).exists(), name

    def test_unknown_variety_names_label(self, mlp_model, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "year,rainfall_mm,tmax_c,tmin_c,tavg_c,rh_pct,variety,severity\n"
            "2005,100.0,25.0,8.0,16.0,70.0,Mystery,low\n"
        )
        code, _, err = run(capsys, "eval", "--model", str(mlp_model), "--data", str(bad),
                           "--outdir", str(tmp_path / "ev"), "--no-figures")
        assert code == 1
        assert "Mystery" in err

    def test_eval_reruns_byte_identical(self, data_csv, mlp_model, tmp_path, capsys):
        d1, d2 = tmp_path / "e1", tmp_path / "e2"
        for d in (d1, d2):
            run(capsys, "eval", "--model", str(mlp_model), "--data", str(data_csv),
                "--outdir", str(d), "--no-figures")
        for name in ("metrics.csv", "regression_points.csv", "histogram.csv", "confusion.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


class TestPredict:
    def test_single_row_prints_class_and_vector(self, mlp_model, capsys):
        code, out, _ = run(capsys, "predict", "--model", str(mlp_model),
                           "--rainfall", "150", "--tmax", "25", "--tmin", "8",
                           "--tavg", "16", "--rh", "80", "--variety", "Kubsa")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "class,y_high,y_medium,y_low"
        label, *vec = lines[1].split(",")
        assert label in {"low", "medium", "high"}
        assert len(vec) == 3 and all(np.isfinite(float(v)) for v in vec)

    def test_batch_csv_prediction_lines(self, data_csv, mlp_model, capsys):
        code, out, _ = run(capsys, "predict", "--model", str(mlp_model), "--data", str(data_csv))
        assert code == 0
        assert len(out.splitlines()) == 1 + 80  # header + one line per row

    def test_malformed_feature_value_exit_2(self, mlp_model):
        with pytest.raises(SystemExit) as exc:
            main(["predict", "--model", str(mlp_model), "--rainfall", "abc",
                  "--tmax", "25", "--tmin", "8", "--tavg", "16", "--rh", "80",
                  "--variety", "Kubsa"])
        assert exc.value.code == 2

    def test_malformed_batch_cell_exit_2(self, mlp_model, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(
            "rainfall_mm,tmax_c,tmin_c,tavg_c,rh_pct,variety\n"
            "oops,25.0,8.0,16.0,70.0,Kubsa\n"
        )
        code, _, err = run(capsys, "predict", "--model", str(mlp_model), "--data", str(bad))
        assert code == 2
        assert ":2:" in err

    def test_missing_flags_usage_error(self, mlp_model):
        with pytest.raises(SystemExit) as exc:
            main(["predict", "--model", str(mlp_model), "--rainfall", "10"])
        assert exc.value.code == 2

    def test_roundtrip_model_predictions_match(self, data_csv, mlp_model, tmp_path, capsys):
        _, out1, _ = run(capsys, "predict", "--model", str(mlp_model), "--data", str(data_csv))
        _, out2, _ = run(capsys, "predict", "--model", str(mlp_model), "--data", str(data_csv))
        assert out1 == out2


class TestSweepCommand:
    def test_grnn_sigma_table_10_rows(self, data_csv, tmp_path, capsys):
        outdir = tmp_path / "s"
        code, _, _ = run(capsys, "sweep", "--family", "grnn-sigma", "--data", str(data_csv),
                         "--outdir", str(outdir), "--jobs", "1", "--no-figures")
        assert code == 0
        table = (outdir / "sweep_grnn-sigma.csv").read_text().splitlines()
        assert len(table) == 11  # header + 10
        assert (outdir / "selected_grnn-sigma.json").exists()

    def test_sweep_figure_rendered(self, data_csv, tmp_path, capsys):
        outdir = tmp_path / "sf"
        code, _, _ = run(capsys, "sweep", "--family", "grnn-sigma", "--data", str(data_csv),
                         "--outdir", str(outdir), "--jobs", "1")
        assert code == 0
        assert (outdir / "sweep_grnn-sigma.png").exists()

    def test_sweep_reruns_byte_identical(self, data_csv, tmp_path, capsys):
        d1, d2 = tmp_path / "s1", tmp_path / "s2"
        for d in (d1, d2):
            run(capsys, "sweep", "--family", "mlp-hidden", "--data", str(data_csv),
                "--outdir", str(d), "--jobs", "1", "--no-figures", "--reps", "1",
                "--max-epochs", "15")
        assert (d1 / "sweep_mlp-hidden.csv").read_bytes() == (d2 / "sweep_mlp-hidden.csv").read_bytes()
        assert (d1 / "selected_mlp-hidden.json").read_bytes() == (d2 / "selected_mlp-hidden.json").read_bytes()


class TestCompareCommand:
    def test_comparison_schema(self, data_csv, tmp_path, capsys):
        outdir = tmp_path / "c"
        code, out, _ = run(capsys, "compare", "--data", str(data_csv), "--outdir", str(outdir),
                           "--max-epochs", "40", "--max-neurons", "20", "--no-figures")
        assert code == 0
        table = (outdir / "comparison.csv").read_text().splitlines()
        assert table[0] == ("model,train_rmse,train_r,train_r2,train_mae,"
                            "test_rmse,test_r,test_r2,test_mae")
        assert [row.split(",")[0] for row in table[1:]] == ["mlp", "rbf", "grnn"]
        assert all(len(row.split(",")) == 9 for row in table[1:])


class TestModelDataMismatch:
    def test_missing_file_is_runtime_error(self, capsys):
        code, _, err = run(capsys, "eval", "--model", "nope.json", "--data", "nope.csv",
                           "--outdir", "x")
        assert code == 1
