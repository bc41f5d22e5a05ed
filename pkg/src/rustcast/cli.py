"""Command-line entry point.

Subcommands: generate (synthetic CSV), train (fit + persist one model),
sweep (grid experiments incl. the five-stage MLP search), eval (metrics and
plot artifacts for a saved model), predict (single row or batch CSV), and
compare (three-family report).

Exit codes: 0 success, 1 runtime failure, 2 usage or parse error. All
randomness flows through --seed, so repeating a command with identical flags
reproduces its data outputs byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from . import report
from .dataset import (
    ParseError,
    SchemaError,
    Severity,
    SplitIndices,
    VocabularyError,
    apply_normalizer,
    chronological_holdout,
    encode,
    encode_features,
    encode_with_vocab,
    fit_normalizer,
    load_csv,
    save_csv,
    split_random,
)
from .grnn import train_grnn
from .linalg import SeededRng
from .metrics import compute_metrics, confusion, error_histogram, regression_plot
from .mlp import Algo, TrainConfig, Transfer, init_network, train
from .persist import ModelBundle, load_model, predict_outputs, save_model
from .rbfnn import RbfTrainConfig, train_rbf
from .sweep import (
    DEFAULT_RATIOS,
    Family,
    MlpDesign,
    SweepSpec,
    compare_models,
    run_sweep,
    staged_mlp_search,
)
from .synthgen import SynthConfig, generate

PREDICT_COLUMNS = ["rainfall_mm", "tmax_c", "tmin_c", "tavg_c", "rh_pct", "variety"]


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _default_jobs() -> int:
    import os

    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# shared pipeline helpers


def _prepare(records, seed: int, cutoff_year: int | None):
    """Encode all rows, optionally hold out years beyond the cutoff, and
    split the development rows 70/15/15 at the given seed.

    Returns (dataset, split with dataset-global indices, holdout index array).
    """
    data = encode(records)
    n = len(records)
    if cutoff_year is None:
        dev_idx = np.arange(n)
        hold_idx = np.array([], dtype=np.int64)
    else:
        chronological_holdout(records, cutoff_year)  # validates both sides non-empty
        years = np.array([r.year for r in records])
        dev_idx = np.flatnonzero(years <= cutoff_year)
        hold_idx = np.flatnonzero(years > cutoff_year)
    local = split_random(len(dev_idx), DEFAULT_RATIOS, SeededRng(seed))
    split = SplitIndices(
        train=dev_idx[local.train], val=dev_idx[local.val], test=dev_idx[local.test]
    )
    return data, split, hold_idx


def _partition_metrics(bundle_outputs, targets, idx):
    outs = bundle_outputs[idx]
    targs = targets[idx]
    m = compute_metrics(outs, targs)
    pred = [Severity(int(k)) for k in np.argmax(outs, axis=1)]
    true = [Severity(int(k)) for k in np.argmax(targs, axis=1)]
    acc = confusion(pred, true).accuracy
    return m, acc


_METRICS_HEADER = f"{'partition':<10s} {'n':>6s} {'mse':>10s} {'rmse':>10s} {'mae':>10s} {'r':>9s} {'r2':>9s} {'accuracy':>9s}"


def _metrics_line(name, m, acc) -> str:
    return (
        f"{name:<10s} {m.n:>6d} {m.mse:>10.6f} {m.rmse:>10.6f} {m.mae:>10.6f} "
        f"{m.r:>9.5f} {m.r2:>9.5f} {acc:>9.5f}"
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    cfg = SynthConfig(
        n_rows=args.rows,
        year_range=(args.year_start, args.year_end),
        n_varieties=args.varieties,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    records = generate(cfg)
    save_csv(records, args.out)
    counts = {s: 0 for s in Severity}
    for r in records:
        counts[r.severity] += 1
    balance = ", ".join(f"{s.label}={counts[s]}" for s in (Severity.LOW, Severity.MEDIUM, Severity.HIGH))
    print(f"wrote {len(records)} rows to {args.out} ({balance})")
    return 0


def cmd_train(args) -> int:
    records = load_csv(args.data)
    data, split, hold_idx = _prepare(records, args.seed, args.cutoff_year)
    norm = fit_normalizer(data, split.train)
    nds = apply_normalizer(data, norm)

    config: dict = {"family": args.family, "seed": args.seed}
    train_record = None
    growth = None
    if args.family == "mlp":
        f_hidden = Transfer.parse(args.hidden_fn)
        f_out = Transfer.parse(args.out_fn)
        algo = Algo.parse(args.algo)
        cfg = TrainConfig(
            algorithm=algo,
            max_epochs=args.max_epochs,
            goal_mse=args.goal_mse,
            patience=args.patience,
            learning_rate=args.lr,
            momentum=args.momentum,
            rng_seed=args.seed,
        )
        net = init_network(6, args.hidden, 3, f_hidden, f_out, SeededRng(args.seed))
        model, train_record = train(net, nds, split, cfg)
        config.update(
            hidden=args.hidden, algo=algo.value, hidden_fn=f_hidden.value, out_fn=f_out.value,
            max_epochs=args.max_epochs, goal_mse=args.goal_mse, patience=args.patience,
            learning_rate=args.lr, momentum=args.momentum,
        )
    elif args.family == "rbf":
        cfg = RbfTrainConfig(spread=args.spread, goal_mse=args.goal_mse, max_neurons=args.max_neurons)
        model, growth = train_rbf(nds, split.train, cfg, val_idx=split.val)
        config.update(spread=args.spread, goal_mse=args.goal_mse,
                      max_neurons=args.max_neurons, neurons=model.n_neurons)
    elif args.family == "grnn":
        model = train_grnn(nds, split.train, args.sigma)
        config.update(sigma=args.sigma)
    else:  # pragma: no cover - argparse choices guard this
        raise ValueError(f"unknown family {args.family!r}")

    bundle = ModelBundle(
        family=args.family,
        model=model,
        normalizer=norm,
        vocab=data.variety_vocab,
        config=config,
        metadata={
            "seed": args.seed,
            "ratios": list(DEFAULT_RATIOS),
            "cutoff_year": args.cutoff_year,
            "n_rows": len(records),
            "data_sha256": _sha256(args.data),
        },
        train_record=train_record,
        growth=growth,
    )

    outputs = predict_outputs(bundle, nds.features)
    print(_METRICS_HEADER)
    parts = [("train", split.train), ("val", split.val), ("test", split.test)]
    if hold_idx.size:
        parts.append(("holdout", hold_idx))
    final_metrics = {}
    for name, idx in parts:
        m, acc = _partition_metrics(outputs, nds.targets, idx)
        final_metrics[name] = {"mse": m.mse, "rmse": m.rmse, "mae": m.mae, "r": m.r, "r2": m.r2,
                               "accuracy": acc}
        print(_metrics_line(name, m, acc))
    bundle.metadata["final_metrics"] = final_metrics
    save_model(bundle, args.out)
    print(f"saved {args.family} model to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    records = load_csv(args.data)
    data = encode(records)
    split = split_random(data.n_rows, DEFAULT_RATIOS, SeededRng(args.seed))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs is not None else _default_jobs()

    if args.family == "mlp-staged":
        design, _, results = staged_mlp_search(
            data, split, base_seed=args.seed, repetitions=args.reps,
            max_epochs=args.max_epochs, jobs=jobs,
        )
        stage_names = ["hidden", "divide", "transfer", "learning", "algorithm"]
        for i, (name, res) in enumerate(zip(stage_names, results), start=1):
            table = outdir / f"staged_{i}_{name}.csv"
            report.write_sweep_csv(table, res)
            if not args.no_figures:
                report.sweep_figure(res, outdir / f"staged_{i}_{name}.png")
            sel = res.selected_row
            print(f"stage {i} ({name}): selected {sel.grid_label} "
                  f"(val MSE {sel.best_val_mse:.6f}) -> {table}")
        selected = {
            "family": "mlp-staged",
            "hidden": design.n_hidden,
            "divide": design.divide,
            "hidden_fn": design.f_hidden.value,
            "out_fn": design.f_out.value,
            "momentum": design.momentum,
            "algo": design.algorithm.value,
        }
        sel_path = outdir / "selected_mlp-staged.json"
        sel_path.write_text(json.dumps(selected, indent=2) + "\n", encoding="utf-8")
        print(f"final configuration -> {sel_path}")
        return 0

    family = Family(args.family)
    design = MlpDesign(
        n_hidden=args.hidden,
        f_hidden=Transfer.parse(args.hidden_fn),
        f_out=Transfer.parse(args.out_fn),
        algorithm=Algo.parse(args.algo),
    )
    spec = SweepSpec(
        family=family, design=design, repetitions=args.reps, base_seed=args.seed,
        max_epochs=args.max_epochs, rbf_max_neurons=args.max_neurons,
    )
    result = run_sweep(spec, data, split, jobs=jobs)
    table = outdir / f"sweep_{family.value}.csv"
    report.write_sweep_csv(table, result)
    if not args.no_figures:
        report.sweep_figure(result, outdir / f"sweep_{family.value}.png")
    sel = result.selected_row
    selected = {
        "family": family.value,
        "grid_value": sel.grid_label,
        "best_val_mse": sel.best_val_mse,
        "epoch": sel.epoch_of_best,
        "seed": sel.seed,
    }
    sel_path = outdir / f"selected_{family.value}.json"
    sel_path.write_text(json.dumps(selected, indent=2) + "\n", encoding="utf-8")
    print(f"{len(result.rows)} rows -> {table}")
    print(f"selected {sel.grid_label} (val MSE {sel.best_val_mse:.6f}) -> {sel_path}")
    return 0


def _rebuild_split(bundle: ModelBundle, records) -> tuple[SplitIndices, np.ndarray] | None:
    meta = bundle.metadata
    if meta.get("n_rows") != len(records):
        return None
    seed = meta.get("seed")
    ratios = meta.get("ratios")
    if seed is None or ratios is None:
        return None
    cutoff = meta.get("cutoff_year")
    n = len(records)
    if cutoff is None:
        dev_idx = np.arange(n)
        hold_idx = np.array([], dtype=np.int64)
    else:
        years = np.array([r.year for r in records])
        dev_idx = np.flatnonzero(years <= cutoff)
        hold_idx = np.flatnonzero(years > cutoff)
        if dev_idx.size == 0:
            return None
    local = split_random(len(dev_idx), tuple(ratios), SeededRng(seed))
    return (
        SplitIndices(train=dev_idx[local.train], val=dev_idx[local.val], test=dev_idx[local.test]),
        hold_idx,
    )


def cmd_eval(args) -> int:
    bundle = load_model(args.model)
    records = load_csv(args.data)
    data = encode_with_vocab(records, bundle.vocab)
    nds = apply_normalizer(data, bundle.normalizer)
    outputs = predict_outputs(bundle, nds.features)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    parts: list[tuple[str, np.ndarray]] = [("overall", np.arange(data.n_rows))]
    if _sha256(args.data) == bundle.metadata.get("data_sha256"):
        rebuilt = _rebuild_split(bundle, records)
        if rebuilt is not None:
            split, hold_idx = rebuilt
            parts += [("train", split.train), ("val", split.val), ("test", split.test)]
            if hold_idx.size:
                parts.append(("holdout", hold_idx))

    metric_rows = []
    regressions = {}
    print(_METRICS_HEADER)
    for name, idx in parts:
        m, acc = _partition_metrics(outputs, nds.targets, idx)
        metric_rows.append((name, m, acc))
        regressions[name] = regression_plot(outputs[idx], nds.targets[idx])
        print(_metrics_line(name, m, acc))

    report.write_metrics_csv(outdir / "metrics.csv", metric_rows)
    report.write_regression_csv(outdir / "regression_points.csv", regressions)
    report.write_regression_fit_csv(outdir / "regression_fit.csv", regressions)
    hist = error_histogram(outputs, nds.targets)
    report.write_histogram_csv(outdir / "histogram.csv", hist)
    pred = [Severity(int(k)) for k in np.argmax(outputs, axis=1)]
    true = [Severity(int(k)) for k in np.argmax(nds.targets, axis=1)]
    cm = confusion(pred, true)
    report.write_confusion_csv(outdir / "confusion.csv", cm)
    if bundle.train_record is not None:
        report.write_training_curve_csv(outdir / "training_curve.csv", bundle.train_record)
    if bundle.growth is not None:
        report.write_growth_csv(outdir / "growth.csv", bundle.growth)
    if not args.no_figures:
        report.regression_figure(regressions, outdir / "regression.png")
        report.histogram_figure(hist, outdir / "histogram.png")
        if bundle.train_record is not None:
            report.training_curve_figure(bundle.train_record, outdir / "training_curve.png")
            report.gradient_figure(bundle.train_record, outdir / "gradient.png")
        if bundle.growth is not None:
            report.growth_figure(bundle.growth, outdir / "growth.png")
    print(f"report written to {outdir}")
    return 0


def _predict_rows_from_csv(path, vocab) -> np.ndarray:
    import csv as _csv

    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        missing = [c for c in PREDICT_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: prediction CSV is missing columns {missing}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    encode_features(
                        float(row["rainfall_mm"]), float(row["tmax_c"]), float(row["tmin_c"]),
                        float(row["tavg_c"]), float(row["rh_pct"]), row["variety"].strip(), vocab,
                    )
                )
            except VocabularyError:
                raise
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.vstack(rows)


def cmd_predict(args, parser: argparse.ArgumentParser) -> int:
    bundle = load_model(args.model)
    if args.data is not None:
        feats = _predict_rows_from_csv(args.data, bundle.vocab)
    else:
        flags = [args.rainfall, args.tmax, args.tmin, args.tavg, args.rh, args.variety]
        if any(v is None for v in flags):
            parser.error("predict needs either --data or all of "
                         "--rainfall --tmax --tmin --tavg --rh --variety")
        feats = encode_features(
            args.rainfall, args.tmax, args.tmin, args.tavg, args.rh, args.variety, bundle.vocab
        )[None, :]
    outputs = predict_outputs(bundle, ds_mod.normalize(feats, bundle.normalizer))
    print("class,y_high,y_medium,y_low")
    for row in outputs:
        label = Severity(int(np.argmax(row))).label
        print(f"{label},{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}")
    return 0


def cmd_compare(args) -> int:
    records = load_csv(args.data)
    data = encode(records)
    split = split_random(data.n_rows, DEFAULT_RATIOS, SeededRng(args.seed))
    design = MlpDesign(
        n_hidden=args.hidden,
        f_hidden=Transfer.parse(args.hidden_fn),
        f_out=Transfer.parse(args.out_fn),
        algorithm=Algo.parse(args.algo),
    )
    rep = compare_models(
        data, split, mlp_design=design, spread=args.spread, sigma=args.sigma,
        seed=args.seed, max_epochs=args.max_epochs, rbf_max_neurons=args.max_neurons,
    )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report.write_comparison_csv(outdir / "comparison.csv", rep)
    if not args.no_figures:
        report.comparison_figure(rep, outdir / "comparison.png")
    print(f"{'model':<6s} {'train_rmse':>10s} {'train_r':>8s} {'train_r2':>9s} {'train_mae':>10s} "
          f"{'test_rmse':>10s} {'test_r':>8s} {'test_r2':>9s} {'test_mae':>9s} {'seconds':>9s}")
    for fam in rep.families:
        print(f"{fam.name:<6s} {fam.train.rmse:>10.4f} {fam.train.r:>8.4f} {fam.train.r2:>9.4f} "
              f"{fam.train.mae:>10.4f} {fam.test.rmse:>10.4f} {fam.test.r:>8.4f} "
              f"{fam.test.r2:>9.4f} {fam.test.mae:>9.4f} {fam.train_seconds:>9.4f}")
    print(f"comparison written to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rustcast",
        description="Forecast wheat stem-rust severity with MLP, RBF and GRNN models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--rows", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--varieties", type=int, default=5)
    p.add_argument("--year-start", type=int, default=2000)
    p.add_argument("--year-end", type=int, default=2018)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one model and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True, choices=["mlp", "rbf", "grnn"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutoff-year", type=int, default=None,
                   help="hold out rows with year beyond this before splitting")
    p.add_argument("--hidden", type=int, default=8)
    p.add_argument("--algo", default="lm")
    p.add_argument("--hidden-fn", default="logsig")
    p.add_argument("--out-fn", default="purelin")
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--goal-mse", type=float, default=0.0)
    p.add_argument("--patience", type=int, default=6)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--spread", type=float, default=0.2)
    p.add_argument("--max-neurons", type=int, default=None)
    p.add_argument("--sigma", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run a hyperparameter sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--family", required=True,
                   choices=["mlp-hidden", "mlp-divide", "mlp-transfer", "mlp-learning",
                            "mlp-algo", "mlp-staged", "rbf-spread", "grnn-sigma"])
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=7)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--hidden", type=int, default=8)
    p.add_argument("--algo", default="lm")
    p.add_argument("--hidden-fn", default="tansig")
    p.add_argument("--out-fn", default="tansig")
    p.add_argument("--max-neurons", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict severity for new feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None, help="CSV with feature columns (severity optional)")
    p.add_argument("--rainfall", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--tmin", type=float, default=None)
    p.add_argument("--tavg", type=float, default=None)
    p.add_argument("--rh", type=float, default=None)
    p.add_argument("--variety", default=None)
    p.set_defaults(func=cmd_predict, needs_parser=True)

    p = sub.add_parser("compare", help="train and compare all three families")
    p.add_argument("--data", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", type=int, default=8)
    p.add_argument("--algo", default="lm")
    p.add_argument("--hidden-fn", default="logsig")
    p.add_argument("--out-fn", default="purelin")
    p.add_argument("--spread", type=float, default=0.2)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--max-neurons", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_compare)

    return parser


_USAGE_ERRORS = (ParseError, SchemaError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "needs_parser", False):
            return args.func(args, parser)
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
