"""Experiment protocols: the staged MLP design-space search, the RBF spread
sweep, the GRNN smoothing sweep, and the three-family comparison report.

Every grid point trains with a seed derived from the sweep's base seed and
the row's flat index, so results are reproducible regardless of worker count
or completion order. Wall-clock is measured inside the row worker and is the
only non-deterministic field; it never feeds selection.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .dataset import (
    Dataset,
    SplitIndices,
    apply_normalizer,
    fit_normalizer,
    split_block,
    split_random,
)
from .grnn import predict_grnn, train_grnn
from .linalg import SeededRng
from .metrics import MetricsReport, compute_metrics
from .mlp import Algo, TrainConfig, Transfer, init_network, train
from .rbfnn import RbfTrainConfig, predict_rbf, train_rbf

DEFAULT_RATIOS = (0.7, 0.15, 0.15)


class Family(str, Enum):
    MLP_HIDDEN = "mlp-hidden"
    MLP_DIVIDE = "mlp-divide"
    MLP_TRANSFER = "mlp-transfer"
    MLP_LEARNING = "mlp-learning"
    MLP_ALGO = "mlp-algo"
    RBF_SPREAD = "rbf-spread"
    GRNN_SIGMA = "grnn-sigma"


@dataclass
class MlpDesign:
    """The MLP configuration carried from stage to stage of the search."""

    n_hidden: int = 8
    divide: str = "dividerand"
    f_hidden: Transfer = Transfer.TANSIG
    f_out: Transfer = Transfer.TANSIG
    momentum: float = 0.9
    algorithm: Algo = Algo.LEVENBERG_MARQUARDT


def default_grid(family: Family) -> list:
    if family is Family.MLP_HIDDEN:
        return list(range(3, 14))
    if family is Family.MLP_DIVIDE:
        return ["dividerand", "divideind"]
    if family is Family.MLP_TRANSFER:
        fns = [Transfer.TANSIG, Transfer.LOGSIG, Transfer.PURELIN]
        return [(h, o) for h in fns for o in fns]
    if family is Family.MLP_LEARNING:
        # momentum on/off stands in for the frameworkish gdm-vs-gd weight rule
        return [("learngdm", 0.9), ("learngd", 0.0)]
    if family is Family.MLP_ALGO:
        return list(Algo)
    if family is Family.RBF_SPREAD:
        return [round(0.1 * i, 1) for i in range(1, 21)]
    if family is Family.GRNN_SIGMA:
        return [round(0.1 * i, 1) for i in range(1, 11)]
    raise ValueError(f"unknown family {family}")


def grid_label(family: Family, point) -> str:
    if family is Family.MLP_TRANSFER:
        return f"{point[0].value}/{point[1].value}"
    if family is Family.MLP_LEARNING:
        return point[0]
    if family is Family.MLP_ALGO:
        return point.value
    return str(point)


@dataclass
class SweepSpec:
    family: Family
    grid: list = field(default_factory=list)  # empty: use default_grid(family)
    design: MlpDesign = field(default_factory=MlpDesign)
    repetitions: int = 7
    base_seed: int = 0
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    max_epochs: int = 1000
    rbf_max_neurons: int | None = None

    def resolved_grid(self) -> list:
        return self.grid if self.grid else default_grid(self.family)


@dataclass
class SweepRow:
    grid_label: str
    hidden: int | None  # hidden-neuron (or RBF-neuron) count where applicable
    best_val_mse: float
    epoch_of_best: int
    train_mse: float | None
    seed: int
    seconds: float
    error: str | None = None


@dataclass
class SweepResult:
    family: Family
    rows: list[SweepRow]
    selected: int

    @property
    def selected_row(self) -> SweepRow:
        return self.rows[self.selected]


def _mlp_design_for(family: Family, design: MlpDesign, point) -> MlpDesign:
    if family is Family.MLP_HIDDEN:
        return replace(design, n_hidden=point)
    if family is Family.MLP_DIVIDE:
        return replace(design, divide=point)
    if family is Family.MLP_TRANSFER:
        return replace(design, f_hidden=point[0], f_out=point[1])
    if family is Family.MLP_LEARNING:
        return replace(design, momentum=point[1])
    if family is Family.MLP_ALGO:
        return replace(design, algorithm=point)
    return design


def _split_for(design: MlpDesign, n: int, ratios, seed: int, fallback: SplitIndices) -> SplitIndices:
    if design.divide == "divideind":
        return split_block(n, ratios)
    if design.divide == "dividerand":
        return fallback if fallback is not None else split_random(n, ratios, SeededRng(seed))
    raise ValueError(f"unknown divide function {design.divide!r}")


def _run_point(spec: SweepSpec, point, seed: int, data: Dataset, split: SplitIndices) -> SweepRow:
    """Train one grid point with one seed; failures become row markers."""
    t0 = time.perf_counter()
    label = grid_label(spec.family, point)
    try:
        if spec.family is Family.RBF_SPREAD:
            norm = fit_normalizer(data, split.train)
            nds = apply_normalizer(data, norm)
            cfg = RbfTrainConfig(spread=point, max_neurons=spec.rbf_max_neurons)
            _, growth = train_rbf(nds, split.train, cfg, val_idx=split.val)
            best = min(growth, key=lambda g: g.val_mse)
            return SweepRow(label, best.neurons, best.val_mse, best.neurons, best.train_mse,
                            seed, time.perf_counter() - t0)
        if spec.family is Family.GRNN_SIGMA:
            norm = fit_normalizer(data, split.train)
            nds = apply_normalizer(data, norm)
            model = train_grnn(nds, split.train, point)
            val = float(np.mean((nds.targets[split.val] - predict_grnn(model, nds.features[split.val])) ** 2))
            tr = float(np.mean((nds.targets[split.train] - predict_grnn(model, nds.features[split.train])) ** 2))
            return SweepRow(label, None, val, 0, tr, seed, time.perf_counter() - t0)

        design = _mlp_design_for(spec.family, spec.design, point)
        row_split = split
        if spec.family is Family.MLP_DIVIDE:
            row_split = _split_for(design, data.n_rows, spec.ratios, seed, None)
        norm = fit_normalizer(data, row_split.train)
        nds = apply_normalizer(data, norm)
        net = init_network(
            data.features.shape[1], design.n_hidden, data.targets.shape[1],
            design.f_hidden, design.f_out, SeededRng(seed),
        )
        cfg = TrainConfig(
            algorithm=design.algorithm, momentum=design.momentum,
            max_epochs=spec.max_epochs, rng_seed=seed,
        )
        _, rec = train(net, nds, row_split, cfg)
        best = rec.best_epoch
        return SweepRow(label, design.n_hidden, float(rec.val_mse[best]), best,
                        float(rec.train_mse[best]), seed, time.perf_counter() - t0)
    except Exception as exc:  # recorded, not fatal: divergence is an expected outcome
        return SweepRow(label, None, float("inf"), 0, None, seed,
                        time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}")


def _task(args) -> tuple[int, int, SweepRow]:
    spec, point, gi, rep, data, split = args
    seed = spec.base_seed + gi * spec.repetitions + rep
    return gi, rep, _run_point(spec, point, seed, data, split)


def run_sweep(spec: SweepSpec, data: Dataset, split: SplitIndices, jobs: int = 1) -> SweepResult:
    """One trained model per grid point per repetition, keeping each point's
    best repetition by validation MSE.

    Deterministic families (RBF, GRNN) run a single repetition. The winner is
    the row with the lowest best-validation MSE; ties break toward the smaller
    model, then the lower grid index.
    """
    grid = spec.resolved_grid()
    if not grid:
        raise ValueError("sweep grid must be non-empty")
    reps = spec.repetitions
    if spec.family in (Family.RBF_SPREAD, Family.GRNN_SIGMA):
        reps = 1
    eff = replace(spec, repetitions=reps)
    tasks = [(eff, point, gi, rep, data, split) for gi, point in enumerate(grid) for rep in range(reps)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    per_point: dict[int, list[SweepRow]] = {}
    for gi, _, row in outcomes:
        per_point.setdefault(gi, []).append(row)
    rows = []
    for gi in range(len(grid)):
        candidates = per_point[gi]
        rows.append(min(candidates, key=lambda r: (r.best_val_mse, r.seed)))
    selected = min(
        range(len(rows)),
        key=lambda i: (rows[i].best_val_mse, rows[i].hidden if rows[i].hidden is not None else 0, i),
    )
    return SweepResult(family=spec.family, rows=rows, selected=selected)


STAGES = [Family.MLP_HIDDEN, Family.MLP_DIVIDE, Family.MLP_TRANSFER, Family.MLP_LEARNING, Family.MLP_ALGO]


def staged_mlp_search(
    data: Dataset,
    split: SplitIndices,
    base_seed: int = 0,
    repetitions: int = 7,
    max_epochs: int = 1000,
    jobs: int = 1,
) -> tuple[MlpDesign, SplitIndices, list[SweepResult]]:
    """Five-stage search: hidden neurons, divide function, transfer pair,
    learning rule, training algorithm; each stage fixes the previous winners.
    """
    design = MlpDesign()
    active_split = split
    results = []
    for stage_idx, family in enumerate(STAGES):
        spec = SweepSpec(
            family=family,
            design=design,
            repetitions=repetitions,
            base_seed=base_seed + stage_idx * 10_000,
            max_epochs=max_epochs,
        )
        res = run_sweep(spec, data, active_split, jobs=jobs)
        grid = spec.resolved_grid()
        winner = grid[res.selected]
        design = _mlp_design_for(family, design, winner)
        if family is Family.MLP_DIVIDE and design.divide == "divideind":
            active_split = split_block(data.n_rows, spec.ratios)
        results.append(res)
    return design, active_split, results


@dataclass
class FamilyComparison:
    name: str
    detail: str
    train: MetricsReport
    test: MetricsReport
    train_seconds: float


@dataclass
class ComparisonReport:
    families: list[FamilyComparison]  # ordered mlp, rbf, grnn


def compare_models(
    data: Dataset,
    split: SplitIndices,
    mlp_design: MlpDesign | None = None,
    spread: float = 0.2,
    sigma: float = 0.1,
    seed: int = 0,
    max_epochs: int = 1000,
    rbf_max_neurons: int | None = None,
) -> ComparisonReport:
    """Train all three families on the same split and report Table-style
    train/test RMSE, R, R2 and MAE plus per-family training wall-clock."""
    design = mlp_design or MlpDesign(f_hidden=Transfer.LOGSIG, f_out=Transfer.PURELIN)
    norm = fit_normalizer(data, split.train)
    nds = apply_normalizer(data, norm)
    x_tr, t_tr = nds.features[split.train], nds.targets[split.train]
    x_te, t_te = nds.features[split.test], nds.targets[split.test]

    t0 = time.perf_counter()
    net = init_network(
        data.features.shape[1], design.n_hidden, data.targets.shape[1],
        design.f_hidden, design.f_out, SeededRng(seed),
    )
    cfg = TrainConfig(algorithm=design.algorithm, momentum=design.momentum,
                      max_epochs=max_epochs, rng_seed=seed)
    mlp_net, _ = train(net, nds, split, cfg)
    mlp_secs = time.perf_counter() - t0
    from .mlp import _forward_batch  # predictions for whole partitions

    mlp_cmp = FamilyComparison(
        name="mlp",
        detail=f"{design.n_hidden} hidden, {design.f_hidden.value}/{design.f_out.value}, {design.algorithm.value}",
        train=compute_metrics(_forward_batch(mlp_net, x_tr)[0], t_tr),
        test=compute_metrics(_forward_batch(mlp_net, x_te)[0], t_te),
        train_seconds=mlp_secs,
    )

    t0 = time.perf_counter()
    rbf_net, _ = train_rbf(nds, split.train, RbfTrainConfig(spread=spread, max_neurons=rbf_max_neurons))
    rbf_secs = time.perf_counter() - t0
    rbf_cmp = FamilyComparison(
        name="rbf",
        detail=f"spread {spread}, {rbf_net.n_neurons} neurons",
        train=compute_metrics(predict_rbf(rbf_net, x_tr), t_tr),
        test=compute_metrics(predict_rbf(rbf_net, x_te), t_te),
        train_seconds=rbf_secs,
    )

    t0 = time.perf_counter()
    grnn_model = train_grnn(nds, split.train, sigma)
    grnn_secs = time.perf_counter() - t0
    grnn_cmp = FamilyComparison(
        name="grnn",
        detail=f"sigma {sigma}",
        train=compute_metrics(predict_grnn(grnn_model, x_tr), t_tr),
        test=compute_metrics(predict_grnn(grnn_model, x_te), t_te),
        train_seconds=grnn_secs,
    )
    return ComparisonReport(families=[mlp_cmp, rbf_cmp, grnn_cmp])
