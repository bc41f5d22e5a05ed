"""rustcast: neural forecasting toolkit for wheat stem-rust severity.

Three model families over six tabular weather/variety features: a
one-hidden-layer perceptron with ten training algorithms, an incrementally
grown radial-basis-function network, and a GRNN kernel regressor, plus the
preprocessing, metrics, hyperparameter sweeps and comparison reports needed
to run the full experiment pipeline.
"""

__version__ = "0.1.0"

from .dataset import Dataset, NormalizationParams, RawRecord, Severity, SplitIndices
from .grnn import GrnnModel, predict_grnn, train_grnn
from .linalg import SeededRng, rand_permutation, solve_damped_normal, solve_least_squares
from .metrics import compute_metrics, confusion, error_histogram, regression_plot
from .mlp import Algo, MlpNetwork, TrainConfig, Transfer, init_network, predict_class, train
from .rbfnn import RbfNetwork, RbfTrainConfig, predict_rbf, radbas, train_rbf
from .synthgen import SynthConfig, generate

__all__ = [
    "Algo",
    "Dataset",
    "GrnnModel",
    "MlpNetwork",
    "NormalizationParams",
    "RawRecord",
    "RbfNetwork",
    "RbfTrainConfig",
    "SeededRng",
    "Severity",
    "SplitIndices",
    "SynthConfig",
    "TrainConfig",
    "Transfer",
    "compute_metrics",
    "confusion",
    "error_histogram",
    "generate",
    "init_network",
    "predict_class",
    "predict_grnn",
    "predict_rbf",
    "radbas",
    "rand_permutation",
    "regression_plot",
    "solve_damped_normal",
    "solve_least_squares",
    "train",
    "train_grnn",
    "train_rbf",
]
