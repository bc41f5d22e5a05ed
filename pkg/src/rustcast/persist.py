"""Versioned JSON model files.

A model file carries everything prediction needs (family payload, the fitted
normalizer, the variety vocabulary) plus the training configuration and
metadata. Floats serialize through repr, so save -> load -> predict is
bit-for-bit on the same platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import NormalizationParams
from .grnn import GrnnModel, predict_grnn
from .mlp import MlpNetwork, StopReason, TrainRecord, Transfer, _forward_batch
from .rbfnn import GrowthStep, RbfNetwork, predict_rbf

FORMAT_VERSION = 1


class VersionError(ValueError):
    """Unsupported model file format_version."""


@dataclass
class ModelBundle:
    family: str  # "mlp" | "rbf" | "grnn"
    model: object
    normalizer: NormalizationParams
    vocab: list[str]
    config: dict
    metadata: dict
    train_record: TrainRecord | None = None
    growth: list[GrowthStep] | None = None


def _payload(bundle: ModelBundle) -> dict:
    m = bundle.model
    if bundle.family == "mlp":
        return {
            "n_in": m.n_in,
            "n_hidden": m.n_hidden,
            "n_out": m.n_out,
            "f_hidden": m.f_hidden.value,
            "f_out": m.f_out.value,
            "w1": m.w1.tolist(),
            "b1": m.b1.tolist(),
            "w2": m.w2.tolist(),
            "b2": m.b2.tolist(),
        }
    if bundle.family == "rbf":
        return {
            "spread": m.spread,
            "centers": m.centers.tolist(),
            "w": m.w.tolist(),
            "b": m.b.tolist(),
        }
    if bundle.family == "grnn":
        return {
            "sigma": m.sigma,
            "patterns": m.patterns.tolist(),
            "targets": m.targets.tolist(),
        }
    raise ValueError(f"unknown family {bundle.family!r}")


def _model_from_payload(family: str, payload: dict):
    if family == "mlp":
        return MlpNetwork(
            n_in=payload["n_in"],
            n_hidden=payload["n_hidden"],
            n_out=payload["n_out"],
            w1=np.array(payload["w1"]),
            b1=np.array(payload["b1"]),
            w2=np.array(payload["w2"]),
            b2=np.array(payload["b2"]),
            f_hidden=Transfer(payload["f_hidden"]),
            f_out=Transfer(payload["f_out"]),
        )
    if family == "rbf":
        spread = float(payload["spread"])
        return RbfNetwork(
            centers=np.array(payload["centers"]),
            spread=spread,
            beta=float(np.sqrt(np.log(2.0)) / spread),
            w=np.array(payload["w"]),
            b=np.array(payload["b"]),
        )
    if family == "grnn":
        return GrnnModel(
            patterns=np.array(payload["patterns"]),
            targets=np.array(payload["targets"]),
            sigma=float(payload["sigma"]),
        )
    raise ValueError(f"unknown family {family!r}")


def save_model(bundle: ModelBundle, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "family": bundle.family,
        "normalizer": {"min": bundle.normalizer.min.tolist(), "max": bundle.normalizer.max.tolist()},
        "variety_vocab": list(bundle.vocab),
        "config": bundle.config,
        "metadata": bundle.metadata,
        "payload": _payload(bundle),
    }
    if bundle.train_record is not None:
        r = bundle.train_record
        doc["train_record"] = {
            "train_mse": r.train_mse.tolist(),
            "val_mse": r.val_mse.tolist(),
            "test_mse": r.test_mse.tolist(),
            "gradient_norm": r.gradient_norm.tolist(),
            "best_epoch": r.best_epoch,
            "stop_reason": r.stop_reason.value,
        }
    if bundle.growth is not None:
        doc["growth"] = [
            {"neurons": g.neurons, "train_mse": g.train_mse, "val_mse": g.val_mse} for g in bundle.growth
        ]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> ModelBundle:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    family = doc["family"]
    record = None
    if "train_record" in doc:
        r = doc["train_record"]
        record = TrainRecord(
            train_mse=np.array(r["train_mse"]),
            val_mse=np.array(r["val_mse"]),
            test_mse=np.array(r["test_mse"]),
            gradient_norm=np.array(r["gradient_norm"]),
            best_epoch=r["best_epoch"],
            stop_reason=StopReason(r["stop_reason"]),
        )
    growth = None
    if "growth" in doc:
        growth = [GrowthStep(g["neurons"], g["train_mse"], g["val_mse"]) for g in doc["growth"]]
    return ModelBundle(
        family=family,
        model=_model_from_payload(family, doc["payload"]),
        normalizer=NormalizationParams(
            min=np.array(doc["normalizer"]["min"]), max=np.array(doc["normalizer"]["max"])
        ),
        vocab=list(doc["variety_vocab"]),
        config=doc["config"],
        metadata=doc["metadata"],
        train_record=record,
        growth=growth,
    )


def predict_outputs(bundle: ModelBundle, normalized_features: np.ndarray) -> np.ndarray:
    """Raw 3-vector outputs for already-normalized feature rows."""
    if bundle.family == "mlp":
        return _forward_batch(bundle.model, np.atleast_2d(normalized_features))[0]
    if bundle.family == "rbf":
        return np.atleast_2d(predict_rbf(bundle.model, normalized_features))
    if bundle.family == "grnn":
        return np.atleast_2d(predict_grnn(bundle.model, normalized_features))
    raise ValueError(f"unknown family {bundle.family!r}")
