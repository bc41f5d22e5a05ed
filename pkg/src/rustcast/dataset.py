"""Loading, encoding, normalization and partitioning of the tabular severity data.

The on-disk format is a UTF-8 CSV with the exact header
``year,rainfall_mm,tmax_c,tmin_c,tavg_c,rh_pct,variety,severity``,
``.`` decimal points and no thousands separators. Severity is one of
low/medium/high, case-insensitive.

Feature columns are ordered rainfall, tmax, tmin, tavg, relative humidity,
variety code. Targets are one-hot with component order (high, medium, low).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .linalg import SeededRng, rand_permutation

CSV_HEADER = ["year", "rainfall_mm", "tmax_c", "tmin_c", "tavg_c", "rh_pct", "variety", "severity"]
FEATURE_NAMES = ["rainfall_mm", "tmax_c", "tmin_c", "tavg_c", "rh_pct", "variety_code"]
N_FEATURES = 6
N_CLASSES = 3


class SchemaError(ValueError):
    """CSV header does not match the documented schema."""


class ParseError(ValueError):
    """A cell could not be parsed; message carries the file line number."""


class RangeError(ValueError):
    """A parsed value violates a record invariant."""


class OverlapError(ValueError):
    pass


class CoverageError(ValueError):
    pass


class EmptyPartition(ValueError):
    pass


class TooFewRows(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class VocabularyError(ValueError):
    """A variety label is not present in the model's vocabulary."""


class Severity(Enum):
    """Stem-rust severity class. One-hot index 0 is HIGH, so an argmax tie
    resolves toward the more severe class."""

    HIGH = 0
    MEDIUM = 1
    LOW = 2

    @classmethod
    def parse(cls, text: str) -> "Severity":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ParseError(f"unknown severity {text!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()

    def one_hot(self) -> np.ndarray:
        row = np.zeros(N_CLASSES)
        row[self.value] = 1.0
        return row


@dataclass(frozen=True)
class RawRecord:
    year: int
    rainfall: float
    tmax: float
    tmin: float
    tavg: float
    rel_humidity: float
    variety: str
    severity: Severity

    def validate(self) -> None:
        if self.rainfall < 0:
            raise RangeError(f"rainfall must be >= 0, got {self.rainfall}")
        if not 0.0 <= self.rel_humidity <= 100.0:
            raise RangeError(f"rh_pct must be in [0, 100], got {self.rel_humidity}")
        if not self.tmin <= self.tavg <= self.tmax:
            raise RangeError(
                f"need tmin <= tavg <= tmax, got {self.tmin}, {self.tavg}, {self.tmax}"
            )


@dataclass
class NormalizationParams:
    """Per-feature min/max fitted on the training partition only."""

    min: np.ndarray
    max: np.ndarray


@dataclass
class Dataset:
    features: np.ndarray  # (N, 6) float64
    targets: np.ndarray  # (N, 3) one-hot rows
    variety_vocab: list[str] = field(default_factory=list)
    normalizer: NormalizationParams | None = None

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def load_csv(path) -> list[RawRecord]:
    """Read records from `path`, validating schema and row invariants.

    Error messages reference 1-based file line numbers (header is line 1).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != CSV_HEADER:
            raise SchemaError(f"{path}: header must be {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise SchemaError(f"{path}:{lineno}: expected {len(CSV_HEADER)} columns, got {len(row)}")
            try:
                record = RawRecord(
                    year=int(row[0]),
                    rainfall=float(row[1]),
                    tmax=float(row[2]),
                    tmin=float(row[3]),
                    tavg=float(row[4]),
                    rel_humidity=float(row[5]),
                    variety=row[6].strip(),
                    severity=Severity.parse(row[7]),
                )
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            try:
                record.validate()
            except RangeError as exc:
                raise RangeError(f"{path}:{lineno}: {exc}") from None
            records.append(record)
    return records


def save_csv(records: list[RawRecord], path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [r.year, r.rainfall, r.tmax, r.tmin, r.tavg, r.rel_humidity, r.variety, r.severity.label]
            )


def encode(records: list[RawRecord]) -> Dataset:
    """Encode records into feature/target matrices.

    Variety labels map to integer codes in first-appearance order; the
    vocabulary is kept so prediction-time labels resolve consistently.
    """
    if not records:
        raise EmptyInput("no records to encode")
    vocab: list[str] = []
    codes = {}
    features = np.empty((len(records), N_FEATURES))
    targets = np.empty((len(records), N_CLASSES))
    for i, r in enumerate(records):
        if r.variety not in codes:
            codes[r.variety] = len(vocab)
            vocab.append(r.variety)
        features[i] = (r.rainfall, r.tmax, r.tmin, r.tavg, r.rel_humidity, codes[r.variety])
        targets[i] = r.severity.one_hot()
    return Dataset(features=features, targets=targets, variety_vocab=vocab)


def encode_features(
    rainfall: float, tmax: float, tmin: float, tavg: float, rh: float, variety: str, vocab: list[str]
) -> np.ndarray:
    """Single prediction-time feature row; unknown varieties are an error."""
    if variety not in vocab:
        raise VocabularyError(f"unknown variety {variety!r}")
    return np.array([rainfall, tmax, tmin, tavg, rh, float(vocab.index(variety))])


def encode_with_vocab(records: list[RawRecord], vocab: list[str]) -> Dataset:
    """Encode records against a fixed vocabulary (prediction/evaluation time)."""
    if not records:
        raise EmptyInput("no records to encode")
    codes = {label: i for i, label in enumerate(vocab)}
    features = np.empty((len(records), N_FEATURES))
    targets = np.empty((len(records), N_CLASSES))
    for i, r in enumerate(records):
        if r.variety not in codes:
            raise VocabularyError(f"unknown variety {r.variety!r} at data row {i + 1}")
        features[i] = (r.rainfall, r.tmax, r.tmin, r.tavg, r.rel_humidity, codes[r.variety])
        targets[i] = r.severity.one_hot()
    return Dataset(features=features, targets=targets, variety_vocab=list(vocab))


def fit_normalizer(ds: Dataset, train_idx) -> NormalizationParams:
    """Min/max per feature over the training rows only (no leakage)."""
    train_idx = np.asarray(train_idx, dtype=np.int64)
    if train_idx.size == 0:
        raise EmptyInput("cannot fit a normalizer on an empty training partition")
    rows = ds.features[train_idx]
    return NormalizationParams(min=rows.min(axis=0), max=rows.max(axis=0))


def normalize(x, p: NormalizationParams) -> np.ndarray:
    """Map features to [-1, 1] by the training min/max; constant columns go to 0.

    Values outside the fitted range legitimately map outside [-1, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    span = p.max - p.min
    out = np.zeros_like(x)
    nz = span != 0
    out[..., nz] = 2.0 * (x[..., nz] - p.min[nz]) / span[nz] - 1.0
    return out


def denormalize(y, p: NormalizationParams) -> np.ndarray:
    """Inverse of :func:`normalize`; constant columns recover their single value."""
    y = np.asarray(y, dtype=np.float64)
    span = p.max - p.min
    out = np.empty_like(y)
    nz = span != 0
    out[..., nz] = (y[..., nz] + 1.0) / 2.0 * span[nz] + p.min[nz]
    out[..., ~nz] = np.broadcast_to(p.min[~nz], out[..., ~nz].shape)
    return out


def apply_normalizer(ds: Dataset, p: NormalizationParams) -> Dataset:
    """New Dataset with normalized features; targets are shared, not copied."""
    return Dataset(
        features=normalize(ds.features, p),
        targets=ds.targets,
        variety_vocab=ds.variety_vocab,
        normalizer=p,
    )


def split_random(n: int, ratios: tuple[float, float, float], rng: SeededRng) -> SplitIndices:
    """Random disjoint train/val/test split.

    Val and test sizes are floor(ratio * n) but never below one row; train
    takes the remainder. This reproduces (70, 15, 15) at n=100 and (8, 1, 1)
    at n=10, and keeps every partition non-empty for all n >= 3.
    """
    if n < 3:
        raise TooFewRows(f"need n >= 3 to split, got {n}")
    if any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be positive and sum to 1, got {ratios}")
    n_val = max(1, int(np.floor(ratios[1] * n)))
    n_test = max(1, int(np.floor(ratios[2] * n)))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise TooFewRows(f"split of {n} rows with ratios {ratios} leaves an empty partition")
    perm = rand_permutation(rng, n)
    return SplitIndices(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
    )


def split_by_index(train, val, test, n: int) -> SplitIndices:
    """Explicit-index split; lists must be disjoint and cover 0..n-1."""
    parts = [np.asarray(p, dtype=np.int64) for p in (train, val, test)]
    total = sum(p.size for p in parts)
    joined = np.concatenate(parts) if total else np.empty(0, dtype=np.int64)
    if np.unique(joined).size != total:
        raise OverlapError("split index lists overlap")
    if total != n or not np.array_equal(np.sort(joined), np.arange(n)):
        raise CoverageError(f"split index lists do not cover 0..{n - 1} exactly")
    train, val, test = (np.sort(p) for p in parts)
    return SplitIndices(train=train, val=val, test=test)


def split_block(n: int, ratios: tuple[float, float, float]) -> SplitIndices:
    """Contiguous split in row order: first block train, then val, then test.

    This is the explicit-index divide used when rows are chronological.
    """
    if n < 3:
        raise TooFewRows(f"need n >= 3 to split, got {n}")
    n_val = max(1, int(np.floor(ratios[1] * n)))
    n_test = max(1, int(np.floor(ratios[2] * n)))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise TooFewRows(f"split of {n} rows with ratios {ratios} leaves an empty partition")
    idx = np.arange(n)
    return split_by_index(idx[:n_train], idx[n_train : n_train + n_val], idx[n_train + n_val :], n)


def chronological_holdout(records: list[RawRecord], cutoff_year: int) -> tuple[list[RawRecord], list[RawRecord]]:
    """Development rows (year <= cutoff) and held-out rows (year > cutoff)."""
    dev = [r for r in records if r.year <= cutoff_year]
    held = [r for r in records if r.year > cutoff_year]
    if not dev or not held:
        raise EmptyPartition(
            f"cutoff year {cutoff_year} leaves {len(dev)} development and {len(held)} holdout rows"
        )
    return dev, held
