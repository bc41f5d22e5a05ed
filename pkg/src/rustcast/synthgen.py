"""Deterministic synthetic dataset generator.

Stands in for the private field data: weather features are drawn from
plausible agro-meteorological ranges, and severity classes come from batch
tertiles of a hidden nonlinear score in which rainfall dominates, humidity
comes second, average temperature acts through a bell-shaped disease optimum
and each variety carries a fixed susceptibility. The coefficients are artifact
choices, not measured values.

Rainfall and relative humidity share a latent per-row "wetness" factor (wet
seasons are humid), so the generated weather has the correlation structure a
seasonal climate actually shows. Variety susceptibilities are assigned in
ascending order of the varieties' first appearance, which keeps susceptibility
monotone in the ordinal variety code the downstream encoding produces; the
variety feature then behaves like a genuine ordinal, not a shuffled
categorical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import RawRecord, Severity
from .linalg import SeededRng

VARIETY_NAMES = [
    "Kubsa",
    "Digalu",
    "Danda'a",
    "Hidase",
    "Ogolcho",
    "Kakaba",
    "Ized",
    "Madda Walabu",
    "Sofumar",
    "Tusie",
    "Dodota",
    "Galama",
]

RAINFALL_RANGE = (0.0, 400.0)
TMIN_RANGE = (2.0, 15.0)
TMAX_RANGE = (15.0, 32.0)
RH_RANGE = (30.0, 95.0)
TAVG_JITTER = 2.0
RAIN_WETNESS_JITTER = 0.15  # rainfall = wetness +- this, on the unit scale
RH_WETNESS_MIX = 0.75  # humidity = mix * wetness + (1 - mix) * independent draw


class SynthConfigError(ValueError):
    pass


@dataclass
class SynthConfig:
    n_rows: int = 500
    year_range: tuple[int, int] = (2000, 2018)
    n_varieties: int = 5
    noise_sd: float = 0.1
    seed: int = 7

    def validate(self) -> None:
        if self.n_rows < 3:
            raise SynthConfigError(f"n_rows must be >= 3, got {self.n_rows}")
        if self.year_range[0] > self.year_range[1]:
            raise SynthConfigError(f"empty year range {self.year_range}")
        if self.n_varieties < 1:
            raise SynthConfigError("n_varieties must be >= 1")
        if self.noise_sd < 0:
            raise SynthConfigError("noise_sd must be >= 0")


def variety_labels(n: int) -> list[str]:
    names = VARIETY_NAMES[:n]
    names += [f"Variety{i + 1}" for i in range(len(names), n)]
    return names


def _scale01(v: np.ndarray) -> np.ndarray:
    span = v.max() - v.min()
    if span == 0:
        return np.zeros_like(v)
    return (v - v.min()) / span


def latent_scores(rainfall, rh, tavg, susceptibility, noise=None) -> np.ndarray:
    """Hidden severity score for a batch; min-max scaling is batch-relative.

    score = 2.0*r + 1.0*h + 0.8*exp(-((t - 0.6)/0.25)^2) + 0.6*s + noise
    with r, h, t the batch-scaled rainfall, humidity and average temperature.
    Rainfall has the largest coefficient, so at zero noise the score is
    monotone in rainfall when everything else is held fixed.
    """
    rainfall = np.asarray(rainfall, dtype=np.float64)
    rh = np.asarray(rh, dtype=np.float64)
    tavg = np.asarray(tavg, dtype=np.float64)
    susceptibility = np.asarray(susceptibility, dtype=np.float64)
    r = _scale01(rainfall)
    h = _scale01(rh)
    tt = _scale01(tavg)
    bell = np.exp(-(((tt - 0.6) / 0.25) ** 2))
    score = 2.0 * r + 1.0 * h + 0.8 * bell + 0.6 * susceptibility
    if noise is not None:
        score = score + np.asarray(noise, dtype=np.float64)
    return score


def generate(cfg: SynthConfig) -> list[RawRecord]:
    """Deterministic record list; class tertiles split as evenly as n allows.

    Draw order per run is fixed: one susceptibility per variety first, then
    per row wetness, rainfall jitter, humidity, tmin, tmax, tavg jitter,
    variety index, noise. Years cycle round-robin through the configured
    range. Susceptibility values are sorted and handed out in first-appearance
    order, so earlier-appearing varieties are the less susceptible ones.
    """
    cfg.validate()
    rng = SeededRng(cfg.seed)
    labels = variety_labels(cfg.n_varieties)
    susceptibility_pool = np.sort([rng.random() for _ in range(cfg.n_varieties)])

    n = cfg.n_rows
    year_lo, year_hi = cfg.year_range
    n_years = year_hi - year_lo + 1
    rainfall = np.empty(n)
    tmin = np.empty(n)
    tmax = np.empty(n)
    tavg = np.empty(n)
    rh = np.empty(n)
    variety_idx = np.empty(n, dtype=np.int64)
    noise = np.empty(n)
    clip01 = lambda v: min(max(v, 0.0), 1.0)
    for i in range(n):
        wetness = rng.random()
        rain01 = clip01(wetness + rng.uniform(-RAIN_WETNESS_JITTER, RAIN_WETNESS_JITTER))
        rainfall[i] = RAINFALL_RANGE[0] + (RAINFALL_RANGE[1] - RAINFALL_RANGE[0]) * rain01
        rh01 = clip01(RH_WETNESS_MIX * wetness + (1.0 - RH_WETNESS_MIX) * rng.random())
        rh[i] = RH_RANGE[0] + (RH_RANGE[1] - RH_RANGE[0]) * rh01
        tmin[i] = rng.uniform(*TMIN_RANGE)
        tmax[i] = rng.uniform(*TMAX_RANGE)
        jitter = rng.uniform(-TAVG_JITTER, TAVG_JITTER)
        tavg[i] = min(max((tmin[i] + tmax[i]) / 2.0 + jitter, tmin[i]), tmax[i])
        variety_idx[i] = rng.below(cfg.n_varieties)
        noise[i] = rng.normal(0.0, cfg.noise_sd)

    # susceptibility rank = first-appearance rank, so the ordinal code the
    # encoder assigns is monotone in susceptibility
    rank = np.full(cfg.n_varieties, -1, dtype=np.int64)
    next_rank = 0
    for v in variety_idx:
        if rank[v] < 0:
            rank[v] = next_rank
            next_rank += 1
    for v in range(cfg.n_varieties):  # varieties never drawn get the leftover ranks
        if rank[v] < 0:
            rank[v] = next_rank
            next_rank += 1
    susceptibility = susceptibility_pool[rank]

    scores = latent_scores(rainfall, rh, tavg, susceptibility[variety_idx], noise)
    order = np.argsort(scores, kind="stable")  # score ties resolve by row index
    k1, k2 = n // 3, (2 * n) // 3
    severity = np.empty(n, dtype=object)
    severity[order[:k1]] = Severity.LOW
    severity[order[k1:k2]] = Severity.MEDIUM
    severity[order[k2:]] = Severity.HIGH

    return [
        RawRecord(
            year=year_lo + i % n_years,
            rainfall=float(rainfall[i]),
            tmax=float(tmax[i]),
            tmin=float(tmin[i]),
            tavg=float(tavg[i]),
            rel_humidity=float(rh[i]),
            variety=labels[variety_idx[i]],
            severity=severity[i],
        )
        for i in range(n)
    ]
