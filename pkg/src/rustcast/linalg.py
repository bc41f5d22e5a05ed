"""Dense least-squares solvers and deterministic randomness shared by all model families.

Matrices are plain 2-D float64 numpy arrays in row-major (C) order; vectors are
1-D arrays. Nothing here is sparse or GPU-aware on purpose.

Randomness goes through :class:`SeededRng`, a SplitMix64 generator implemented
in pure integer arithmetic so that a given seed produces the same stream on
every platform and numpy version. Reference: Steele, Lea & Flood,
"Fast splittable pseudorandom number generators" (the SplitMix64 finalizer,
also used by Java's SplittableRandom).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1


class DimensionMismatch(ValueError):
    """Operand shapes are incompatible."""


class SingularSystem(ValueError):
    """System is rank-deficient beyond the regularization tolerance."""


class SeededRng:
    """SplitMix64 stream: state advances by the golden-gamma constant, output
    is the 64-bit mix z ^= z>>30 * 0xBF58476D1CE4E5B9; z ^= z>>27 *
    0x94D049BB133111EB; z ^= z>>31.

    Identical seeds give identical streams across runs and platforms. Not
    shareable between threads; each worker owns its own instance.
    """

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Float in [0, 1) with 53 bits of resolution."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        """Box-Muller transform; consumes two uniforms per call."""
        u1 = 1.0 - self.random()  # (0, 1]: keeps log() finite
        u2 = self.random()
        return mean + sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n


def rand_permutation(rng: SeededRng, n: int) -> np.ndarray:
    """Fisher-Yates shuffle of 0..n-1 driven by `rng`; deterministic per seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _as_2d(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got ndim={a.ndim}")
    return a


def solve_least_squares(a, b) -> np.ndarray:
    """Minimize ||A X - B||_F over X.

    Uses LAPACK's SVD-based solver with singular values below 1e-10 of the
    largest treated as rank deficiency; deficient systems are retried on the
    normal equations with a ridge of 1e-10 * trace(A^T A)/n before giving up
    with :class:`SingularSystem`. The ridge keeps near-collinear designs
    (for example a constant basis column next to the bias column) from
    producing huge cancelling coefficients.
    """
    a = _as_2d(a, "A")
    b = _as_2d(b, "B")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"A has {a.shape[0]} rows, B has {b.shape[0]}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch("A must have at least one row and column")
    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=1e-10)
    if rank == a.shape[1]:
        return x
    n = a.shape[1]
    gram = a.T @ a
    ridge = 1e-10 * np.trace(gram) / n
    if ridge <= 0.0:
        raise SingularSystem("A has no nonzero column; nothing to regularize")
    try:
        return np.linalg.solve(gram + ridge * np.eye(n), a.T @ b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def solve_damped_normal(j, e, mu: float) -> np.ndarray:
    """Solve (J^T J + mu*I) d = J^T e for the damped Gauss-Newton direction.

    The system is symmetric positive definite for mu > 0, so this cannot
    fail on a finite Jacobian.
    """
    j = _as_2d(j, "J")
    e = np.asarray(e, dtype=np.float64).ravel()
    if j.shape[0] != e.shape[0]:
        raise DimensionMismatch(f"J has {j.shape[0]} rows, e has length {e.shape[0]}")
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    n = j.shape[1]
    h = j.T @ j
    h[np.diag_indices(n)] += mu
    try:
        return np.linalg.solve(h, j.T @ e)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise SingularSystem(str(exc)) from exc
