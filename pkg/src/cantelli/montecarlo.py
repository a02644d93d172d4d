"""Monte Carlo checks of the bounds.

Gaussian samples with a prescribed covariance come from a counter-based
(Philox) generator keyed by the seed, so estimates are reproducible from
(seed, n_samples). The two-point law in :func:`sharpness_witness_1d` attains
the scalar Cantelli bound exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import linalg
from .cones import Cone
from .errors import DimensionMismatch, NonPositiveVariance

STRICT_TOL = 1e-12


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    stderr: float
    n_samples: int
    seed: int | None = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


class Check(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def sample_gaussian(Sigma, n_samples: int, seed: int) -> np.ndarray:
    """n_samples rows distributed as N(0, Sigma)."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    L = linalg.cholesky(Sigma).lower
    Z = _rng(seed).standard_normal((n_samples, L.shape[0]))
    return Z @ L.T


def _estimate(hits: np.ndarray, seed) -> TailEstimate:
    n = hits.size
    p = float(np.count_nonzero(hits)) / n
    return TailEstimate(p, math.sqrt(p * (1.0 - p) / n), n, seed)


def estimate_tail(samples, b, C: Cone, seed: int | None = None) -> TailEstimate:
    """Fraction of samples x with x - b in C."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    b = linalg.as_vector(b, C.dim)
    if X.shape[1] != C.dim:
        raise DimensionMismatch(f"samples have dimension {X.shape[1]}, cone {C.dim}")
    return _estimate(C.contains_batch(X - b, STRICT_TOL), seed)


def estimate_set_tail(samples, A, seed: int | None = None) -> TailEstimate:
    """Fraction of samples with x >= 0 and A x >= 1."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if X.shape[1] != A.shape[1]:
        raise DimensionMismatch(f"samples have dimension {X.shape[1]}, rows {A.shape[1]}")
    hits = np.all(X >= 0.0, axis=1) & np.all(X @ A.T >= 1.0, axis=1)
    return _estimate(hits, seed)


def check_bound(est: TailEstimate, bound: float) -> Check:
    """Pass unless the estimate exceeds the bound by more than three standard errors."""
    return Check.PASS if est.p_hat <= bound + 3.0 * est.stderr else Check.FAIL


@dataclass(frozen=True)
class TwoPointWitness:
    """Z = 1 with probability s2/(1+s2), Z = -s2 otherwise."""

    s2: float

    @property
    def hi(self) -> float:
        return 1.0

    @property
    def lo(self) -> float:
        return -self.s2

    @property
    def p_hi(self) -> float:
        return self.s2 / (1.0 + self.s2)

    @property
    def p_lo(self) -> float:
        return 1.0 / (1.0 + self.s2)

    def sample(self, n: int, seed: int) -> np.ndarray:
        return np.where(_rng(seed).random(n) < self.p_hi, self.hi, self.lo)


@dataclass(frozen=True)
class WitnessRecord:
    mean: Fraction
    variance: Fraction
    tail: Fraction
    bound: float

    @property
    def exact(self) -> bool:
        """Centered, and the tail equals variance / (1 + variance) exactly."""
        return self.mean == 0 and self.tail == self.variance / (1 + self.variance)


def sharpness_witness_1d(s2: float) -> tuple[TwoPointWitness, WitnessRecord]:
    """Two-point centered law with variance s2 whose tail at 1 equals s2 / (1 + s2).

    The moments are verified in exact rational arithmetic on the binary
    value of s2.
    """
    if not s2 > 0:
        raise NonPositiveVariance("s2 must be positive")
    w = TwoPointWitness(float(s2))
    s = Fraction(float(s2))
    p_hi = s / (1 + s)
    p_lo = 1 / (1 + s)
    mean = p_hi * 1 + p_lo * (-s)
    variance = p_hi * 1 + p_lo * s * s - mean * mean
    return w, WitnessRecord(mean, variance, p_hi, float(p_hi))
