"""Random problem generators shared by the experiment scripts and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocker import feasibility
from .cones import Cone, Generators, Inequalities, Orthant, SecondOrder


@dataclass(frozen=True, eq=False)
class ConeInstance:
    sigma: np.ndarray
    b: np.ndarray
    cone: Cone


def random_pd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    B = rng.standard_normal((n, n))
    return B @ B.T / n + floor * np.eye(n)


def random_nonnegative_inverse_cov(rng: np.random.Generator, n: int) -> np.ndarray:
    """A PD covariance whose inverse is entrywise non-negative."""
    B = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
    P = B @ B.T + (0.2 + rng.random()) * np.eye(n)
    return np.linalg.inv(P)


def random_rotation(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _pointed_rows(rng, n: int, m: int) -> np.ndarray:
    # Rows in the open halfspace of a random direction keep the cone pointed.
    d = rng.standard_normal(n)
    d /= np.linalg.norm(d)
    while True:
        Z = rng.standard_normal((m, n))
        Z += (np.abs(Z @ d) + 0.3)[:, None] * d - (Z @ d)[:, None] * d
        if np.linalg.matrix_rank(Z) == n:
            return Z


def random_polyhedral_cone(rng: np.random.Generator, n: int) -> Cone:
    m = int(rng.integers(n, n + 3))
    rows = _pointed_rows(rng, n, m)
    return Generators(rows) if rng.random() < 0.5 else Inequalities(rows)


def random_cone(rng: np.random.Generator, n: int, kinds=("orthant", "polyhedral")) -> Cone:
    """kinds: any of "orthant", "polyhedral", "second_order" (the latter needs n >= 2)."""
    if n < 2:
        kinds = tuple(k for k in kinds if k != "second_order") or ("orthant",)
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "orthant":
        return Orthant(n)
    if kind == "second_order":
        return SecondOrder(n)
    if kind == "polyhedral":
        return random_polyhedral_cone(rng, n)
    raise ValueError(f"unknown cone kind {kind!r}")


def random_feasible_instance(rng: np.random.Generator, n: int, kinds=("orthant", "polyhedral")) -> ConeInstance:
    """(Sigma, b, C) with -b outside C, so the blocker of b + C is nonempty."""
    while True:
        C = random_cone(rng, n, kinds)
        b = rng.standard_normal(n)
        if np.linalg.norm(b) > 0.1 and feasibility(b, C).feasible:
            return ConeInstance(random_pd(rng, n), b, C)


def random_nonnegative_rows(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    A = rng.random((m, n)) * (rng.random((m, n)) < 0.7)
    for i in range(m):
        if not A[i].any():
            A[i, rng.integers(n)] = rng.random() + 0.1
    return A
