"""Blocker sets.

The blocker of T is {u : <u, x> >= 1 for all x in T}. Two shapes occur here:

* ``ConeSlice``: the blocker of a shifted cone b + C, which equals
  C* intersected with the halfspace <u, b> >= 1;
* ``PolyhedralBlocker``: the blocker of {x >= 0 : A x >= 1} for a non-negative
  matrix A, which is conv(rows of A) + the nonnegative orthant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import linalg
from .cones import Cone, Generators, Inequalities, Orthant, dykstra, halfspace_projector, random_cone_point
from .config import DEFAULT
from .errors import (
    DimensionMismatch,
    EmptyRowSet,
    InfeasibleRegion,
    NegativeEntry,
    WitnessSearchFailed,
    ZeroThreshold,
)


@dataclass(frozen=True, eq=False)
class ConeSlice:
    cstar: Cone
    b: np.ndarray

    def __post_init__(self):
        b = linalg.as_vector(self.b)
        if b.size != self.cstar.dim:
            raise DimensionMismatch(f"threshold has dimension {b.size}, cone {self.cstar.dim}")
        if not np.any(b):
            raise ZeroThreshold("threshold b must be nonzero")
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.b.size

    def contains(self, u, tol: float = DEFAULT.region) -> bool:
        u = linalg.as_vector(u, self.dim)
        return bool(self.cstar.contains(u, tol).inside and u @ self.b >= 1.0 - tol)

    def project(self, x) -> np.ndarray:
        """Exact nearest point of the slice.

        The KKT conditions give P(x) = P_{C*}(x + t b) for the smallest t >= 0
        with <P_{C*}(x + t b), b> >= 1; the pairing is non-decreasing in t, so
        t is found by a bracketed root search.
        """
        x = np.asarray(x, dtype=float)
        b = self.b
        y = self.cstar.project(x)
        if y @ b >= 1.0:
            return y

        def gap(t):
            return float(self.cstar.project(x + t * b) @ b) - 1.0

        hi = max(1.0, float(np.linalg.norm(x))) / float(b @ b)
        for _ in range(200):
            if gap(hi) >= 0.0:
                break
            hi *= 2.0
        else:
            raise InfeasibleRegion("slice projection found no feasible multiplier")
        t = brentq(gap, 0.0, hi, xtol=1e-15 * hi, rtol=1e-15, maxiter=500)
        u = self.cstar.project(x + t * b)
        pairing = float(u @ b)
        # brentq may stop a hair on the infeasible side.
        return u / pairing if 0.0 < pairing < 1.0 else u

    def project_dykstra(self, x, **kwargs) -> np.ndarray:
        return dykstra([self.cstar.project, halfspace_projector(self.b, 1.0)], x, **kwargs)

    def describe(self) -> dict:
        return {"kind": "cone_slice", "dual_cone": self.cstar.to_json(), "b": self.b.tolist()}


@dataclass(frozen=True, eq=False)
class PolyhedralBlocker:
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _validate_rows(self.rows))

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def residual(self, u) -> float:
        """Least-squares distance proxy of u from conv(rows) + orthant.

        Solves min ||A^T l + s - u||^2 + (sum(l) - 1)^2 over l, s >= 0; zero
        exactly on the region.
        """
        u = linalg.as_vector(u, self.dim)
        m, n = self.rows.shape
        M = np.zeros((n + 1, m + n))
        M[:n, :m] = self.rows.T
        M[:n, m:] = np.eye(n)
        M[n, :m] = 1.0
        target = np.append(u, 1.0)
        _, res = linalg.nnls(M, target)
        return float(res)

    def contains(self, u, tol: float = DEFAULT.region) -> bool:
        return self.residual(u) <= tol

    def describe(self) -> dict:
        return {"kind": "polyhedral_blocker", "rows": self.rows.tolist()}


BlockerRegion = ConeSlice | PolyhedralBlocker


@dataclass(frozen=True, eq=False)
class FeasibilityVerdict:
    feasible: bool
    witness: np.ndarray | None = None


def _validate_rows(A) -> np.ndarray:
    rows = np.asarray(A, dtype=float)
    if rows.size == 0:
        raise EmptyRowSet("at least one row is required")
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.ndim != 2 or not np.all(np.isfinite(rows)):
        raise DimensionMismatch("rows must form a finite rectangular matrix")
    if np.any(rows < 0.0):
        raise NegativeEntry("rows must be entrywise non-negative")
    if np.any(~rows.any(axis=1)):
        raise EmptyRowSet("a zero row makes {x >= 0 : Ax >= 1} empty")
    return rows


def _generator_candidates(cstar: Cone) -> np.ndarray | None:
    if isinstance(cstar, (Orthant, Generators)):
        return cstar.generators()
    if isinstance(cstar, Inequalities):
        return cstar.rays
    return None


def find_witness(cstar: Cone, b: np.ndarray, draws: int = DEFAULT.witness_draws,
                 seed: int = 0) -> np.ndarray | None:
    """A point u of C* with <u, b> = 1, or None if none was found."""
    u = cstar.project(b)
    pairing = float(u @ b)
    if pairing > 1e-12 * float(np.linalg.norm(u) * np.linalg.norm(b)):
        return u / pairing
    gens = _generator_candidates(cstar)
    if gens is not None:
        scores = gens @ b / np.linalg.norm(gens, axis=1)
        k = int(np.argmax(scores))
        if scores[k] > 0.0:
            return gens[k] / float(gens[k] @ b)
    rng = np.random.default_rng(seed)
    X = random_cone_point(cstar, rng, draws)
    p = X @ b
    norms = np.linalg.norm(X, axis=1)
    scores = np.where(norms > 0, p / np.where(norms > 0, norms, 1.0), -np.inf)
    k = int(np.argmax(scores))
    if scores[k] > 0.0:
        return X[k] / p[k]
    return None


def feasibility(b, C: Cone, tol: float = DEFAULT.membership) -> FeasibilityVerdict:
    """The blocker of b + C is nonempty iff -b lies outside C."""
    b = linalg.as_vector(b, C.dim)
    if not np.any(b):
        raise ZeroThreshold("threshold b must be nonzero")
    if C.contains(-b, tol).inside:
        return FeasibilityVerdict(False)
    witness = find_witness(C.dual(), b)
    if witness is None:
        raise WitnessSearchFailed("feasible by membership but no witness found; geometry is near-degenerate")
    return FeasibilityVerdict(True, witness)


def blocker_of_shifted_cone(b, C: Cone) -> ConeSlice:
    if not feasibility(b, C).feasible:
        raise InfeasibleRegion("-b lies in C: the blocker of b + C is empty")
    return ConeSlice(C.dual(), b)


def blocker_of_polyhedron(A) -> PolyhedralBlocker:
    return PolyhedralBlocker(A)


def region_contains(R: BlockerRegion, u, tol: float = DEFAULT.region) -> bool:
    return R.contains(u, tol)
