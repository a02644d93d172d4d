"""Closed convex cones in flat coordinates.

Five variants are supported: the nonnegative orthant, finitely generated
cones, cones cut out by homogeneous inequalities, the positive semidefinite
cone (in svec coordinates) and the second-order cone. Each exposes
membership, its dual cone and the Euclidean projection.

Polyhedral projections are computed exactly with non-negative least squares;
:func:`dykstra` is kept as an independent iterative route for intersections
of simple sets.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, ClassVar, Sequence

import numpy as np

from . import linalg
from .config import DEFAULT
from .errors import (
    DimensionMismatch,
    InvalidCone,
    NoConvergence,
    NotPolyhedral,
    SchemaError,
    SingularMap,
)


@dataclass(frozen=True)
class MembershipVerdict:
    inside: bool
    margin: float


class Cone(ABC):
    kind: ClassVar[str]

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient coordinate dimension."""

    @abstractmethod
    def margin(self, x: np.ndarray) -> float:
        """Signed membership margin; non-negative exactly on the cone."""

    @abstractmethod
    def dual(self) -> "Cone":
        ...

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def to_json(self) -> dict:
        ...

    def _check(self, x) -> np.ndarray:
        return linalg.as_vector(x, self.dim)

    def contains(self, x, tol: float = DEFAULT.membership) -> MembershipVerdict:
        m = self.margin(self._check(x))
        return MembershipVerdict(bool(m >= -tol), float(m))

    def margins(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.margin(x) for x in X])

    def contains_batch(self, X, tol: float = DEFAULT.membership) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"samples have dimension {X.shape[1]}, cone {self.dim}")
        return self.margins(X) >= -tol

    def project_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.project(x) for x in np.atleast_2d(X)])

    @property
    def is_polyhedral(self) -> bool:
        return False


def _as_rows(data, name: str) -> np.ndarray:
    M = np.asarray(data, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise InvalidCone(f"{name} must be a non-empty list of vectors")
    if not np.all(np.isfinite(M)):
        raise InvalidCone(f"{name} contain non-finite entries")
    if np.any(np.linalg.norm(M, axis=1) == 0.0):
        raise InvalidCone(f"{name} must be nonzero vectors")
    return M


def _unit_rows(M: np.ndarray) -> np.ndarray:
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def _relative(v: float, x: np.ndarray) -> float:
    nx = float(np.linalg.norm(x))
    return v / nx if nx > 0.0 else 0.0


@dataclass(frozen=True)
class Orthant(Cone):
    n: int
    kind: ClassVar[str] = "orthant"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidCone("orthant dimension must be positive")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def is_polyhedral(self) -> bool:
        return True

    def margin(self, x):
        return float(np.min(x))

    def margins(self, X):
        return np.atleast_2d(X).min(axis=1)

    def dual(self):
        return self

    def project(self, x):
        return np.maximum(self._check(x), 0.0)

    def project_batch(self, X):
        return np.maximum(X, 0.0)

    def generators(self) -> np.ndarray:
        return np.eye(self.n)

    def to_json(self):
        return {"type": self.kind, "dim": self.n}


@dataclass(frozen=True)
class SecondOrder(Cone):
    """{x : x[0] >= ||x[1:]||}."""

    n: int
    kind: ClassVar[str] = "soc"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidCone("second-order cone dimension must be positive")

    @property
    def dim(self) -> int:
        return self.n

    def margin(self, x):
        return float(x[0] - np.linalg.norm(x[1:]))

    def margins(self, X):
        X = np.atleast_2d(X)
        return X[:, 0] - np.linalg.norm(X[:, 1:], axis=1)

    def dual(self):
        return self

    def project(self, x):
        return self.project_batch(self._check(x)[None, :])[0]

    def project_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t = X[:, 0]
        z = X[:, 1:]
        nz = np.linalg.norm(z, axis=1)
        out = np.zeros_like(X)
        inside = nz <= t
        out[inside] = X[inside]
        mid = ~inside & (nz > -t)
        if np.any(mid):
            a = 0.5 * (t[mid] + nz[mid])
            out[mid, 0] = a
            out[mid, 1:] = (a / nz[mid])[:, None] * z[mid]
        return out

    def to_json(self):
        return {"type": self.kind, "dim": self.n}


@dataclass(frozen=True)
class PositiveSemidefinite(Cone):
    """PSD matrices of the given order, in svec coordinates."""

    order: int
    kind: ClassVar[str] = "psd"

    def __post_init__(self):
        if self.order < 1:
            raise InvalidCone("PSD order must be positive")

    @property
    def dim(self) -> int:
        return linalg.svec_dim(self.order)

    def margin(self, x):
        return float(np.linalg.eigvalsh(linalg.smat(x))[0])

    def margins(self, X):
        return np.linalg.eigvalsh(linalg.smat_batch(np.atleast_2d(X), self.order))[:, 0]

    def dual(self):
        return self

    def project(self, x):
        return self.project_batch(self._check(x)[None, :])[0]

    def project_batch(self, X):
        S = linalg.smat_batch(np.atleast_2d(np.asarray(X, dtype=float)), self.order)
        w, Q = np.linalg.eigh(S)
        P = (Q * np.maximum(w, 0.0)[:, None, :]) @ np.swapaxes(Q, 1, 2)
        return linalg.svec_batch(P)

    def to_json(self):
        return {"type": self.kind, "dim": self.order}


@dataclass(frozen=True, eq=False)
class Generators(Cone):
    """cone(G) = {sum_i l_i g_i : l_i >= 0}, generators are the rows of G."""

    G: np.ndarray
    kind: ClassVar[str] = "generators"

    def __post_init__(self):
        object.__setattr__(self, "G", _as_rows(self.G, "generators"))

    @property
    def dim(self) -> int:
        return self.G.shape[1]

    @property
    def is_polyhedral(self) -> bool:
        return True

    def generators(self) -> np.ndarray:
        return self.G

    @cached_property
    def facets(self) -> np.ndarray | None:
        """Inequality normals of the cone, or None if it is not full-dimensional."""
        if np.linalg.matrix_rank(self.G) < self.dim:
            return None
        return _unit_rows(extreme_rays(self.G))

    def _nnls(self, x):
        coef, _ = linalg.nnls(self.G.T, x)
        return self.G.T @ coef

    def margin(self, x):
        return -float(np.linalg.norm(x - self._nnls(x))) / max(1.0, float(np.linalg.norm(x)))

    def contains_batch(self, X, tol=DEFAULT.membership):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"samples have dimension {X.shape[1]}, cone {self.dim}")
        F = self.facets
        if F is None:
            return super().contains_batch(X, tol)
        norms = np.maximum(np.linalg.norm(X, axis=1), 1.0)
        return (X @ F.T).min(axis=1) >= -tol * norms

    def dual(self):
        return Inequalities(self.G)

    def project(self, x):
        return self._nnls(self._check(x))

    def to_json(self):
        return {"type": self.kind, "dim": self.dim, "data": self.G.tolist()}


@dataclass(frozen=True, eq=False)
class Inequalities(Cone):
    """{x : <h_i, x> >= 0 for every row h_i of H}."""

    H: np.ndarray
    kind: ClassVar[str] = "inequalities"

    def __post_init__(self):
        object.__setattr__(self, "H", _as_rows(self.H, "inequality normals"))

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    @property
    def is_polyhedral(self) -> bool:
        return True

    @cached_property
    def _unit(self) -> np.ndarray:
        return _unit_rows(self.H)

    @cached_property
    def rays(self) -> np.ndarray | None:
        """Extreme rays, or None if the cone contains a line."""
        if np.linalg.matrix_rank(self.H) < self.dim:
            return None
        return extreme_rays(self.H)

    def margin(self, x):
        return _relative(float(np.min(self._unit @ x)), x)

    def margins(self, X):
        X = np.atleast_2d(X)
        norms = np.linalg.norm(X, axis=1)
        raw = (X @ self._unit.T).min(axis=1)
        return np.where(norms > 0, raw / np.where(norms > 0, norms, 1.0), 0.0)

    def dual(self):
        return Generators(self.H)

    def project(self, x):
        # Moreau: x = P_C(x) + P_{-C*}(x) and C* = cone(H).
        x = self._check(x)
        p = x + self.dual().project(-x)
        # Cancellation leaves rounding noise when the projection is the apex.
        if np.linalg.norm(p) <= 64 * np.finfo(float).eps * np.linalg.norm(x):
            return np.zeros_like(x)
        return p

    def to_json(self):
        return {"type": self.kind, "dim": self.dim, "data": self.H.tolist()}


def contains(C: Cone, x, tol: float = DEFAULT.membership) -> MembershipVerdict:
    return C.contains(x, tol)


def dual(C: Cone) -> Cone:
    return C.dual()


def project(C: Cone, x) -> np.ndarray:
    return C.project(x)


def extreme_rays(H, tol: float = 1e-9) -> np.ndarray:
    """Extreme rays of the pointed cone {x : H x >= 0} by vertex enumeration.

    Every ray is the one-dimensional null space of some n-1 rows of H that
    satisfies the remaining inequalities. Exponential in general; meant for
    the small dimensions used for brute-force checks.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    m, n = H.shape
    if np.linalg.matrix_rank(H) < n:
        raise InvalidCone("cone {x : Hx >= 0} contains a line")
    unit = _unit_rows(H)
    found: list[np.ndarray] = []
    for subset in itertools.combinations(range(m), n - 1):
        if n == 1:
            candidates = [np.ones(1)]
        else:
            _, s, vt = np.linalg.svd(unit[list(subset)])
            if s.size < n - 1 or s[-1] <= tol:
                continue
            candidates = [vt[-1]]
        for r in candidates:
            for sign in (1.0, -1.0):
                ray = sign * r
                if np.min(unit @ ray) >= -tol:
                    if not any(np.linalg.norm(ray - f) <= 1e-7 for f in found):
                        found.append(ray)
    if not found:
        raise InvalidCone("cone has no extreme rays (it is trivial)")
    return np.array(found)


def dykstra(
    projectors: Sequence[Callable[[np.ndarray], np.ndarray]],
    x0,
    tol: float = DEFAULT.dykstra_tol,
    max_iter: int = DEFAULT.dykstra_max_iter,
) -> np.ndarray:
    """Nearest point of an intersection of closed convex sets.

    Cycles through the individual projections with Dykstra's correction
    terms. Stops when, over one cycle, neither the iterate nor any correction
    term moves by more than ``tol``; the iterate alone can stall far from the
    solution.
    """
    x = np.array(x0, dtype=float)
    increments = [np.zeros_like(x) for _ in projectors]
    for _ in range(max_iter):
        x_start = x
        change = 0.0
        for i, proj in enumerate(projectors):
            y = x + increments[i]
            x = proj(y)
            change = max(change, float(np.linalg.norm(y - x - increments[i])))
            increments[i] = y - x
        if max(change, float(np.linalg.norm(x - x_start))) <= tol:
            return x
    raise NoConvergence(f"Dykstra did not converge in {max_iter} cycles")


def halfspace_projector(h, c: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """Projection onto {x : <h, x> >= c}."""
    h = np.asarray(h, dtype=float)
    hh = float(h @ h)

    def proj(x):
        gap = float(h @ x) - c
        return x if gap >= 0.0 else x - (gap / hh) * h

    return proj


def polyhedral_projection_dykstra(C: Cone, x, **kwargs) -> np.ndarray:
    """Project onto an inequality cone by Dykstra over its halfspaces."""
    if not isinstance(C, Inequalities):
        raise NotPolyhedral("Dykstra route is defined for inequality cones")
    return dykstra([halfspace_projector(h) for h in C.H], x, **kwargs)


def _invertible(M, n: int) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (n, n):
        raise DimensionMismatch(f"map has shape {M.shape}, cone dimension {n}")
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > 1e12:
        raise SingularMap("linear map is singular or numerically singular")
    return M


def _generator_rows(C: Cone) -> np.ndarray:
    if isinstance(C, (Orthant, Generators)):
        return C.generators()
    raise NotPolyhedral(f"{C.kind} cone has no generator description")


def linear_image(C: Cone, M) -> Cone:
    """The cone M(C) for an invertible matrix M."""
    M = _invertible(M, C.dim)
    if isinstance(C, Inequalities):
        # y = Mx, Hx >= 0  <=>  H M^{-1} y >= 0
        return Inequalities(np.linalg.solve(M.T, C.H.T).T)
    return Generators(_generator_rows(C) @ M.T)


def dual_of_linear_image(C: Cone, M) -> Cone:
    """(M C)* = {u : M^T u in C*}."""
    M = _invertible(M, C.dim)
    if isinstance(C, Inequalities):
        # C* = cone(H), so (MC)* = M^{-T} cone(H)
        return Generators(np.linalg.solve(M.T, C.H.T).T)
    return Inequalities(_generator_rows(C) @ M.T)


_KINDS = {"orthant", "generators", "inequalities", "psd", "soc"}


def cone_from_json(obj: dict) -> Cone:
    """Parse ``{"type": ..., "dim": n, "data": [[...], ...]}``.

    For ``psd`` the ``dim`` field is the matrix order; the cone lives in
    dimension n(n+1)/2.
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise SchemaError("cone must be an object with a 'type' field")
    kind = obj["type"]
    if kind not in _KINDS:
        raise SchemaError(f"unknown cone type {kind!r}")
    dim = obj.get("dim")
    if kind in ("generators", "inequalities"):
        data = obj.get("data")
        if not data:
            raise SchemaError(f"{kind} cone needs a non-empty 'data' list")
        try:
            rows = np.asarray(data, dtype=float)
        except (TypeError, ValueError):
            raise SchemaError("cone data must be a rectangular list of numbers") from None
        cone = Generators(rows) if kind == "generators" else Inequalities(rows)
        if dim is not None and dim != cone.dim:
            raise SchemaError(f"cone dim {dim} does not match data width {cone.dim}")
        return cone
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaError(f"{kind} cone needs a positive integer 'dim'")
    return {"orthant": Orthant, "psd": PositiveSemidefinite, "soc": SecondOrder}[kind](dim)


def random_cone_point(C: Cone, rng: np.random.Generator, size: int) -> np.ndarray:
    """Random points of C, with positive mass on lower-dimensional faces."""
    X = rng.standard_normal((size, C.dim))
    if isinstance(C, (Orthant, Generators)) or (isinstance(C, Inequalities) and C.rays is not None):
        R = C.generators() if not isinstance(C, Inequalities) else C.rays
        lam = np.maximum(rng.standard_normal((size, R.shape[0])), 0.0)
        return lam @ R
    return C.project_batch(X)
