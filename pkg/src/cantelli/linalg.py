"""Dense symmetric linear algebra in coordinates.

Vectors are 1-D float arrays and symmetric matrices are 2-D float arrays that
have passed :func:`as_symmetric`. The symmetric-matrix space is coordinatized
by :func:`svec`, which scales off-diagonal entries by sqrt(2) so that the
Euclidean inner product of coordinates equals the Frobenius inner product
trace(S @ T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .config import DEFAULT
from .errors import (
    DimensionMismatch,
    LengthNotTriangular,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
)

SQRT2 = math.sqrt(2.0)


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.size}")
    return v


def as_symmetric(S, tol: float = DEFAULT.symmetry) -> np.ndarray:
    """Validate a square, finite, symmetric matrix and return it symmetrized.

    Symmetry is checked relative to the largest entry.
    """
    A = np.asarray(S, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (A + A.T)


def from_lower_triangle(rows) -> np.ndarray:
    """Build a symmetric matrix from ragged lower-triangle rows [[a], [b, c], ...]."""
    n = len(rows)
    A = np.zeros((n, n))
    for i, row in enumerate(rows):
        if len(row) != i + 1:
            raise LengthNotTriangular(f"row {i} has {len(row)} entries, expected {i + 1}")
        A[i, : i + 1] = row
    return A + np.tril(A, -1).T


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    lower: np.ndarray
    order: int

    def solve(self, v: np.ndarray) -> np.ndarray:
        return cho_solve((self.lower, True), v)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    values: np.ndarray  # non-increasing
    vectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def cholesky(S, pivot_tol: float = DEFAULT.pd_pivot) -> CholeskyFactor:
    """Cholesky factor of a positive definite matrix.

    A pivot (squared diagonal entry of the factor) at or below
    ``pivot_tol * trace(S) / n`` counts as a failure.
    """
    A = as_symmetric(S)
    n = A.shape[0]
    trace = float(np.trace(A))
    if trace <= 0.0:
        raise NotPositiveDefinite("trace is not positive")
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.min(np.diag(L)) ** 2 <= pivot_tol * trace / n:
        raise NotPositiveDefinite("Cholesky pivot below threshold")
    return CholeskyFactor(L, n)


def is_positive_definite(S, pivot_tol: float = DEFAULT.pd_pivot) -> bool:
    try:
        cholesky(S, pivot_tol)
    except NotPositiveDefinite:
        return False
    return True


def solve_spd(S, v) -> np.ndarray:
    """Solve S x = v for positive definite S."""
    factor = cholesky(S)
    v = as_vector(v)
    if v.size != factor.order:
        raise DimensionMismatch(f"matrix order {factor.order} vs vector length {v.size}")
    return factor.solve(v)


def spd_inverse(S) -> np.ndarray:
    factor = cholesky(S)
    inv = factor.solve(np.eye(factor.order))
    return 0.5 * (inv + inv.T)


def sym_eigen(S) -> EigenDecomposition:
    A = as_symmetric(S)
    try:
        values, vectors = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from None
    return EigenDecomposition(values[::-1].copy(), vectors[:, ::-1].copy())


def lambda_max(S) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(S))[-1])


def matrix_sqrt(A) -> np.ndarray:
    """The symmetric positive definite square root of A."""
    cholesky(A)
    eig = sym_eigen(A)
    B = (eig.vectors * np.sqrt(eig.values)) @ eig.vectors.T
    return 0.5 * (B + B.T)


def svec_dim(n: int) -> int:
    return n * (n + 1) // 2


def order_from_svec_dim(m: int) -> int:
    n = int(round((math.isqrt(8 * m + 1) - 1) / 2))
    if n < 1 or svec_dim(n) != m:
        raise LengthNotTriangular(f"{m} is not a triangular number")
    return n


def _tril_scale(n: int) -> tuple[tuple[np.ndarray, np.ndarray], np.ndarray]:
    rows, cols = np.tril_indices(n)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return (rows, cols), scale


def svec(S) -> np.ndarray:
    """Lower triangle in row-major order, off-diagonals scaled by sqrt(2)."""
    A = as_symmetric(S)
    idx, scale = _tril_scale(A.shape[0])
    return A[idx] * scale


def smat(v, n: int | None = None) -> np.ndarray:
    v = as_vector(v)
    order = order_from_svec_dim(v.size)
    if n is not None and n != order:
        raise LengthNotTriangular(f"length {v.size} does not match order {n}")
    idx, scale = _tril_scale(order)
    A = np.zeros((order, order))
    A[idx] = v / scale
    return A + np.tril(A, -1).T


def smat_batch(V: np.ndarray, n: int) -> np.ndarray:
    """Rows of V (svec coordinates) to a stack of symmetric matrices."""
    idx, scale = _tril_scale(n)
    out = np.zeros((V.shape[0], n, n))
    out[:, idx[0], idx[1]] = V / scale
    out[:, idx[1], idx[0]] = V / scale
    return out


def svec_batch(S: np.ndarray) -> np.ndarray:
    idx, scale = _tril_scale(S.shape[-1])
    return S[:, idx[0], idx[1]] * scale


def quadratic_form(u, S) -> float:
    u = as_vector(u)
    S = np.asarray(S, dtype=float)
    if S.shape != (u.size, u.size):
        raise DimensionMismatch(f"vector length {u.size} vs matrix shape {S.shape}")
    return float(u @ S @ u)


def nnls(A, b, max_iter: int | None = None) -> tuple[np.ndarray, float]:
    """argmin ||A x - b|| over x >= 0 by the Lawson-Hanson active-set method.

    Returns the minimizer and the residual norm. The solution satisfies the
    KKT conditions to working precision: the gradient A^T (b - A x) is at
    most a rounding-level tolerance off the support and zero on it.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    max_iter = 3 * n + 30 if max_iter is None else max_iter
    tol = 10.0 * np.finfo(float).eps * max(m, n) * max(float(np.abs(A).sum(axis=0).max()), 1.0) \
        * max(float(np.linalg.norm(b)), 1.0)
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    w = A.T @ b
    for _ in range(max_iter):
        free = ~passive & ~blocked
        if not free.any() or w[free].max() <= tol:
            break
        j = int(np.argmax(np.where(free, w, -np.inf)))
        passive[j] = True
        while True:
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if np.all(z[passive] > 0.0):
                x = z
                break
            if z[j] <= 0.0 and not x[j] > 0.0:
                # Entering variable cannot move: rounding-level gradient.
                passive[j] = False
                blocked[j] = True
                break
            shrink = passive & (z <= 0.0)
            alpha = float(np.min(x[shrink] / (x[shrink] - z[shrink])))
            x = x + alpha * (z - x)
            passive &= x > tol * 1e-3
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
        if not blocked[j]:
            blocked[:] = False
    else:
        raise NoConvergence(f"NNLS did not converge in {max_iter} outer iterations")
    return x, float(np.linalg.norm(A @ x - b))
