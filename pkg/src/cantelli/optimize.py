"""Minimization of q(u) = <u, Sigma u> over a blocker region.

The Cantelli bound attached to a blocker point is g(u) = q(u) / (1 + q(u)),
and the sharp bound is its infimum over the region. Three routes compute it:

* :func:`closed_form_bound` when Sigma^{-1} b lies in the dual cone;
* :func:`minimize_over_region`, accelerated projected gradient with exact
  projections (a KKT residual certifies the result);
* :func:`brute_force_search`, seeded random search used as an independent
  oracle in low dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import linalg
from .blocker import BlockerRegion, ConeSlice, PolyhedralBlocker, find_witness
from .cones import Cone, Generators, Inequalities, Orthant
from .config import DEFAULT, Tolerances
from .errors import DimensionGuard, DimensionMismatch, InfeasibleRegion, ZeroThreshold

MAX_BRUTE_FORCE_DIM = 6


class Method(str, Enum):
    CLOSED_FORM = "ClosedForm"
    PROJECTED_GRADIENT = "ProjectedGradient"
    BRUTE_FORCE = "BruteForce"


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    u_star: np.ndarray
    q_star: float
    bound: float
    kkt_residual: float
    iterations: int
    method: Method
    converged: bool = True


@dataclass(frozen=True, eq=False)
class DualNormValue:
    value: float
    maximizer: np.ndarray


def cantelli_g(q: float) -> float:
    return q / (1.0 + q)


def _quad_rows(U: np.ndarray, S: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", U, S, U)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {l >= 0, sum(l) = 1} by sorting."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / idx > 0)
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _checked_sigma(Sigma, dim: int) -> np.ndarray:
    S = linalg.as_symmetric(Sigma)
    if S.shape[0] != dim:
        raise DimensionMismatch(f"covariance has order {S.shape[0]}, region dimension {dim}")
    linalg.cholesky(S)
    return S


def accelerated_projected_gradient(
    Q: np.ndarray,
    proj: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, float, bool]:
    """Minimize x^T Q x over a closed convex set given by its projection.

    Fixed step 1 / (2 lambda_max(Q)), Nesterov momentum with gradient-based
    restarts. Stops when the gradient-mapping norm
    ||x - P(x - a grad)|| / a drops below ``tol``.
    """
    lam = float(np.linalg.eigvalsh(Q)[-1])
    alpha = 1.0 / (2.0 * lam)

    def residual(x):
        return float(np.linalg.norm(x - proj(x - alpha * 2.0 * (Q @ x)))) / alpha

    x = proj(np.asarray(x0, dtype=float))
    y = x
    theta = 1.0
    stalled = 0
    for k in range(1, max_iter + 1):
        x_new = proj(y - alpha * 2.0 * (Q @ y))
        step = x_new - x
        if float((y - x_new) @ step) > 0.0:
            theta = 1.0
            y = x_new
        else:
            theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            y = x_new + ((theta - 1.0) / theta_new) * step
            theta = theta_new
        x = x_new
        size = float(np.linalg.norm(step))
        stalled = stalled + 1 if size <= 1e-16 * (1.0 + float(np.linalg.norm(x))) else 0
        if k % 10 == 0 or size <= tol * alpha or stalled:
            r = residual(x)
            if r <= tol:
                return x, k, r, True
            if stalled >= 50:
                return x, k, r, False
    return x, max_iter, residual(x), False


def minimize_over_region(Sigma, R: BlockerRegion, cfg: Tolerances = DEFAULT) -> OptimizeResult:
    """Minimize q over the region; the minimizer is unique in u."""
    S = _checked_sigma(Sigma, R.dim)
    if isinstance(R, ConeSlice):
        u0 = find_witness(R.cstar, R.b, cfg.witness_draws)
        if u0 is None:
            raise InfeasibleRegion("no point of C* pairs positively with b")
        x, iters, kkt, ok = accelerated_projected_gradient(S, R.project, u0, cfg.kkt_tol, cfg.max_iter)
        u = x
    elif isinstance(R, PolyhedralBlocker):
        m, n = R.rows.shape
        M = np.hstack([R.rows.T, np.eye(n)])  # u = A^T l + s
        Q = M.T @ S @ M
        Q = 0.5 * (Q + Q.T)

        def proj(z):
            return np.concatenate([project_simplex(z[:m]), np.maximum(z[m:], 0.0)])

        z0 = np.concatenate([np.full(m, 1.0 / m), np.zeros(n)])
        x, iters, kkt, ok = accelerated_projected_gradient(Q, proj, z0, cfg.kkt_tol, cfg.max_iter)
        u = M @ x
    else:
        raise TypeError(f"unsupported region {type(R).__name__}")
    q = float(u @ S @ u)
    ok = ok or kkt <= cfg.kkt_accept
    return OptimizeResult(u, q, cantelli_g(q), kkt, iters, Method.PROJECTED_GRADIENT, ok)


def slice_kkt_residual(Sigma, R: ConeSlice, u) -> float:
    S = np.asarray(Sigma, dtype=float)
    alpha = 1.0 / (2.0 * linalg.lambda_max(S))
    return float(np.linalg.norm(u - R.project(u - alpha * 2.0 * (S @ u)))) / alpha


def closed_form_bound(Sigma, b, C: Cone, cfg: Tolerances = DEFAULT) -> OptimizeResult | None:
    """Mahalanobis fast path.

    With w = Sigma^{-1} b in C*, the infimum is 1 / (1 + <b, w>) and is
    attained at u = w / <b, w>. Returns None when w is outside C*.
    """
    b = linalg.as_vector(b, C.dim)
    if not np.any(b):
        raise ZeroThreshold("threshold b must be nonzero")
    S = _checked_sigma(Sigma, C.dim)
    w = linalg.solve_spd(S, b)
    cstar = C.dual()
    if not cstar.contains(w, cfg.membership).inside:
        return None
    m = float(b @ w)
    u = w / m
    kkt = slice_kkt_residual(S, ConeSlice(cstar, b), u)
    return OptimizeResult(u, 1.0 / m, 1.0 / (1.0 + m), kkt, 0, Method.CLOSED_FORM)


def dual_norm(A, v) -> DualNormValue:
    """sup_u <u, v> / sqrt(<u, A u>) = sqrt(<v, A^{-1} v>), with its maximizer."""
    v = linalg.as_vector(v)
    w = linalg.solve_spd(A, v)
    if not np.any(v):
        return DualNormValue(0.0, np.zeros_like(v))
    value = math.sqrt(max(float(v @ w), 0.0))
    return DualNormValue(value, w / value)


# ---------------------------------------------------------------------------
# Brute-force oracle


class _SliceSampler:
    """Random points of C* for a cone slice.

    Polyhedral C* is sampled in a coefficient chart u = lam @ basis, lam >= 0.
    Half of every batch is drawn in ambient coordinates instead (Sigma-whitened
    for global draws) and pulled back into the chart by the pseudo-inverse, which
    keeps the search effective when the basis is ill-conditioned.
    """

    def __init__(self, cstar: Cone, S: np.ndarray):
        self.cstar = cstar
        if isinstance(cstar, (Orthant, Generators)):
            self.basis = cstar.generators()
        elif isinstance(cstar, Inequalities) and cstar.rays is not None:
            self.basis = cstar.rays
        else:
            self.basis = None
        if self.basis is not None:
            self.pullback = np.linalg.pinv(self.basis)
        self.whiten = np.linalg.inv(linalg.matrix_sqrt(S))

    def _chart(self, lam):
        lam = np.maximum(lam, 0.0)
        return lam, lam @ self.basis

    def draw(self, rng, size):
        half = size // 2
        X = rng.standard_normal((size - half, self.cstar.dim)) @ self.whiten
        if self.basis is None:
            Y = rng.standard_normal((half, self.cstar.dim))
            X = np.vstack([Y, X])
            return X, self.cstar.project_batch(X)
        lam = rng.standard_normal((half, self.basis.shape[0]))
        return self._chart(np.vstack([lam, X @ self.pullback]))

    def perturb(self, rng, center, scale, size):
        if self.basis is None:
            X = center + rng.standard_normal((size, center.size)) * scale
            return X, self.cstar.project_batch(X)
        half = size // 2
        lam = center + rng.standard_normal((half, center.size)) * scale
        u = center @ self.basis
        u_scale = scale * np.linalg.norm(u) / max(float(np.linalg.norm(center)), 1e-300)
        U = u + rng.standard_normal((size - half, u.size)) * u_scale
        return self._chart(np.vstack([lam, U @ self.pullback]))


def _search(objective, draw, perturb, budget: int, rng, rounds: int = 40):
    """Global draws followed by local perturbations of the incumbent.

    The perturbation scale is kept after a successful round and halved after
    an unsuccessful one.
    """
    n_global = budget // 2
    params, values = draw(rng, n_global)
    best_p, best_v = None, math.inf
    scores = objective(values)
    if scores.size and np.isfinite(scores).any():
        k = int(np.nanargmin(scores))
        best_p, best_v, best_u = params[k], float(scores[k]), values[k]
    if best_p is None:
        return None, math.inf
    per = max(1, (budget - n_global) // rounds)
    scale = 0.25 * max(float(np.max(np.abs(best_p))), 1e-12)
    for _ in range(rounds):
        params, values = perturb(rng, best_p, scale, per)
        scores = objective(values)
        k = int(np.argmin(scores)) if np.isfinite(scores).any() else -1
        if k >= 0 and scores[k] < best_v:
            best_p, best_v, best_u = params[k], float(scores[k]), values[k]
        else:
            scale *= 0.5
    return best_u, best_v


def _slice_objective(S, b, mode):
    def objective(U):
        p = U @ b
        q = _quad_rows(U, S)
        with np.errstate(divide="ignore", invalid="ignore"):
            if mode == "f":
                vals = q / (p * p + q)
            else:
                qs = q / (p * p)
                vals = qs / (1.0 + qs)
        return np.where(p > 1e-12 * np.linalg.norm(U, axis=1), vals, np.inf)

    return objective


def _guard(dim: int):
    if dim > MAX_BRUTE_FORCE_DIM:
        raise DimensionGuard(f"brute force is limited to dimension {MAX_BRUTE_FORCE_DIM}")


def brute_force_search(Sigma, R: BlockerRegion, budget: int = 100_000, seed: int = 0,
                       streams: int = 1) -> OptimizeResult:
    """Seeded random search for the minimum of g over the region.

    Cone-slice points come from random points of C* rescaled to <u, b> = 1
    (g is evaluated along rays by homogeneity); polyhedral-blocker points are
    random simplex weights on the rows plus non-negative slack. Stream i uses
    seed + i and the best stream wins.
    """
    _guard(R.dim)
    S = _checked_sigma(Sigma, R.dim)
    best_u, best_v = None, math.inf
    per_stream = max(1, budget // streams)
    for i in range(streams):
        rng = np.random.default_rng(seed + i)
        if isinstance(R, ConeSlice):
            sampler = _SliceSampler(R.cstar, S)
            u, v = _search(_slice_objective(S, R.b, "g"), sampler.draw, sampler.perturb, per_stream, rng)
            if u is not None:
                u = u / float(u @ R.b)
        else:
            u, v = _polyhedral_search(S, R, per_stream, rng)
        if v < best_v:
            best_u, best_v = u, v
    if best_u is None:
        raise InfeasibleRegion("random search found no point of the region")
    q = float(best_u @ S @ best_u)
    return OptimizeResult(best_u, q, cantelli_g(q), math.nan, budget, Method.BRUTE_FORCE)


def _polyhedral_search(S, R: PolyhedralBlocker, budget, rng):
    A = R.rows
    m, n = A.shape
    slack_scale = float(np.mean(A[A > 0]))

    def to_u(P):
        lam = P[:, :m]
        total = lam.sum(axis=1, keepdims=True)
        lam = np.where(total > 0, lam / np.where(total > 0, total, 1.0), 1.0 / m)
        return lam @ A + P[:, m:]

    def draw(rng, size):
        lam = rng.gamma(1.0, size=(size, m)) * (rng.random((size, m)) < 0.6)
        slack = rng.exponential(slack_scale, size=(size, n)) * (rng.random((size, n)) < 0.3)
        P = np.hstack([lam, slack])
        return P, to_u(P)

    def perturb(rng, center, scale, size):
        P = np.maximum(center + scale * rng.standard_normal((size, center.size)), 0.0)
        return P, to_u(P)

    def objective(U):
        q = _quad_rows(U, S)
        return q / (1.0 + q)

    return _search(objective, draw, perturb, budget, rng)


def brute_force_lambda_inf(Sigma, b, C: Cone, budget: int = 100_000, seed: int = 0) -> float:
    """Sampled infimum of f(u) = q(u) / (<u, b>^2 + q(u)) over C* with <u, b> > 0.

    No rescaling onto the blocker: f is evaluated at the raw cone points.
    """
    b = linalg.as_vector(b, C.dim)
    _guard(b.size)
    S = _checked_sigma(Sigma, b.size)
    sampler = _SliceSampler(C.dual(), S)
    rng = np.random.default_rng(seed)
    _, v = _search(_slice_objective(S, b, "f"), sampler.draw, sampler.perturb, budget, rng)
    if not math.isfinite(v):
        raise InfeasibleRegion("random search found no u in C* with <u, b> > 0")
    return v

