import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantelli.blocker import ConeSlice, PolyhedralBlocker
from cantelli.bounds import tail_bound_cone
from cantelli.cones import Orthant, dual_of_linear_image, linear_image
from cantelli.errors import DimensionGuard, NotPositiveDefinite
from cantelli.instances import random_feasible_instance, random_pd, random_rotation
from cantelli.optimize import (
    Method,
    brute_force_lambda_inf,
    brute_force_search,
    closed_form_bound,
    dual_norm,
    minimize_over_region,
    project_simplex,
)
from cantelli.bounds import scalarized_bound
from conftest import seeds


# ------------------------------------------------------------ examples


def test_one_dimensional_region():
    r = minimize_over_region([[1.0]], ConeSlice(Orthant(1), [1.0]))
    assert r.u_star[0] == pytest.approx(1.0)
    assert r.q_star == pytest.approx(1.0)
    assert r.bound == pytest.approx(0.5)
    assert r.method is Method.PROJECTED_GRADIENT


def test_diagonal_example_matches_closed_form():
    S, b = np.diag([1.0, 4.0]), np.array([1.0, 2.0])
    r = minimize_over_region(S, ConeSlice(Orthant(2), b))
    cf = closed_form_bound(S, b, Orthant(2))
    assert r.bound == pytest.approx(1 / 3, abs=1e-10)
    np.testing.assert_allclose(r.u_star, [0.5, 0.25], atol=1e-8)
    assert cf.bound == pytest.approx(1 / 3) and cf.method is Method.CLOSED_FORM
    np.testing.assert_allclose(cf.u_star, [0.5, 0.25])


def test_sign_mixed_threshold():
    S, b = np.eye(2), np.array([1.0, -1.0])
    assert closed_form_bound(S, b, Orthant(2)) is None
    r = minimize_over_region(S, ConeSlice(Orthant(2), b))
    assert r.bound == pytest.approx(0.5, abs=1e-10)
    np.testing.assert_allclose(r.u_star, [1.0, 0.0], atol=1e-8)
    assert r.kkt_residual <= 1e-6


def test_closed_form_examples():
    r = closed_form_bound(np.eye(2), [1.0, 0.0], Orthant(2))
    assert r.bound == pytest.approx(0.5)
    np.testing.assert_allclose(r.u_star, [1.0, 0.0])
    # Sigma^-1 = [[2, 1], [1, 2]] / 3 is non-negative and Sigma^-1 b = (1, 1), so m = 2.
    r = closed_form_bound([[2.0, -1.0], [-1.0, 2.0]], [1.0, 1.0], Orthant(2))
    assert r.bound == pytest.approx(1 / 3)
    assert r.q_star == pytest.approx(0.5)
    np.testing.assert_allclose(r.u_star, [0.5, 0.5])


def test_closed_form_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        closed_form_bound([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0], Orthant(2))


def test_dual_norm_examples():
    assert dual_norm(np.eye(2), [3.0, 4.0]).value == pytest.approx(5.0)
    assert dual_norm(np.diag([4.0, 1.0]), [2.0, 0.0]).value == pytest.approx(1.0)
    z = dual_norm(np.eye(2), [0.0, 0.0])
    assert z.value == 0.0 and not np.any(z.maximizer)


@given(seeds, st.integers(1, 6))
def test_dual_norm_is_supremum(seed, n):
    rng = np.random.default_rng(seed)
    A = random_pd(rng, n)
    v = rng.standard_normal(n)
    d = dual_norm(A, v)
    assert d.value**2 == pytest.approx(v @ np.linalg.solve(A, v), rel=1e-9)
    U = rng.standard_normal((2000, n))
    ratios = U @ v / np.sqrt(np.einsum("ij,jk,ik->i", U, A, U))
    assert ratios.max() <= d.value + 1e-9
    u = d.maximizer
    assert u @ v / math.sqrt(u @ A @ u) == pytest.approx(d.value, rel=1e-9)


def test_simplex_projection(rng):
    for _ in range(200):
        v = rng.standard_normal(int(rng.integers(1, 8))) * 3
        p = project_simplex(v)
        assert np.all(p >= 0) and p.sum() == pytest.approx(1.0)
        # Optimality against random simplex points.
        others = rng.dirichlet(np.ones(v.size), size=200)
        assert np.linalg.norm(v - p) <= np.min(np.linalg.norm(v - others, axis=1)) + 1e-12


# ------------------------------------------------------------ brute force


def test_brute_force_examples():
    r = brute_force_search([[1.0]], ConeSlice(Orthant(1), [1.0]), budget=10_000, seed=3)
    assert r.q_star == pytest.approx(1.0, abs=1e-3)
    assert r.method is Method.BRUTE_FORCE
    r = brute_force_search(np.diag([1.0, 4.0]), ConeSlice(Orthant(2), [1.0, 2.0]), 100_000, seed=0)
    assert r.bound == pytest.approx(1 / 3, abs=1e-3)


def test_brute_force_is_deterministic():
    R = ConeSlice(Orthant(3), [1.0, -0.5, 0.2])
    a = brute_force_search(np.eye(3), R, 5_000, seed=11)
    b = brute_force_search(np.eye(3), R, 5_000, seed=11)
    assert np.array_equal(a.u_star, b.u_star)
    c = brute_force_search(np.eye(3), R, 5_000, seed=11, streams=4)
    d = brute_force_search(np.eye(3), R, 5_000, seed=11, streams=4)
    assert np.array_equal(c.u_star, d.u_star)


def test_brute_force_dimension_guard():
    with pytest.raises(DimensionGuard):
        brute_force_search(np.eye(7), ConeSlice(Orthant(7), np.ones(7)), 100)


@given(seeds, st.integers(1, 4))
def test_brute_force_never_undercuts_optimizer(seed, n):
    rng = np.random.default_rng(seed)
    inst = random_feasible_instance(rng, n)
    R = ConeSlice(inst.cone.dual(), inst.b)
    opt = minimize_over_region(inst.sigma, R)
    bf = brute_force_search(inst.sigma, R, 4_000, seed)
    assert bf.bound >= opt.bound - 1e-9
    assert R.contains(bf.u_star)


def test_brute_force_polyhedral_region(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        A = rng.random((3, n)) + 0.05
        S = random_pd(rng, n)
        R = PolyhedralBlocker(A)
        opt = minimize_over_region(S, R)
        bf = brute_force_search(S, R, 20_000, 1)
        assert opt.bound - 1e-9 <= bf.bound <= opt.bound + 1e-3
        assert R.contains(bf.u_star) and R.contains(opt.u_star)


# ------------------------------------------------------------ properties


@given(seeds, st.integers(1, 4))
def test_homogeneity_of_f(seed, n):
    rng = np.random.default_rng(seed)
    S = random_pd(rng, n)
    b = rng.standard_normal(n)
    u = rng.standard_normal(n)
    if u @ b <= 0:
        u = -u
    if u @ b <= 1e-6:
        return
    f = scalarized_bound(S, b, u)
    for lam in (0.1, 2.0, 100.0):
        assert scalarized_bound(S, b, lam * u) == pytest.approx(f, rel=1e-12)


@given(seeds, st.integers(1, 4), st.sampled_from([0.25, 4.0]))
def test_scaling_invariance(seed, n, c):
    rng = np.random.default_rng(seed)
    inst = random_feasible_instance(rng, n)
    a = tail_bound_cone(inst.sigma, inst.b, inst.cone).bound
    b = tail_bound_cone(c * inst.sigma, math.sqrt(c) * inst.b, inst.cone).bound
    assert abs(a - b) <= 1e-8


@given(seeds, st.integers(1, 4))
def test_closed_form_optimizer_agreement(seed, n):
    rng = np.random.default_rng(seed)
    inst = random_feasible_instance(rng, n)
    cf = closed_form_bound(inst.sigma, inst.b, inst.cone)
    if cf is None:
        return
    opt = minimize_over_region(inst.sigma, ConeSlice(inst.cone.dual(), inst.b))
    assert abs(cf.bound - opt.bound) <= 1e-6
    assert np.linalg.norm(cf.u_star - opt.u_star) <= 1e-5


def test_result_invariants_and_kkt_perturbations(rng):
    for _ in range(30):
        n = int(rng.integers(1, 5))
        inst = random_feasible_instance(rng, n)
        R = ConeSlice(inst.cone.dual(), inst.b)
        r = minimize_over_region(inst.sigma, R)
        assert r.converged and r.kkt_residual <= 1e-6
        assert R.contains(r.u_star, 1e-7)
        assert 0.0 < r.bound < 1.0
        D = rng.standard_normal((1000, n))
        for d in D[:200]:
            v = R.project(r.u_star + 1e-3 * d)
            assert v @ inst.sigma @ v >= r.q_star - 1e-9


def test_isometry_invariance(rng):
    for _ in range(20):
        n = int(rng.integers(2, 5))
        inst = random_feasible_instance(rng, n)
        Q = random_rotation(rng, n)
        QC = linear_image(inst.cone, Q)
        a = tail_bound_cone(inst.sigma, inst.b, inst.cone).bound
        b = tail_bound_cone(Q @ inst.sigma @ Q.T, Q @ inst.b, QC).bound
        assert abs(a - b) <= 1e-6
        # The dual of the image is what the optimizer works over.
        U = rng.standard_normal((300, n))
        D = dual_of_linear_image(inst.cone, Q)
        keep = np.abs(inst.cone.dual().margins(U @ Q)) > 1e-6
        assert np.array_equal(D.contains_batch(U[keep]), inst.cone.dual().contains_batch(U[keep] @ Q))


def test_sampled_infimum_of_f_matches_blocker_minimum(rng):
    for i in range(10):
        n = int(rng.integers(1, 4))
        inst = random_feasible_instance(rng, n)
        opt = minimize_over_region(inst.sigma, ConeSlice(inst.cone.dual(), inst.b))
        inf_f = brute_force_lambda_inf(inst.sigma, inst.b, inst.cone, 20_000, seed=i)
        assert opt.bound - 1e-9 <= inf_f <= opt.bound + 1e-3
