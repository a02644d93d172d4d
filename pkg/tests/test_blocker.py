import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantelli import linalg
from cantelli.blocker import (
    ConeSlice,
    PolyhedralBlocker,
    blocker_of_polyhedron,
    blocker_of_shifted_cone,
    feasibility,
    region_contains,
)
from cantelli.bounds import cycle_graph
from cantelli.cones import Orthant, PositiveSemidefinite, SecondOrder, random_cone_point
from cantelli.errors import EmptyRowSet, InfeasibleRegion, NegativeEntry, ZeroThreshold
from cantelli.instances import random_cone, random_nonnegative_rows
from conftest import seeds


def test_feasibility_examples():
    assert not feasibility([-1, -1], Orthant(2)).feasible
    v = feasibility([1, -1], Orthant(2))
    assert v.feasible and ConeSlice(Orthant(2), [1, -1]).contains(v.witness)
    assert not feasibility(linalg.svec(-np.eye(2)), PositiveSemidefinite(2)).feasible


def test_feasibility_rejects_zero_threshold():
    with pytest.raises(ZeroThreshold):
        feasibility([0, 0], Orthant(2))


def test_blocker_of_shifted_cone():
    R = blocker_of_shifted_cone([1.0], Orthant(1))
    assert R.contains([1.0]) and R.contains([5.0]) and not R.contains([0.99])
    with pytest.raises(InfeasibleRegion):
        blocker_of_shifted_cone([-1, -1], Orthant(2))


def test_region_contains_examples():
    R = ConeSlice(Orthant(2), [1, 1])
    assert region_contains(R, [1, 0])
    assert not region_contains(R, [0.4, 0.4])
    T = blocker_of_polyhedron(cycle_graph(4).incidence())
    assert region_contains(T, [0.5] * 4)


def test_polyhedral_blocker_examples():
    P = blocker_of_polyhedron([[1.0, 1.0]])
    assert P.contains([1.0, 1.0]) and P.contains([3.0, 1.0]) and not P.contains([0.9, 1.0])
    P = blocker_of_polyhedron(np.eye(2))
    for lam in np.linspace(0, 1, 11):
        assert P.contains([lam, 1 - lam])
    assert not P.contains([0.4, 0.4])


def test_polyhedral_blocker_validation():
    with pytest.raises(NegativeEntry):
        PolyhedralBlocker([[1.0, -0.1]])
    with pytest.raises(EmptyRowSet):
        PolyhedralBlocker([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(EmptyRowSet):
        PolyhedralBlocker(np.zeros((0, 2)))


def test_blocker_rows_separate_the_polyhedron(rng):
    # Every point of the blocker pairs to at least 1 with every point of T.
    for _ in range(20):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        A = random_nonnegative_rows(rng, n, m)
        X = rng.exponential(3.0, size=(4000, n))
        T = X[np.all(X @ A.T >= 1.0, axis=1)]
        lam = rng.dirichlet(np.ones(m), size=200)
        U = lam @ A + rng.exponential(0.2, size=(200, n)) * (rng.random((200, n)) < 0.3)
        R = blocker_of_polyhedron(A)
        assert all(R.contains(u) for u in U[:30])
        if T.size:
            assert np.min(U @ T.T) >= 1.0 - 1e-12


def test_anti_monotonicity(rng):
    # Raising the threshold shrinks b + C, so its blocker grows:
    # b' >= b > 0 gives b(b + C) inside b(b' + C).
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        b = rng.random(n) + 0.05
        bp = b + rng.exponential(0.5, n)
        u = rng.exponential(1.0, n) * (rng.random(n) < 0.8)
        if region_contains(ConeSlice(Orthant(n), b), u):
            assert region_contains(ConeSlice(Orthant(n), bp), u)


def test_slice_membership_matches_sampled_definition(rng):
    # u is in b(b + C) iff <u, b + c> >= 1 for all c in C.
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        b = rng.random(n) + 0.05
        u = rng.standard_normal(n) + 0.5
        member = ConeSlice(Orthant(n), b).contains(u, 0.0)
        C = rng.exponential(1.0, size=(100, n)) * (rng.random((100, n)) < 0.5)
        holds_on_sample = np.min((b + C) @ u) >= 1.0
        if member:
            assert holds_on_sample
        # Extreme rays of the orthant decide the converse exactly.
        rays_ok = u @ b >= 1.0 and np.all(u >= 0.0)
        assert member == rays_ok


def test_cross_representation(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        b = rng.random(n) + 0.2
        S = ConeSlice(Orthant(n), b)
        P = PolyhedralBlocker(np.diag(1.0 / b))
        U = rng.exponential(1.0 / (n * b), size=(20, n)) * (rng.random((20, n)) < 0.8)
        for u in U:
            slack = abs(u @ b - 1.0)
            if slack > 1e-6:
                assert S.contains(u) == P.contains(u)


def test_feasibility_matches_random_search(rng):
    for i in range(200):
        n = int(rng.integers(1, 5))
        C = random_cone(rng, n, kinds=("orthant", "polyhedral", "polyhedral"))
        b = rng.standard_normal(n)
        verdict = feasibility(b, C)
        U = random_cone_point(C.dual(), np.random.default_rng(i), 10_000)
        found = bool(np.any(U @ b > 1e-12 * np.linalg.norm(U, axis=1) * np.linalg.norm(b)))
        assert verdict.feasible == found
        if verdict.feasible:
            assert ConeSlice(C.dual(), b).contains(verdict.witness)


def test_witness_for_second_order_cone():
    v = feasibility([0.0, 1.0, 0.0], SecondOrder(3))
    assert v.feasible
    assert ConeSlice(SecondOrder(3), [0.0, 1.0, 0.0]).contains(v.witness)


@given(seeds, st.integers(1, 4))
def test_slice_projection_lands_in_slice_and_matches_dykstra(seed, n):
    rng = np.random.default_rng(seed)
    C = random_cone(rng, n)
    b = rng.standard_normal(n)
    if not feasibility(b, C).feasible:
        return
    R = ConeSlice(C.dual(), b)
    x = rng.standard_normal(n) * 2.0
    p = R.project(x)
    assert R.contains(p, 1e-9)
    q = R.project_dykstra(x, tol=1e-12, max_iter=200_000)
    assert R.contains(q, 1e-6)
    assert np.linalg.norm(x - p) <= np.linalg.norm(x - q) + 1e-7
    assert np.linalg.norm(p - q) <= 1e-5 * (1 + np.linalg.norm(x))


def test_slice_projection_optimality(rng):
    R = ConeSlice(SecondOrder(3), [1.0, 0.3, -0.2])
    pts = random_cone_point(SecondOrder(3), rng, 2000)
    pts = pts[pts @ R.b >= 1.0]
    for x in rng.standard_normal((100, 3)) * 2:
        p = R.project(x)
        assert np.all(np.linalg.norm(x - p) <= np.linalg.norm(x - pts, axis=1) + 1e-9)
