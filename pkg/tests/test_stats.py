import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantelli import stats
from cantelli.errors import (
    BadAlpha,
    DeviationNotPositive,
    InverseNotNonnegative,
    KmaxTooLarge,
    MinorNotPD,
    NonPositiveMean,
)
from cantelli.instances import random_nonnegative_inverse_cov
from conftest import seeds

HALF = stats.SignificanceConfig(0.5)


def test_lambda_examples():
    assert stats.significance_lambda([1, 1], np.eye(2), HALF) == pytest.approx(1 / math.sqrt(2))
    assert stats.significance_lambda([2, 2], np.eye(2), HALF) == pytest.approx(1 / (2 * math.sqrt(2)))


def test_lambda_errors():
    with pytest.raises(BadAlpha):
        stats.SignificanceConfig(1.0)
    with pytest.raises(NonPositiveMean):
        stats.significance_lambda([1, 0], np.eye(2))
    with pytest.raises(InverseNotNonnegative):
        stats.significance_lambda([1, 1], [[2.0, 1.0], [1.0, 2.0]])


def test_default_alpha():
    assert stats.SignificanceConfig().alpha == 0.05


@given(seeds, st.integers(1, 5), st.floats(0.001, 0.999))
def test_lambda_round_trip(seed, n, alpha):
    rng = np.random.default_rng(seed)
    S = random_nonnegative_inverse_cov(rng, n)
    mu = rng.random(n) + 0.1
    lam = stats.significance_lambda(mu, S, stats.SignificanceConfig(alpha))
    m = mu @ np.linalg.solve(S, mu)
    assert 1 / (1 + lam**2 * m) == pytest.approx(alpha, abs=1e-12)


def test_largeness_examples():
    r = stats.test_large([2, 2], [1, 1], np.eye(2), HALF)
    assert r.verdict is stats.Verdict.LARGE
    assert r.lam == pytest.approx(0.70710678) and r.min_ratio == pytest.approx(1.0)
    r = stats.test_large([1.5, 1.1], [1, 1], np.eye(2), HALF)
    assert r.verdict is stats.Verdict.NOT_LARGE and r.min_ratio == pytest.approx(0.1)
    lam = stats.significance_lambda([1, 1], np.eye(2), HALF)
    y = (1 + lam) * np.array([1.0, 1.0])
    assert stats.test_large(y, [1, 1], np.eye(2), HALF).verdict is stats.Verdict.LARGE


def test_largeness_report_carries_printed_variants():
    r = stats.test_large([2, 2], [1, 1], np.eye(2), HALF)
    assert r.lam_printed == pytest.approx(0.5)
    assert r.printed_rule_value == pytest.approx(1.0)
    assert len(r.notes) >= 2
    assert r.to_json()["verdict"] == "Large"


def test_printed_rule_disagreement_is_flagged():
    # min(y/mu - 1) = 0.6 < lambda = 0.707, but min y/(1+mu) = 0.8 >= printed lambda = 0.5.
    r = stats.test_large([1.6, 1.6], [1, 1], np.eye(2), HALF)
    assert r.verdict != r.printed_rule_verdict
    assert any("disagree" in n for n in r.notes)


@given(seeds, st.integers(1, 4))
def test_verdict_matches_event(seed, n):
    rng = np.random.default_rng(seed)
    S = random_nonnegative_inverse_cov(rng, n)
    mu = rng.random(n) + 0.1
    y = mu * (1 + rng.random(n) * 2)
    r = stats.test_large(y, mu, S, HALF)
    assert (r.verdict is stats.Verdict.LARGE) == bool(np.all(y >= (1 + r.lam) * mu))


def test_deviation_examples():
    assert stats.deviation_significance([2, 2], [1, 1], np.eye(2)) == pytest.approx((2.0, 1 / 3))
    # Sigma^-1 = [[2, 1], [1, 2]] / 3 gives <d, Sigma^-1 d> = 2 for d = (1, 1).
    n2, bound = stats.deviation_significance([2, 2], [1, 1], [[2.0, -1.0], [-1.0, 2.0]])
    assert n2 == pytest.approx(2.0) and bound == pytest.approx(1 / 3)
    with pytest.raises(DeviationNotPositive):
        stats.deviation_significance([2, 1 + 1e-16], [1, 1], np.eye(2))


def test_sherman_morrison_examples():
    cov = stats.RankOneCovariance([2.0, 2.0], 0.5, [1.0, 1.0])
    np.testing.assert_allclose(stats.sherman_morrison_minor_inverse(cov, [0]), [[2 / 3]])
    np.testing.assert_allclose(stats.sherman_morrison_minor_inverse(cov, [0, 1]), [[0.75, 0.25], [0.25, 0.75]])
    tiny = stats.RankOneCovariance([3.0, 5.0], 1e-14, [1.0, 1.0])
    np.testing.assert_allclose(stats.sherman_morrison_minor_inverse(tiny, [0, 1]), np.diag([1 / 3, 1 / 5]), atol=1e-14)


def test_sherman_morrison_denominator_guard():
    cov = stats.RankOneCovariance([1.0, 1.0, 1.0], 0.3, [1.0, 1.0, 1.0])
    object.__setattr__(cov, "gamma", 0.5)  # bypass the PD check to reach the guard
    with pytest.raises(MinorNotPD):
        stats.sherman_morrison_minor_inverse(cov, [0, 1])


def _random_cov(rng, n):
    D = rng.random(n) + 0.5
    u = rng.random(n)
    gamma = 0.9 / float(u @ (u / D)) * rng.random()
    return stats.RankOneCovariance(D, max(gamma, 1e-6), u)


def test_sherman_morrison_matches_direct_inverse(rng):
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        cov = _random_cov(rng, n)
        k = int(rng.integers(1, min(n, 4) + 1))
        J = sorted(rng.choice(n, size=k, replace=False).tolist())
        direct = np.linalg.inv(cov.sigma[np.ix_(J, J)])
        worst = max(worst, np.max(np.abs(stats.sherman_morrison_minor_inverse(cov, J) - direct)))
    assert worst <= 1e-9


def test_scan_examples():
    cov = stats.RankOneCovariance([1.0, 1.0], 0.1, [1.0, 1.0])
    res = stats.coordinate_subset_scan([4.0, 1.1], [1.0, 1.0], cov, kmax=1)
    assert [f.subset for f in res.findings] == [(0,), (1,)]
    full = stats.coordinate_subset_scan([4.0, 1.1], [1.0, 1.0], cov, kmax=2).findings
    whole = [f for f in full if f.subset == (0, 1)][0]
    assert (whole.deviation_norm2, whole.bound) == pytest.approx(
        stats.deviation_significance([4.0, 1.1], [1.0, 1.0], cov.sigma))


def test_scan_lists_ineligible_subsets():
    cov = stats.RankOneCovariance([1.0, 1.0, 1.0], 0.1, [1.0, 1.0, 1.0])
    res = stats.coordinate_subset_scan([2.0, 0.5, 2.0], [1.0, 1.0, 1.0], cov, kmax=2)
    assert (1,) in res.ineligible and (0, 1) in res.ineligible
    assert all(1 not in f.subset for f in res.findings)


def test_scan_kmax_guard():
    cov = stats.RankOneCovariance([1.0] * 6, 0.1, [1.0] * 6)
    with pytest.raises(KmaxTooLarge):
        stats.coordinate_subset_scan(np.full(6, 2.0), np.ones(6), cov, kmax=5)


def test_scan_monotone_under_nesting(rng):
    for _ in range(100):
        n = int(rng.integers(2, 6))
        cov = _random_cov(rng, n)
        mu = rng.random(n) + 0.5
        y = mu + rng.random(n) + 0.01
        res = stats.coordinate_subset_scan(y, mu, cov, kmax=min(n, 4))
        by = {f.subset: f.bound for f in res.findings}
        for J, bound in by.items():
            for j in range(n):
                K = tuple(sorted(set(J) | {j}))
                if K in by:
                    assert by[K] <= bound + 1e-10


def test_scan_findings_reproducible(rng):
    cov = _random_cov(rng, 4)
    mu = np.ones(4)
    y = mu + rng.random(4) + 0.1
    for f in stats.coordinate_subset_scan(y, mu, cov, 3).findings:
        J = list(f.subset)
        d = (y - mu)[J]
        n2 = d @ np.linalg.solve(cov.sigma[np.ix_(J, J)], d)
        assert f.deviation_norm2 == pytest.approx(n2, abs=1e-10)
        assert f.bound == pytest.approx(1 / (1 + n2), abs=1e-10)
