import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_mt import (
    DomainError,
    OutcomeTable,
    Pi0Estimate,
    PValueSample,
    RngStream,
    StylizedTailModel,
    adaptive_bh,
    bh_stepup,
    err_exact,
    hard_threshold,
    orthant_check,
    psi_bound,
    qvalue_threshold,
    qvalues,
)

P4 = PValueSample([0.01, 0.02, 0.03, 0.5])
samples = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=80).map(PValueSample)
levels = st.floats(0.001, 0.999)


def brute_bh(p, q, m_ref=None):
    m = len(p)
    m_ref = m if m_ref is None else m_ref
    ps = sorted(p)
    k = max([k for k in range(1, m + 1) if ps[k - 1] <= q * k / m_ref], default=0)
    return k


def test_hard_threshold_counts():
    t = hard_threshold(PValueSample([0.01, 0.04, 0.2]), 0.05, truth=[1, 0, 1])
    assert (t.v, t.s, t.r) == (1, 1, 2)


def test_hard_threshold_extremes():
    s = PValueSample([0.3, 0.6, 0.9])
    assert not hard_threshold(s, 0.0).any()
    t = hard_threshold(s, 1.0, truth=[0, 1, 1])
    assert (t.r, t.v, t.s) == (3, 1, 2)


def test_outcome_table_invariants():
    with pytest.raises(DomainError):
        OutcomeTable(v=1, s=1, r=3, m0=2, m1=2)


def test_bh_examples():
    res = bh_stepup(P4, 0.05)
    assert res.rejections == 3 and res.alpha == 0.03
    assert bh_stepup(PValueSample([0.9] * 5), 0.05).rejections == 0
    assert bh_stepup(PValueSample([0.04]), 0.05).rejections == 1


def test_adaptive_bh_hand():
    res = adaptive_bh(P4, 0.05, Pi0Estimate(0.5, "fixed"))
    assert res.params["m0"] == 2 and res.rejections == 3


@settings(max_examples=200)
@given(samples, levels)
def test_adaptive_bh_with_unit_pi0_is_bh(s, q):
    assert adaptive_bh(s, q, Pi0Estimate(1.0, "fixed")).rejections == bh_stepup(s, q).rejections


@settings(max_examples=200)
@given(samples, levels, st.floats(0.05, 0.999))
def test_adaptive_bh_rejects_more(s, q, pi0):
    assert adaptive_bh(s, q, Pi0Estimate(pi0, "fixed")).rejections >= bh_stepup(s, q).rejections


@settings(max_examples=200)
@given(samples, levels)
def test_bh_matches_brute_force(s, q):
    assert bh_stepup(s, q).rejections == brute_bh(list(s.values), q)


@given(samples)
def test_qvalues_monotone_in_p(s):
    qv = qvalues(s)
    order = np.argsort(s.values, kind="stable")
    assert np.all(np.diff(qv[order]) >= 0)
    assert np.all(qv <= 1.0)


def test_single_qvalue():
    assert qvalues(PValueSample([0.37]))[0] == 0.37


def test_qvalue_rejection_set_equals_bh():
    rng = np.random.default_rng(12)
    for _ in range(1000):
        m = int(rng.integers(1, 201))
        p = np.concatenate([rng.uniform(size=m - m // 4), rng.beta(0.2, 3.0, size=m // 4)])
        q = float(rng.choice([0.01, 0.05, 0.1, 0.2]))
        s = PValueSample(p)
        k = brute_bh(list(p), q)
        bh_set = set(np.argsort(p, kind="stable")[:k]) if k else set()
        if k:
            assert set(np.nonzero(p <= bh_stepup(s, q).alpha)[0]) == bh_set
        assert set(np.nonzero(qvalues(s) <= q)[0]) == bh_set
        assert qvalue_threshold(s, q).rejections == k


def test_err_all_null():
    m, alpha = 20, 0.01
    cdfs = [lambda a: a] * m
    assert err_exact(cdfs, alpha, [True] * m) == pytest.approx(1 - (1 - alpha) ** m, rel=1e-13)


def test_err_no_nulls():
    assert err_exact([lambda a: math.sqrt(a)], 0.1, [False]) == 0.0


def test_err_hand_example():
    val = err_exact([lambda a: a, math.sqrt], 0.25, [True, False])
    assert val == pytest.approx(5 / 24, rel=1e-13)


def test_err_hand_example_monte_carlo():
    # P1 ~ U(0,1), P2 with cdf sqrt(t): V = 1{P1 <= a}, R = V + 1{P2 <= a}
    rng = RngStream(3)
    n = 400_000
    p1 = rng.uniform(n)
    p2 = rng.uniform(n) ** 2
    v = (p1 <= 0.25).astype(float)
    r = v + (p2 <= 0.25)
    mc = v.mean() / r.mean() * np.mean(r > 0)
    assert mc == pytest.approx(5 / 24, abs=0.004)


def test_psi_limit():
    val = psi_bound(StylizedTailModel(1, 1, 1, 1, 1.0, 10**6), alpha0=0.22)
    assert val == pytest.approx(1 - (1 - 0.22e-6) ** 10**6, rel=1e-9)
    assert abs(val - (1 - math.exp(-0.22))) < 1e-4


def test_psi_alpha0_one():
    val = psi_bound(StylizedTailModel(1, 1, 1, 1, 1.0, 10**6), alpha0=1.0)
    assert val == pytest.approx(0.6321, abs=1e-4)


@pytest.mark.parametrize("xi", [0.3, 0.5, 0.8])
def test_psi_decays(xi):
    vals = [psi_bound(StylizedTailModel(1, 1, 1, xi, 0.9, m), gamma=2.0) for m in (10**3, 10**4, 10**5)]
    assert vals[0] > vals[1] > vals[2]


def test_tail_model_domain():
    with pytest.raises(DomainError):
        StylizedTailModel(1, 1.5, 1, 0.5, 0.9, 100)


def test_orthant_independent_uniforms():
    res = orthant_check(lambda rng, n: rng.uniform((n, 5)), 0.1, 20000, RngStream(1))
    assert res.passed
    assert res.lhs == pytest.approx(0.9**5, abs=4 * res.se + 1e-3)


def test_orthant_single_coordinate():
    res = orthant_check(lambda rng, n: rng.uniform((n, 1)), 0.2, 1000, RngStream(2))
    assert res.lhs == res.rhs and res.passed


def test_orthant_detects_negative_dependence():
    # antithetic pair: P2 = 1 - P1 is negatively orthant dependent at alpha = 0.4
    def sampler(rng, n):
        u = rng.uniform(n)
        return np.column_stack([u, 1 - u])

    assert not orthant_check(sampler, 0.4, 20000, RngStream(3)).passed
