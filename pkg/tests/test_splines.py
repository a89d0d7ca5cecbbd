import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import BSpline

from adaptive_mt import InsufficientDataError, KnotVector, PValueSample, build_knots, bspline_basis, vd_spline
from adaptive_mt.splines import basis_matrix, spline_derivative

interior_knots = st.lists(st.floats(0.001, 0.999), min_size=0, max_size=12).map(lambda xs: np.unique(np.round(xs, 6)))


def test_knots_for_large_p_values():
    s = PValueSample(np.linspace(0.3, 1.0, 1000))
    np.testing.assert_allclose(build_knots(s).interior, [0.001, 0.002, 0.003, 0.004])


def test_knots_need_five_values():
    with pytest.raises(InsufficientDataError):
        build_knots(PValueSample([0.1, 0.2, 0.3, 0.4]))


@settings(max_examples=50)
@given(st.lists(st.floats(0.0, 1.0), min_size=5, max_size=300))
def test_knots_strict_and_clamped(values):
    kv = build_knots(PValueSample(values))
    assert np.all(np.diff(kv.interior) > 0)
    assert np.all((kv.interior > 0) & (kv.interior < 1))
    assert np.all(kv.extended[:5] == 0) and np.all(kv.extended[-5:] == 1)
    assert np.all(np.diff(kv.extended) >= 0)


def test_order2_hat():
    kv = KnotVector([0.5], order=2)
    assert bspline_basis(kv, 1, 0.25) == pytest.approx(0.5)
    assert bspline_basis(kv, 2, 0.25) == pytest.approx(0.5)


def test_clamped_endpoint():
    kv = KnotVector([0.2, 0.5])
    assert bspline_basis(kv, 1, 0.0) == 1.0
    assert all(bspline_basis(kv, j, 0.0) == 0.0 for j in range(2, kv.n + 1))
    assert bspline_basis(kv, kv.n, 1.0) == 1.0


@settings(max_examples=100)
@given(interior_knots, st.floats(0.0, 1.0))
def test_partition_of_unity(interior, u):
    kv = KnotVector(interior)
    assert abs(basis_matrix(kv, np.array([u, 0.37])).sum(axis=1) - 1.0).max() <= 1e-12


@settings(max_examples=30)
@given(interior_knots)
def test_matches_scipy_bspline(interior):
    kv = KnotVector(interior)
    c = np.random.default_rng(len(interior)).normal(size=kv.n)
    u = np.linspace(0, 1, 201)
    ref = BSpline(kv.extended, c, kv.order - 1)
    s = vd_spline(lambda x: np.zeros_like(x), kv)
    s = type(s)(kv, c)
    np.testing.assert_allclose(s(u), ref(u), atol=1e-12)
    np.testing.assert_allclose(s.derivative(u), ref.derivative()(u), atol=1e-9)


@pytest.mark.parametrize("c", [0.0, 0.3, -2.0])
def test_constant_reproduction(c):
    s = vd_spline(lambda x: c, KnotVector([0.1, 0.4, 0.41, 0.9]))
    np.testing.assert_allclose(s(np.linspace(0, 1, 101)), c, atol=1e-14)
    np.testing.assert_allclose(s.derivative(np.linspace(0, 1, 101)), 0.0, atol=1e-10)


@settings(max_examples=50)
@given(interior_knots, st.floats(-5, 5), st.floats(-5, 5))
def test_linear_reproduction(interior, a, b):
    kv = KnotVector(interior)
    s = vd_spline(lambda x: a + b * x, kv)
    u = np.linspace(0, 1, 1001)
    assert np.max(np.abs(s(u) - (a + b * u))) <= 1e-10


def test_derivative_of_linear():
    s = vd_spline(lambda x: 2 * x, KnotVector([0.01, 0.2, 0.7]))
    np.testing.assert_allclose(spline_derivative(s, np.linspace(0, 1, 50)), 2.0, atol=1e-8)


def test_derivative_central_difference():
    kv = build_knots(PValueSample(np.random.default_rng(3).beta(0.4, 2.0, 500)))
    s = vd_spline(np.sqrt, kv)
    u = np.random.default_rng(4).uniform(0.01, 0.99, 100)
    eps = 1e-5
    fd = (s(u + eps) - s(u - eps)) / (2 * eps)
    assert np.max(np.abs(s.derivative(u) - fd)) <= 1e-4


@settings(max_examples=100)
@given(interior_knots, st.integers(0, 2**31))
def test_monotone_preservation(interior, seed):
    kv = KnotVector(interior)
    coef = np.cumsum(np.random.default_rng(seed).exponential(size=kv.n))
    s = type(vd_spline(lambda x: x, kv))(kv, coef)
    assert np.all(np.diff(s(np.linspace(0, 1, 501))) >= -1e-12)


def test_scalar_only_function():
    import math

    s = vd_spline(lambda x: math.sqrt(x), KnotVector([0.25, 0.5]))
    assert s(1.0) == pytest.approx(1.0)
