import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spdnn.penalty import (
    PenaltyParams,
    clipped_norm,
    effective_sparsity,
    l0_norm,
    penalty_subgradient,
    penalty_value,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
thetas = arrays(np.float64, st.integers(1, 30), elements=finite)
taus = st.floats(1e-3, 10.0)


def test_clipped_norm_examples():
    assert clipped_norm([0.0, 0.0, 0.0], 0.5) == 0.0
    assert clipped_norm([2.0, 0.5], 1.0) == 1.5
    theta = np.array([3.0, -0.7, 0.0, 5.0])
    assert clipped_norm(theta, 0.7) == l0_norm(theta)


def test_penalty_value_examples():
    assert penalty_value([1.0, -4.0], PenaltyParams(0.0, 0.3)) == 0.0
    assert penalty_value([2.0, 0.5], PenaltyParams(0.1, 1.0)) == pytest.approx(0.15, rel=1e-15)
    for tau in (1e-3, 0.5, 7.0):
        assert penalty_value([tau / 2], PenaltyParams(1.0, tau)) == pytest.approx(0.5, rel=1e-15)


def test_subgradient_examples():
    p = PenaltyParams(1.0, 0.5)
    g = penalty_subgradient([0.0, 0.2, -0.2, 0.9, 0.5, -0.5], p)
    np.testing.assert_array_equal(g, [0.0, 2.0, -2.0, 0.0, 0.0, 0.0])


def test_l0_examples():
    assert l0_norm([0.0, 0.0]) == 0
    assert l0_norm([1.0, 0.0, -3.0]) == 2
    assert effective_sparsity([1e-7, -1e-7, 1e-5]) == 1
    assert l0_norm([1e-7, -1e-7, 1e-5]) == 3


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_nonpositive_tau_rejected(tau):
    with pytest.raises(ValueError):
        clipped_norm([1.0], tau)
    with pytest.raises(ValueError):
        PenaltyParams(1.0, tau)


def test_negative_lambda_rejected():
    with pytest.raises(ValueError):
        PenaltyParams(-0.1, 1.0)


@given(thetas, taus)
def test_bounds(theta, tau):
    c = clipped_norm(theta, tau)
    assert 0.0 <= c
    assert c <= l0_norm(theta)
    assert c <= np.abs(theta).sum() / tau * (1 + 1e-12)


@given(thetas, taus, st.floats(0.01, 100.0))
def test_scale_relation(theta, tau, c):
    assert clipped_norm(c * theta, c * tau) == pytest.approx(clipped_norm(theta, tau), rel=1e-12, abs=1e-12)


@given(thetas, taus, st.integers(0, 29), st.floats(0.0, 5.0))
def test_monotone_in_each_coordinate(theta, tau, k, bump):
    k %= theta.size
    bigger = theta.copy()
    bigger[k] = np.sign(theta[k] or 1.0) * (abs(theta[k]) + bump)
    assert clipped_norm(bigger, tau) >= clipped_norm(theta, tau)


@settings(max_examples=200)
@given(thetas, taus, st.floats(0.0, 3.0))
def test_subgradient_matches_finite_differences(theta, tau, lam):
    # the penalty is a sum over coordinates, so each slope is differenced on its own term
    p = PenaltyParams(lam, tau)
    h = 1e-6 * tau
    off_kink = (np.abs(theta) > 2 * h) & (np.abs(np.abs(theta) - tau) > 2 * h)
    assume(off_kink.any())
    g = penalty_subgradient(theta, p)
    for k in np.flatnonzero(off_kink):
        t = theta[k]
        fd = (penalty_value([t + h], p) - penalty_value([t - h], p)) / (2 * h)
        assert abs(fd - g[k]) <= 1e-8 * max(1.0, abs(g[k]))
