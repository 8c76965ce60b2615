import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zoomsib.stein import (
    DegenerateEstimateError,
    ScoreFunction,
    SteinState,
    default_tau,
    normalize_l1,
    score,
    truncate,
)


def linear_samples(d, n, rng, sigma=0.1, theta=None):
    theta = np.eye(d)[0] if theta is None else theta
    X = rng.standard_normal((n, d))
    return X, X @ theta + sigma * rng.standard_normal(n)


def test_score_examples():
    np.testing.assert_array_equal(score(ScoreFunction(), [1.5, -2]), [1.5, -2])
    np.testing.assert_allclose(score(ScoreFunction([4, 1]), [2, 3]), [0.5, 3])
    np.testing.assert_array_equal(score(ScoreFunction(), np.zeros(3)), np.zeros(3))
    with pytest.raises(ValueError):
        ScoreFunction([1.0, 0.0])


def test_truncate_examples():
    np.testing.assert_array_equal(truncate([3, -0.5], 1), [1, -0.5])
    np.testing.assert_array_equal(truncate([-2, 2], 2), [-2, 2])
    v = np.array([1e9, -3.0])
    np.testing.assert_array_equal(truncate(v, math.inf), v)
    with pytest.raises(ValueError):
        truncate(v, 0)


def test_accumulate_examples():
    s = SteinState(2, tau=10).accumulate(np.array([1.0, 0.0]), 2.0)
    np.testing.assert_array_equal(s.running_sum, [2, 0])
    assert s.n == 1
    np.testing.assert_array_equal(s.estimate(), [2, 0])
    t = SteinState(2, tau=1).accumulate(np.array([1.0, 0.0]), 2.0)
    np.testing.assert_array_equal(t.running_sum, [1, 0])
    s.accumulate(np.array([1.0, 0.0]), 2.0)
    np.testing.assert_array_equal(s.running_sum, [4, 0])


def test_accumulate_many_matches_loop(rng):
    X, y = linear_samples(4, 300, rng)
    a, b = SteinState(4, tau=0.7), SteinState(4, tau=0.7)
    for x, yy in zip(X, y):
        a.accumulate(x, yy)
    b.accumulate_many(X, y)
    assert a.n == b.n == 300
    np.testing.assert_allclose(a.running_sum, b.running_sum, rtol=1e-12)


def test_estimate_needs_samples():
    with pytest.raises(ValueError):
        SteinState(3).estimate()


def test_normalize_examples():
    np.testing.assert_allclose(normalize_l1([0.2, -0.2]), [0.5, -0.5])
    v = np.array([0.25, -0.75])
    np.testing.assert_array_equal(normalize_l1(v), v)
    with pytest.raises(DegenerateEstimateError):
        normalize_l1([0.0, 0.0])


def test_default_tau_formula():
    assert default_tau(1000, 10, 0.1) == pytest.approx(math.sqrt(1000 / math.log(200)))


def test_stein_linear_oracle(rng):
    # E[y x] = E[f'] theta = theta for the identity link
    X, y = linear_samples(5, 100_000, rng)
    est = SteinState(5, tau=50).accumulate_many(X, y).estimate()
    assert np.abs(est - np.eye(5)[0]).sum() < 0.05


def test_stein_quadratic_oracle(rng):
    # f(z) = -(z-1)^2 + 1, f'(z) = -2(z-1), E[f'(Z)] = 2 for Z ~ N(0,1)
    d, n = 3, 200_000
    X = rng.standard_normal((n, d))
    z = X[:, 0]
    y = -((z - 1) ** 2) + 1 + 0.1 * rng.standard_normal(n)
    st_ = SteinState(d, tau=50).accumulate_many(X, y)
    assert np.abs(st_.estimate() / 2 - np.eye(d)[0]).sum() < 0.05
    assert st_.mu_estimate() == pytest.approx(2, abs=0.1)


def test_drift_check_examples():
    s = SteinState(2)
    s.accumulate(np.array([1.0, 0.0]), 1.0)
    assert s.drift_check(100) is False  # first checkpoint
    assert s.drift_check(200) is True  # identical estimate


@pytest.mark.parametrize("dist,expected", [(0.049, True), (0.051, False)])
def test_drift_threshold(dist, expected):
    s = SteinState(2)
    s.history.append((100, np.array([1.0, 0.0])))
    # estimate at l1 distance `dist` from (1, 0): (1 - dist/2, dist/2)
    s.running_sum = np.array([1 - dist / 2, dist / 2])
    s.n = 1
    assert s.drift_check(200, 100, 0.05) is expected


def test_drift_check_degenerate_is_false():
    s = SteinState(2)
    assert s.drift_check(100) is False
    s.accumulate(np.array([0.0, 0.0]), 1.0)
    assert s.drift_check(200) is False
    assert s.history == []


def _median_error(n, d=5, seeds=20):
    errs = []
    for seed in range(seeds):
        X, y = linear_samples(d, n, np.random.default_rng(1000 + seed))
        th = SteinState(d, tau=1e6).accumulate_many(X, y).normalized()
        errs.append(np.abs(th - np.eye(d)[0]).sum())
    return float(np.median(errs))


@pytest.mark.parametrize("n0", [2500, 10000])
def test_rate_halves_per_four_fold_n(n0):
    assert _median_error(4 * n0) <= 0.65 * _median_error(n0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_normalized_sandwich(seed, d):
    # ||theta0 - theta*||_1 <= 2 ||theta_hat - mu theta*||_1 / mu (here mu = 1)
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(d)
    theta /= np.abs(theta).sum()
    X, y = linear_samples(d, 2000, rng, theta=theta)
    st_ = SteinState(d).accumulate_many(X, y)
    eps = np.abs(st_.estimate() - theta).sum()
    assert np.abs(st_.normalized() - theta).sum() <= 2 * eps + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sign_consistency(seed):
    # with enough samples the largest coordinate carries the sign of theta*
    rng = np.random.default_rng(seed)
    d = 4
    j = int(rng.integers(d))
    theta = np.zeros(d)
    theta[j] = rng.choice([-1.0, 1.0])
    X, y = linear_samples(d, 5000, rng, theta=theta)
    th = SteinState(d).accumulate_many(X, y).normalized()
    assert int(np.argmax(np.abs(th))) == j
    assert np.sign(th[j]) == theta[j]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=8), st.floats(1e-3, 1e3))
def test_truncate_properties(v, tau):
    out = truncate(v, tau)
    assert np.all(np.abs(out) <= tau)
    assert np.all(np.sign(out) == np.sign(v))
    small = np.abs(v) <= tau
    np.testing.assert_array_equal(out[small], np.asarray(v)[small])
