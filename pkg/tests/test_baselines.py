import math

import numpy as np
import pytest

from zoomsib.baselines import (
    ETCBins,
    GreedyProjection,
    OraclePolicy,
    RandomPolicy,
    etc_exploration_length,
    greedy_projection_select,
    random_select,
)
from zoomsib.env import SIBInstance, SyntheticEnvironment, draw_theta_star, get_link, instant_regret
from zoomsib.policy import ZoomSIBConfig

from conftest import contexts_with_projections, make_instance


def test_random_singleton():
    rng = np.random.default_rng(0)
    assert all(random_select(np.zeros((1, 3)), rng) == 0 for _ in range(20))


def test_random_binomial_frequencies():
    rng = np.random.default_rng(5)
    X = np.zeros((20, 2))
    n = 100_000
    picks = np.array([random_select(X, rng) for _ in range(n)])
    freq = np.bincount(picks, minlength=20)
    p = 1 / 20
    sd = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(freq - n * p) <= 3 * sd)


def test_random_policy_deterministic():
    X = np.zeros((7, 2))
    p, q = RandomPolicy(np.random.default_rng(3)), RandomPolicy(np.random.default_rng(3))
    assert [p.select(X) for _ in range(50)] == [q.select(X) for _ in range(50)]


def test_greedy_projection_examples():
    X = contexts_with_projections([0.1, 0.9, 0.5])
    assert greedy_projection_select(np.array([1.0, 0.0]), X) == 1
    quad = make_instance("quadratic")
    Xq = contexts_with_projections([1, 3])
    a = greedy_projection_select(np.array([1.0, 0.0]), Xq)
    assert a == 1 and instant_regret(quad, Xq, a) == pytest.approx(4)


def test_greedy_projection_linear_zero_regret():
    inst = SIBInstance(3, [0.5, -0.3, 0.2], get_link("linear"), 0.0, 5)
    pol = GreedyProjection(ZoomSIBConfig(T=100, K=5), 3, np.random.default_rng(0))
    pol.force_theta(inst.theta_star)
    blk = SyntheticEnvironment(inst, 1).draw(200)
    for t in range(200):
        a = pol.select(blk.contexts[t])
        assert instant_regret(inst, blk.contexts[t], a) == 0


def test_etc_length_example():
    # 39^0.375 = 3.95047..., so ceil(3950.47) = 3951
    assert etc_exploration_length(10_000, 39) == math.ceil(39**0.375 * 10_000**0.75) == 3951
    assert etc_exploration_length(100, 1000) == 100


def test_etc_explores_then_greedy():
    pol = ETCBins(T=1000, K=2, d=2, rng=np.random.default_rng(0), W=4.0, width=1.0, N=8)
    pol.T1 = 4
    pol._X, pol._y = np.empty((4, 2)), np.empty(4)
    # exploration samples put bin 3 at mean 0.3 and bin 6 at mean 0.8
    for z, y in [(-1.5, 0.3), (-1.5, 0.3), (1.5, 0.8), (1.5, 0.8)]:
        pol.update(np.array([[z, 0.0]]), 0, y)
    assert pol.phase == "commit" and pol.t0_actual == 4
    assert pol.bin_means[3] == pytest.approx(0.3) and pol.bin_means[6] == pytest.approx(0.8)
    assert math.isinf(pol.bin_means[5]) and pol.bin_means[5] < 0
    s = np.sign(pol.theta_hat0[0])
    X = contexts_with_projections([s * -1.5, s * 1.5])
    X2 = X if s > 0 else X[::-1]
    assert pol.select(X2) == 1


def test_etc_exploration_regret_matches_uniform():
    # exploration is uniform, so its average instant regret tracks Random's
    inst = SIBInstance(5, draw_theta_star(5, np.random.default_rng(2)), get_link("zigzag"), 0.1, 20)
    T = 20_000
    blk = SyntheticEnvironment(inst, 3).draw(T)
    pol = ETCBins(T, 20, 5, np.random.default_rng(4))
    gaps = blk.means.max(axis=1, keepdims=True) - blk.means
    reg = []
    for t in range(pol.T1):
        a = pol.select(blk.contexts[t])
        pol.update(blk.contexts[t], a, blk.means[t, a] + blk.noise[t])
        reg.append(gaps[t, a])
    uniform = gaps[: len(reg)].mean()
    assert abs(np.mean(reg) - uniform) <= 0.1 * uniform


def test_oracle_zero_regret():
    inst = SIBInstance(4, draw_theta_star(4, np.random.default_rng(1), "dense"),
                       get_link("asymmetric"), 0.1, 10)
    pol = OraclePolicy(inst)
    blk = SyntheticEnvironment(inst, 0).draw(300)
    for t in range(300):
        X = blk.contexts[t]
        a = pol.select(X)
        assert a == int(np.argmax(blk.means[t]))
        assert instant_regret(inst, X, a) == 0
