"""Comparator policies.

``ETCBins`` and ``GreedyProjection`` are proxies, not reimplementations:
ETCBins keeps the long fixed ``d^(3/8) T^(3/4)`` exploration of the GSTOR
baseline followed by a greedy commit over projected bins, and
GreedyProjection keeps the monotone-link assumption of ESTOR by always
pulling the arm with the largest estimated projection.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .env import SIBInstance, best_mean
from .policy import (
    SteinExplorer,
    ZoomSIBConfig,
    _first_smallest_bin,
    assign_bins,
    derive_constants,
)
from .stein import SteinState, default_tau

__all__ = [
    "RandomPolicy",
    "GreedyProjection",
    "ETCBins",
    "OraclePolicy",
    "random_select",
    "greedy_projection_select",
    "etc_exploration_length",
]


def random_select(contexts: np.ndarray, rng: np.random.Generator) -> int:
    return int(rng.integers(contexts.shape[0]))


def greedy_projection_select(theta_hat0, contexts: np.ndarray) -> int:
    return int(np.argmax(contexts @ theta_hat0))


def etc_exploration_length(T: int, d: int, c_etc: float = 1.0,
                           t_exponent: float = 0.75, d_exponent: float = 0.375) -> int:
    return min(math.ceil(c_etc * d**d_exponent * T**t_exponent), T)


class RandomPolicy:
    name = "random"
    phase = "explore"
    t0_actual = None
    fallback_rounds = 0
    last_bin = None
    last_fallback = False

    def __init__(self, rng=None):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def select(self, contexts):
        return random_select(contexts, self.rng)

    def update(self, contexts, arm, y):
        pass


class GreedyProjection(SteinExplorer):
    """ESTOR proxy: Stein Phase 1 as in ZoomSIB, then argmax projection."""

    name = "greedy_projection"

    def _commit_select(self, contexts):
        return greedy_projection_select(self.theta_hat0, contexts)


class OraclePolicy:
    """Pulls the best arm under the true model; regret is identically zero."""

    name = "oracle"
    phase = "commit"
    t0_actual = None
    fallback_rounds = 0
    last_bin = None
    last_fallback = False

    def __init__(self, instance: SIBInstance):
        self.instance = instance

    def select(self, contexts):
        return best_mean(self.instance, contexts)[0]

    def update(self, contexts, arm, y):
        pass


class ETCBins:
    """GSTOR proxy: uniform exploration for ``T1`` rounds, then greedy on
    empirical bin means among the bins present in the round.

    The bin statistics come from the exploration samples, binned with the
    direction estimated from those same samples once exploration ends.
    Bins never visited during exploration have mean ``-inf``.
    """

    name = "etc_bins"

    def __init__(self, T: int, K: int, d: int, rng=None, c_etc: float = 1.0,
                 delta: float = 0.1, c_tau: float = 1.0, tau: Optional[float] = None,
                 width: Optional[float] = None, W: Optional[float] = None,
                 N: Optional[int] = None):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.T1 = etc_exploration_length(T, d, c_etc)
        self.const = derive_constants(
            ZoomSIBConfig(T=T, K=K, delta=delta, width=width, W=W, N=N), d
        )
        tau = tau if tau is not None else default_tau(self.T1, d, delta, c_tau)
        self.stein = SteinState(d, tau)
        self._X = np.empty((self.T1, d))
        self._y = np.empty(self.T1)
        self.phase = "explore"
        self.t = 0
        self.t0_actual = None
        self.theta_hat0 = None
        self.bin_means = None
        self.fallback_rounds = 0
        self.last_bin = None
        self.last_fallback = False

    def select(self, contexts):
        if self.phase == "explore":
            return random_select(contexts, self.rng)
        b = assign_bins(contexts @ self.theta_hat0, self.const.W, self.const.width, self.const.N)
        inside = b > 0
        if not inside.any():
            self.last_bin = None
            self.last_fallback = True
            return random_select(contexts, self.rng)
        vals = np.where(inside, self.bin_means[b], -math.inf)
        pick = inside & (vals == vals[inside].max())
        a = _first_smallest_bin(pick, b)
        self.last_bin = int(b[a])
        self.last_fallback = False
        return a

    def update(self, contexts, arm, y):
        if self.phase == "explore":
            self._X[self.t] = contexts[arm]
            self._y[self.t] = y
            self.t += 1
            if self.t >= self.T1:
                self._commit()
            return
        self.t += 1
        if self.last_fallback:
            self.fallback_rounds += 1

    def _commit(self):
        self.stein.accumulate_many(self._X, self._y)
        self.theta_hat0 = self.stein.normalized()
        c = self.const
        b = assign_bins(self._X @ self.theta_hat0, c.W, c.width, c.N)
        n = np.bincount(b, minlength=c.N + 1).astype(float)
        s = np.bincount(b, weights=self._y, minlength=c.N + 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            means = np.where(n > 0, s / n, -math.inf)
        means[0] = -math.inf
        self.bin_means = means
        self.phase = "commit"
        self.t0_actual = self.t
        self._X = self._y = None
