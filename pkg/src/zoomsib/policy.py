"""ZoomSIB-UCB: Stein exploration, then sleeping UCB over projected bins."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .stein import (
    STANDARD_GAUSSIAN,
    DegenerateEstimateError,
    ScoreFunction,
    SteinState,
    default_tau,
    normalize_l1,
)

__all__ = [
    "Adaptive",
    "Theoretical",
    "ZoomSIBConfig",
    "Constants",
    "derive_constants",
    "assign_bin",
    "assign_bins",
    "bin_centers",
    "ucb_index",
    "SteinExplorer",
    "ZoomSIB",
]


@dataclass(frozen=True)
class Adaptive:
    """Stop exploring once consecutive normalized estimates stop drifting."""

    check_interval: int = 100
    drift_threshold: float = 0.05
    cap_fraction: float = 0.4


@dataclass(frozen=True)
class Theoretical:
    """Fixed budget ``c_polylog * d^2 * T^(2/3) * log^2(dT/delta)``, capped."""

    c_polylog: float = 1.0
    cap_fraction: float = 0.4


@dataclass(frozen=True)
class ZoomSIBConfig:
    T: int
    K: int
    delta: float = 0.1
    L_f: float = 1.0
    noise_sigma_assumed: float = 0.1
    t0_mode: Union[Adaptive, Theoretical] = field(default_factory=Adaptive)
    c_tau: float = 1.0
    tau: Optional[float] = None
    score_fn: ScoreFunction = STANDARD_GAUSSIAN
    # overrides of the derived constants
    width: Optional[float] = None
    W: Optional[float] = None
    L: Optional[float] = None
    N: Optional[int] = None

    def __post_init__(self):
        if self.T < 1 or self.K < 1:
            raise ValueError("T and K must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.t0_mode.cap_fraction <= 1:
            raise ValueError("cap_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class Constants:
    L: float
    W: float
    width: float
    N: int
    T0: Optional[int]  # None in adaptive mode
    cap: int


def derive_constants(cfg: ZoomSIBConfig, d: int) -> Constants:
    T, delta = cfg.T, cfg.delta
    L = cfg.L if cfg.L is not None else 4.0 * math.sqrt(math.log(d * T / delta))
    W = cfg.W if cfg.W is not None else 4.0 * math.sqrt(math.log(T / delta))
    width = cfg.width if cfg.width is not None else T ** (-1.0 / 3.0)
    N = cfg.N if cfg.N is not None else math.ceil(2.0 * W / width)
    cap = math.ceil(cfg.t0_mode.cap_fraction * T)
    T0 = None
    if isinstance(cfg.t0_mode, Theoretical):
        budget = cfg.t0_mode.c_polylog * d**2 * T ** (2.0 / 3.0) * math.log(d * T / delta) ** 2
        T0 = min(math.ceil(budget), cap)
    return Constants(L, W, width, N, T0, cap)


def assign_bin(z_hat: float, W: float, width: float, N: int) -> Optional[int]:
    """1-based bin of ``z_hat`` in the partition of ``[-W, W]``, or None
    when it falls outside the window."""
    if not abs(z_hat) <= W:
        return None
    j = math.ceil((z_hat + W) / width)
    return min(max(j, 1), N)


def assign_bins(z_hat: np.ndarray, W: float, width: float, N: int) -> np.ndarray:
    """Vectorized :func:`assign_bin`; 0 marks an out-of-window value."""
    b = np.ceil((z_hat + W) / width)
    np.clip(b, 1, N, out=b)
    b = b.astype(np.intp)
    b[~(np.abs(z_hat) <= W)] = 0
    return b


def bin_centers(W: float, width: float, N: int) -> np.ndarray:
    j = np.arange(1, N + 1)
    return -W + (j - 0.5) * width


def _radius_coef(cfg: ZoomSIBConfig, N: int) -> float:
    var = cfg.noise_sigma_assumed**2 + cfg.L_f**2
    return math.sqrt(2.0 * var * math.log(4.0 * N * cfg.T / cfg.delta))


def ucb_index(n_j: int, S_j: float, cfg: ZoomSIBConfig, N: int) -> float:
    if n_j == 0:
        return math.inf
    return S_j / n_j + _radius_coef(cfg, N) / math.sqrt(n_j)


def _first_smallest_bin(mask: np.ndarray, bins: np.ndarray) -> int:
    # among arms in mask: smallest bin, then smallest arm
    idx = np.flatnonzero(mask)
    if idx.size == 1:
        return int(idx[0])
    return int(idx[np.argmin(bins[idx])])


class SteinExplorer:
    """Shared Phase 1: uniform pulls feeding a truncated Stein estimate.

    Subclasses implement :meth:`_commit_select` and may override
    :meth:`_commit_update`.
    """

    name = "stein-explorer"

    def __init__(self, cfg: ZoomSIBConfig, d: int, rng=None):
        self.cfg = cfg
        self.d = d
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.const = derive_constants(cfg, d)
        n_planned = self.const.T0 if self.const.T0 is not None else self.const.cap
        tau = cfg.tau if cfg.tau is not None else default_tau(n_planned, d, cfg.delta, cfg.c_tau)
        self.stein = SteinState(d, tau, cfg.score_fn)
        self.phase = "explore"
        self.theta_hat0: Optional[np.ndarray] = None
        self.t = 0
        self.t0_actual: Optional[int] = None
        self.fallback_rounds = 0
        self.last_bin: Optional[int] = None
        self.last_fallback = False

    # -- phase 1 -------------------------------------------------------
    def select(self, contexts: np.ndarray) -> int:
        if self.phase == "explore":
            self.last_bin = None
            self.last_fallback = False
            return int(self.rng.integers(contexts.shape[0]))
        return self._commit_select(contexts)

    def update(self, contexts: np.ndarray, arm: int, y: float) -> None:
        self.t += 1
        if self.phase == "explore":
            self.stein.accumulate(contexts[arm], y)
            self._maybe_commit()
        else:
            self._commit_update(contexts, arm, y)

    def _maybe_commit(self) -> None:
        mode, t = self.cfg.t0_mode, self.t
        if isinstance(mode, Adaptive):
            if t % mode.check_interval == 0 and self.stein.drift_check(
                t, mode.check_interval, mode.drift_threshold
            ):
                self._enter_commit(self.stein.history[-1][1])
                return
            if t >= self.const.cap:
                self._force_commit()
        elif t >= self.const.T0:
            self._force_commit()

    def _force_commit(self) -> None:
        try:
            theta = self.stein.normalized()
        except (DegenerateEstimateError, ValueError):
            if self.t >= self.const.cap:
                raise DegenerateEstimateError(
                    f"estimation degenerate after {self.t} exploration rounds"
                ) from None
            return  # keep exploring until the cap
        self._enter_commit(theta)

    def _enter_commit(self, theta: np.ndarray) -> None:
        self.theta_hat0 = theta
        self.phase = "commit"
        self.t0_actual = self.t

    def force_theta(self, theta) -> None:
        """Test hook: skip Phase 1 and commit to ``theta`` (l1-normalized)."""
        self._enter_commit(normalize_l1(theta))

    def bins_of(self, contexts: np.ndarray) -> np.ndarray:
        c = self.const
        return assign_bins(contexts @ self.theta_hat0, c.W, c.width, c.N)

    # -- phase 2 -------------------------------------------------------
    def _commit_select(self, contexts):
        raise NotImplementedError

    def _commit_update(self, contexts, arm, y):
        pass


class ZoomSIB(SteinExplorer):
    """ZoomSIB-UCB policy.

    In the commit phase each arm is projected on the estimated index,
    binned on ``[-W, W]``, and the arm whose bin has the largest UCB among
    the bins present this round is pulled.  Rounds where every arm falls
    outside the window are uniform-random fallbacks and update nothing.
    """

    name = "zoomsib"

    def __init__(self, cfg: ZoomSIBConfig, d: int, rng=None):
        super().__init__(cfg, d, rng)
        N = self.const.N
        self.counts = np.zeros(N + 1, dtype=np.int64)  # index 0 unused
        self.sums = np.zeros(N + 1)
        self._radius = _radius_coef(cfg, N)
        self._round_bins = None

    def bin_ucb(self, j: int) -> float:
        n = int(self.counts[j])
        if n == 0:
            return math.inf
        return self.sums[j] / n + self._radius / math.sqrt(n)

    def _commit_select(self, contexts: np.ndarray) -> int:
        b = self.bins_of(contexts)
        self._round_bins = b
        inside = b > 0
        if not inside.any():
            self.last_bin = None
            self.last_fallback = True
            return int(self.rng.integers(contexts.shape[0]))
        n = self.counts[b]
        fresh = inside & (n == 0)
        if fresh.any():
            a = _first_smallest_bin(fresh, b)
        else:
            ucb = np.full(b.shape, -math.inf)
            nb = n[inside]
            ucb[inside] = self.sums[b[inside]] / nb + self._radius / np.sqrt(nb)
            a = _first_smallest_bin(ucb == ucb.max(), b)
        self.last_bin = int(b[a])
        self.last_fallback = False
        return a

    def _commit_update(self, contexts, arm, y):
        b = self._round_bins
        if b is None:
            b = self.bins_of(contexts)
        self._round_bins = None
        j = int(b[arm])
        if j == 0:
            self.fallback_rounds += 1
            return
        self.counts[j] += 1
        self.sums[j] += y
