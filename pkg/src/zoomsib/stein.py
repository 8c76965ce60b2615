"""Truncated Stein estimation of the index direction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "DegenerateEstimateError",
    "ScoreFunction",
    "SteinState",
    "score",
    "truncate",
    "normalize_l1",
    "default_tau",
]


class DegenerateEstimateError(ValueError):
    """The Stein sum is (numerically) zero, so it carries no direction."""


@dataclass(frozen=True)
class ScoreFunction:
    """Score ``-grad log p`` of a centred Gaussian context law.

    ``variances=None`` means the standard Gaussian, whose score is the
    identity map.
    """

    variances: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.variances is not None:
            v = np.asarray(self.variances, dtype=float)
            if np.any(v <= 0):
                raise ValueError("variances must be positive")
            object.__setattr__(self, "variances", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.variances is None:
            return x
        return x / self.variances


STANDARD_GAUSSIAN = ScoreFunction()


def score(sf: ScoreFunction, x) -> np.ndarray:
    return sf(x)


def truncate(v, tau: float) -> np.ndarray:
    """Sign-preserving element-wise clamp to ``[-tau, tau]``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return np.clip(np.asarray(v, dtype=float), -tau, tau)


def normalize_l1(theta_hat) -> np.ndarray:
    theta_hat = np.asarray(theta_hat, dtype=float)
    norm = np.abs(theta_hat).sum()
    if not norm > 0 or not np.isfinite(norm):
        raise DegenerateEstimateError("degenerate estimate: zero l1 norm")
    return theta_hat / norm


def default_tau(n_planned: int, d: int, delta: float, c_tau: float = 1.0) -> float:
    """``c_tau * sqrt(n / log(2d / delta))``, the threshold scaling the
    estimation rate needs."""
    return c_tau * math.sqrt(max(n_planned, 1) / math.log(2 * d / delta))


@dataclass
class SteinState:
    """Running sum of truncated terms ``phi_tau(y * S(x))``.

    ``history`` holds ``(round, normalized estimate)`` pairs recorded at
    drift checkpoints.
    """

    d: int
    tau: float = math.inf
    score_fn: ScoreFunction = STANDARD_GAUSSIAN
    n: int = 0
    running_sum: np.ndarray = None
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.running_sum is None:
            self.running_sum = np.zeros(self.d)

    def accumulate(self, x, y: float) -> "SteinState":
        term = y * self.score_fn(x)
        if term.shape != (self.d,):
            raise ValueError(f"context has shape {term.shape}, expected ({self.d},)")
        if self.tau < math.inf:
            np.clip(term, -self.tau, self.tau, out=term)
        self.running_sum += term
        self.n += 1
        return self

    def accumulate_many(self, X, y) -> "SteinState":
        terms = np.asarray(y, dtype=float)[:, None] * self.score_fn(X)
        if self.tau < math.inf:
            np.clip(terms, -self.tau, self.tau, out=terms)
        self.running_sum += terms.sum(axis=0)
        self.n += terms.shape[0]
        return self

    def estimate(self) -> np.ndarray:
        if self.n == 0:
            raise ValueError("no samples")
        return self.running_sum / self.n

    def normalized(self) -> np.ndarray:
        return normalize_l1(self.estimate())

    def mu_estimate(self) -> float:
        """``||theta_hat||_1``, a diagnostic estimate of ``E[f'(x . theta)]``."""
        return float(np.abs(self.estimate()).sum())

    def drift_check(self, current_round: int, check_interval: int = 100,
                    threshold: float = 0.05) -> bool:
        """Record a checkpoint; True once two consecutive normalized
        estimates are closer than ``threshold`` in l1."""
        if check_interval < 1:
            raise ValueError("check_interval must be positive")
        try:
            est = self.normalized()
        except (DegenerateEstimateError, ValueError):
            return False
        self.history.append((current_round, est))
        if len(self.history) < 2:
            return False
        drift = np.abs(self.history[-1][1] - self.history[-2][1]).sum()
        return bool(drift < threshold)
