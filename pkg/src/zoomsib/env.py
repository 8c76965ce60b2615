"""Single-index bandit environments.

Each round the learner sees ``K`` context vectors drawn i.i.d. from a
context law, pulls one, and receives ``f(x . theta_star) + noise``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Link",
    "LINKS",
    "get_link",
    "ContextLaw",
    "SIBInstance",
    "RoundContexts",
    "RoundBlock",
    "SyntheticEnvironment",
    "sample_round",
    "reward",
    "best_mean",
    "instant_regret",
    "draw_theta_star",
]


@dataclass(frozen=True)
class Link:
    """A scalar link function ``z -> f(z)``, vectorized over numpy arrays.

    ``derivative_bound`` is an optional callable ``W -> sup_{|z|<=W} |f'(z)|``
    used only by diagnostics.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    derivative_bound: Optional[Callable[[float], float]] = field(
        default=None, repr=False, compare=False
    )

    def __call__(self, z):
        return self.fn(z)

    @classmethod
    def custom(cls, fn, name="custom", derivative_bound=None):
        return cls(name, fn, derivative_bound)


def _quadratic(z):
    return -((z - 1.0) ** 2) + 1.0


def _asymmetric(z):
    return z * np.exp(-(z**2))


def _zigzag(z):
    return np.sin(z) + 0.3 * z


def _sin2z(z):
    return np.sin(2.0 * z)


def _sin2z_minus_half_zsq(z):
    return np.sin(2.0 * z) - 0.5 * z**2


def _linear(z):
    return np.asarray(z, dtype=float) * 1.0


LINKS = {
    "quadratic": Link("quadratic", _quadratic, lambda w: 2.0 * (w + 1.0)),
    "asymmetric": Link("asymmetric", _asymmetric, lambda w: 1.0),
    "zigzag": Link("zigzag", _zigzag, lambda w: 1.3),
    "sin2z": Link("sin2z", _sin2z, lambda w: 2.0),
    "sin2z_minus_half_zsq": Link(
        "sin2z_minus_half_zsq", _sin2z_minus_half_zsq, lambda w: 2.0 + w
    ),
    "linear": Link("linear", _linear, lambda w: 1.0),
}


def get_link(name: str) -> Link:
    key = name.lower().replace("-", "_")
    try:
        return LINKS[key]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; expected one of {sorted(LINKS)}") from None


@dataclass(frozen=True)
class ContextLaw:
    """``kind`` is ``"gaussian"`` (i.i.d. N(0,1) coordinates) or ``"uniform"``."""

    kind: str = "gaussian"
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown context law {self.kind!r}")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise ValueError("uniform context law needs lo < hi")

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(shape)
        return rng.uniform(self.lo, self.hi, shape)


@dataclass(frozen=True)
class SIBInstance:
    d: int
    theta_star: np.ndarray
    link: Link
    noise_sigma: float = 0.1
    K: int = 20
    context_law: ContextLaw = ContextLaw()

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float).reshape(-1)
        object.__setattr__(self, "theta_star", theta)
        if self.d < 1 or self.K < 1:
            raise ValueError("d and K must be positive")
        if theta.shape != (self.d,):
            raise ValueError(f"theta_star has length {theta.size}, expected d={self.d}")
        if abs(np.abs(theta).sum() - 1.0) > 1e-12:
            raise ValueError("theta_star must have unit l1 norm")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    def mean_rewards(self, vectors: np.ndarray) -> np.ndarray:
        """Mean reward of every context in ``vectors`` (last axis is d)."""
        return self.link(vectors @ self.theta_star)


@dataclass(frozen=True)
class RoundContexts:
    round: int
    vectors: np.ndarray  # (K, d)

    @property
    def K(self) -> int:
        return self.vectors.shape[0]


@dataclass
class RoundBlock:
    """A block of consecutive rounds, pre-drawn for fast simulation.

    ``means[t, a]`` is the quantity regret is measured against and
    ``means[t, a] + noise[t]`` the observed reward.  ``alt_means`` carries
    a secondary regret reference when an environment defines one.
    """

    contexts: np.ndarray  # (n, K, d)
    means: np.ndarray  # (n, K)
    noise: np.ndarray  # (n,)
    alt_means: Optional[np.ndarray] = None

    def __len__(self):
        return self.contexts.shape[0]


def draw_theta_star(d: int, rng: np.random.Generator, law: str = "sparse") -> np.ndarray:
    """Draw a random unit-l1 index vector.

    ``"dense"``: absolute standard-normal coordinates scaled to unit l1 norm
    with independent random signs.  ``"sparse"``: a signed standard basis
    vector, the only unit-l1 vectors whose projections of standard Gaussian
    contexts have unit variance.
    """
    if law == "dense":
        g = np.abs(rng.standard_normal(d))
        g /= g.sum()
        signs = np.where(rng.random(d) < 0.5, -1.0, 1.0)
        return g * signs
    if law == "sparse":
        theta = np.zeros(d)
        j = int(rng.integers(d))
        theta[j] = -1.0 if rng.random() < 0.5 else 1.0
        return theta
    raise ValueError(f"unknown theta law {law!r}")


def sample_round(instance: SIBInstance, rng: np.random.Generator, t: int = 0) -> RoundContexts:
    return RoundContexts(t, instance.context_law.draw(rng, (instance.K, instance.d)))


def reward(instance: SIBInstance, x, rng: np.random.Generator) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.d,):
        raise ValueError(f"context has shape {x.shape}, expected ({instance.d},)")
    # one normal is always consumed so streams stay aligned when sigma == 0
    eta = rng.standard_normal()
    return float(instance.link(x @ instance.theta_star)) + instance.noise_sigma * eta


def best_mean(instance: SIBInstance, contexts) -> tuple[int, float]:
    vectors = contexts.vectors if isinstance(contexts, RoundContexts) else contexts
    means = instance.mean_rewards(np.asarray(vectors, dtype=float))
    a = int(np.argmax(means))
    return a, float(means[a])


def instant_regret(instance: SIBInstance, contexts, chosen_arm: int) -> float:
    vectors = contexts.vectors if isinstance(contexts, RoundContexts) else contexts
    vectors = np.asarray(vectors, dtype=float)
    if not 0 <= chosen_arm < vectors.shape[0]:
        raise IndexError(f"arm {chosen_arm} out of range for K={vectors.shape[0]}")
    means = instance.mean_rewards(vectors)
    return float(means.max() - means[chosen_arm])


class SyntheticEnvironment:
    """Seeded stream of rounds for a :class:`SIBInstance`.

    Contexts and noise come from separate child streams, so a block of ``n``
    rounds is bit-identical to ``n`` calls of :func:`sample_round` followed by
    :func:`reward` on the same streams.
    """

    def __init__(self, instance: SIBInstance, seed):
        self.instance = instance
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        ctx_seq, noise_seq = seed.spawn(2)
        self.context_rng = np.random.default_rng(ctx_seq)
        self.noise_rng = np.random.default_rng(noise_seq)

    @property
    def K(self):
        return self.instance.K

    @property
    def d(self):
        return self.instance.d

    @property
    def noise_sigma(self):
        return self.instance.noise_sigma

    def draw(self, n: int) -> RoundBlock:
        inst = self.instance
        X = inst.context_law.draw(self.context_rng, (n, inst.K, inst.d))
        means = inst.mean_rewards(X)
        noise = inst.noise_sigma * self.noise_rng.standard_normal(n)
        return RoundBlock(X, means, noise)
