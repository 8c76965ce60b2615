"""Hard-instance family for the T^(2/3) lower bound, plus numerical checks.

Contexts are one-dimensional and uniform on [-1, 1].  The line is split
into ``N = ceil(T^(1/3))`` bins of width ``2/N``; the link is ``1/2`` plus
a plateaued bump of height ``+-eps`` (``eps = 1/(2N)``) in every bin, the
sign of bump ``j`` given by ``beta[j]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .env import ContextLaw, Link, SIBInstance

__all__ = [
    "HardInstance",
    "psi",
    "f_beta",
    "validate_instance",
    "ValidationReport",
    "availability_mc",
    "kl_accumulate",
    "build_env",
    "null_beta",
    "spike_beta",
]


@dataclass(frozen=True)
class HardInstance:
    T: int
    beta: np.ndarray = None

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be at least 2")
        N = self.N
        beta = -np.ones(N) if self.beta is None else np.asarray(self.beta, dtype=float)
        if beta.shape != (N,) or not np.all(np.abs(beta) == 1):
            raise ValueError(f"beta must be a +-1 vector of length N={N}")
        object.__setattr__(self, "beta", beta)

    @property
    def N(self) -> int:
        # guard against T^(1/3) landing a hair above an integer for cubes
        r = round(self.T ** (1.0 / 3.0))
        return r if r**3 >= self.T else math.ceil(self.T ** (1.0 / 3.0))

    @property
    def K(self) -> int:
        return math.ceil(4 * self.N * math.log(self.T))

    @property
    def epsilon(self) -> float:
        return 1.0 / (2 * self.N)

    @property
    def width(self) -> float:
        return 2.0 / self.N

    @property
    def centers(self) -> np.ndarray:
        return -1.0 + self.width * (np.arange(1, self.N + 1) - 0.5)

    def with_beta(self, beta) -> "HardInstance":
        return HardInstance(self.T, beta)

    def bin_of(self, z) -> np.ndarray:
        """1-based bin of each z in [-1, 1] (z = 1 goes to bin N)."""
        j = np.floor((np.asarray(z, dtype=float) + 1.0) / self.width).astype(np.intp) + 1
        return np.clip(j, 1, self.N)

    def inner_bounds(self, j: int) -> tuple[float, float]:
        c = self.centers[j - 1]
        return c - self.width / 4, c + self.width / 4

    def kinks(self) -> np.ndarray:
        w, c = self.width, self.centers
        edges = -1.0 + w * np.arange(self.N + 1)
        return np.sort(np.concatenate([edges, c - w / 4, c + w / 4]))


def null_beta(N: int) -> np.ndarray:
    return -np.ones(N)


def spike_beta(N: int, j: int) -> np.ndarray:
    """All bumps down except bin ``j`` (1-based)."""
    beta = -np.ones(N)
    beta[j - 1] = 1.0
    return beta


def psi(j: int, z, hi: HardInstance):
    """Plateaued bump of bin ``j``: 1 on the inner half, linear ramps to 0
    at the bin edges, 0 elsewhere."""
    if not 1 <= j <= hi.N:
        raise ValueError(f"bin index {j} outside 1..{hi.N}")
    w = hi.width
    dist = np.abs(np.asarray(z, dtype=float) - hi.centers[j - 1])
    out = np.clip(1.0 - (4.0 / w) * (dist - w / 4), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def f_beta(z, hi: HardInstance):
    z = np.asarray(z, dtype=float)
    j = hi.bin_of(z)
    w = hi.width
    dist = np.abs(z - hi.centers[j - 1])
    bump = np.clip(1.0 - (4.0 / w) * (dist - w / 4), 0.0, 1.0)
    out = 0.5 + hi.epsilon * hi.beta[j - 1] * bump
    return float(out) if out.ndim == 0 else out


@dataclass
class ValidationReport:
    T: int
    N: int
    K: int
    epsilon: float
    sup_abs: float
    sup_bound: float
    sup_ok: bool
    sup_witness: float
    max_slope: float
    slope_bound: float
    slope_ok: bool
    slope_witness: float
    plateau_max_error: float
    plateau_ok: bool
    plateau_witness: float
    grid_points: int

    @property
    def ok(self) -> bool:
        return self.sup_ok and self.slope_ok and self.plateau_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def validate_instance(hi: HardInstance, n_grid: int = 100_000,
                      slope_tol: float = 1e-6, plateau_tol: float = 1e-12) -> ValidationReport:
    """Grid check of boundedness, Lipschitz constant and plateau values.

    The grid is uniform on [-1, 1] plus every kink of the piecewise-linear
    link, so extrema and slope maxima cannot fall between grid points.
    """
    z = np.unique(np.concatenate([np.linspace(-1.0, 1.0, n_grid), hi.kinks()]))
    f = f_beta(z, hi)
    eps = hi.epsilon
    absf = np.abs(f)
    i_sup = int(np.argmax(absf))
    sup_bound = 0.5 + eps
    slopes = np.abs(np.diff(f) / np.diff(z))
    i_sl = int(np.argmax(slopes))
    slope_bound = 2 * eps * hi.N + slope_tol

    j = hi.bin_of(z)
    lo = hi.centers[j - 1] - hi.width / 4
    up = hi.centers[j - 1] + hi.width / 4
    on_plateau = (z >= lo) & (z <= up)
    target = 0.5 + eps * hi.beta[j - 1]
    err = np.where(on_plateau, np.abs(f - target), 0.0)
    i_pl = int(np.argmax(err))
    return ValidationReport(
        T=hi.T, N=hi.N, K=hi.K, epsilon=eps,
        sup_abs=float(absf[i_sup]), sup_bound=sup_bound,
        sup_ok=bool(absf[i_sup] <= sup_bound + 1e-15), sup_witness=float(z[i_sup]),
        max_slope=float(slopes[i_sl]), slope_bound=slope_bound,
        slope_ok=bool(slopes[i_sl] <= slope_bound), slope_witness=float(z[i_sl]),
        plateau_max_error=float(err[i_pl]), plateau_ok=bool(err[i_pl] <= plateau_tol),
        plateau_witness=float(z[i_pl]), grid_points=int(z.size),
    )


@dataclass
class AvailabilityResult:
    rounds: int
    empirical: np.ndarray  # per-bin frequency of an empty inner half
    analytic: float
    bound: float
    standard_error: float = field(init=False)

    def __post_init__(self):
        p = self.analytic
        self.standard_error = math.sqrt(p * (1 - p) / self.rounds)

    @property
    def pooled(self) -> float:
        return float(self.empirical.mean())

    def within(self, n_se: float = 3.0) -> np.ndarray:
        return np.abs(self.empirical - self.analytic) <= n_se * self.standard_error


def availability_mc(hi: HardInstance, rounds: int, rng, chunk: int = 5000) -> AvailabilityResult:
    """Simulate rounds of K uniform contexts; count, per bin, the rounds in
    which no context lands in that bin's inner half."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    N, K, w = hi.N, hi.K, hi.width
    empty = np.zeros(N, dtype=np.int64)
    done = 0
    while done < rounds:
        n = min(chunk, rounds - done)
        u = rng.uniform(-1.0, 1.0, (n, K))
        pos = (u + 1.0) / w
        j = np.minimum(pos.astype(np.intp), N - 1)
        inner = np.abs(pos - j - 0.5) <= 0.25
        ids = np.where(inner, j, N)
        hit = np.zeros((n, N + 1), dtype=bool)
        hit[np.arange(n)[:, None], ids] = True
        empty += n - hit[:, :N].sum(axis=0)
        done += n
    analytic = (1.0 - 1.0 / (2 * N)) ** K
    return AvailabilityResult(rounds, empty / rounds, analytic, float(hi.T) ** -2)


@dataclass
class KLResult:
    exact: float
    bound: float
    pulls_in_bin: int

    @property
    def ok(self) -> bool:
        return self.exact <= self.bound * (1 + 1e-12)


def kl_accumulate(pull_log: Sequence[tuple[int, float]], j: int, hi: HardInstance,
                  sigma: float = 1.0) -> KLResult:
    """KL between histories under ``beta`` and ``beta`` with bump ``j``
    flipped, given the logged ``(bin, z)`` pulls."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    eps = hi.epsilon
    exact = bound = 0.0
    count = 0
    per_pull_bound = 2 * eps * eps / sigma**2
    for b, z in pull_log:
        if b != j:
            continue
        count += 1
        gap = 2 * eps * psi(j, z, hi)
        exact += gap * gap / (2 * sigma**2)
        # summed in the same order so plateau pulls match bit for bit
        bound += per_pull_bound
    return KLResult(exact, bound, count)


def build_env(hi: HardInstance, beta=None) -> SIBInstance:
    """Single-index instance realising ``f_beta``: d=1, theta=(1,),
    uniform contexts, unit Gaussian noise."""
    inst = hi if beta is None else hi.with_beta(beta)
    link = Link(
        f"hard_instance(T={inst.T})",
        lambda z, _h=inst: f_beta(z, _h),
        lambda w: 1.0,
    )
    return SIBInstance(
        d=1, theta_star=np.ones(1), link=link, noise_sigma=1.0,
        K=inst.K, context_law=ContextLaw("uniform", -1.0, 1.0),
    )
