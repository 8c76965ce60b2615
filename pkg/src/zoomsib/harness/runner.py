"""Trial execution.

Every ``(policy, T, d, trial)`` cell builds its environment from a seed
that does not depend on the policy, so all policies in a trial face the
same context and noise stream; the policy randomness comes from the cell
seed.
"""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..baselines import ETCBins, GreedyProjection, OraclePolicy, RandomPolicy
from ..env import ContextLaw, SIBInstance, SyntheticEnvironment, draw_theta_star, get_link
from ..ingest import ReplayDataset, ReplayEnvironment, build_replay
from ..lowerbound import HardInstance, build_env as build_hard_env, spike_beta
from ..policy import Adaptive, Theoretical, ZoomSIB, ZoomSIBConfig
from ..stein import DegenerateEstimateError
from .config import ExperimentConfig, PolicySpec, cell_seed

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentRecord",
    "Trajectory",
    "make_environment",
    "make_policy",
    "run_policy",
    "run_cell",
    "run_experiment",
    "default_threads",
]

THREADS_ENV = "ZOOMSIB_THREADS"
ENV_STREAM = "__env__"


@dataclass
class ExperimentRecord:
    policy: str
    T: int
    d: int
    trial: int
    seed: int
    trajectory: np.ndarray  # cumulative regret after each round
    T0_actual: Optional[int] = None
    fallback_rounds: int = 0
    wall_clock: float = 0.0
    failed: bool = False
    error: Optional[str] = None
    alt_final: Optional[float] = None  # cluster-mean regret on replay data
    telemetry: Optional[dict] = field(default=None, repr=False)

    @property
    def final(self) -> float:
        return float(self.trajectory[-1]) if len(self.trajectory) else 0.0


@dataclass
class Trajectory:
    cum_regret: np.ndarray
    alt_cum_final: Optional[float]
    telemetry: Optional[dict]


def _explorer_config(params: dict, T: int, K: int, noise_sigma: float) -> ZoomSIBConfig:
    p = dict(params)
    mode = p.pop("t0_mode", "adaptive")
    cap = p.pop("cap_fraction", 0.4)
    check = p.pop("check_interval", 100)
    thresh = p.pop("drift_threshold", 0.05)
    c_poly = p.pop("c_polylog", 1.0)
    if mode == "adaptive":
        t0 = Adaptive(int(check), float(thresh), float(cap))
    elif mode == "theoretical":
        t0 = Theoretical(float(c_poly), float(cap))
    else:
        raise ValueError(f"unknown t0_mode {mode!r}")
    p.setdefault("noise_sigma_assumed", noise_sigma)
    return ZoomSIBConfig(T=T, K=K, t0_mode=t0, **p)


def make_policy(spec: PolicySpec, T: int, K: int, d: int, noise_sigma: float,
                rng, instance: Optional[SIBInstance] = None):
    name, params = spec.name, spec.params
    if name == "zoomsib":
        return ZoomSIB(_explorer_config(params, T, K, noise_sigma), d, rng)
    if name == "greedy_projection":
        return GreedyProjection(_explorer_config(params, T, K, noise_sigma), d, rng)
    if name == "etc_bins":
        return ETCBins(T, K, d, rng, **params)
    if name == "random":
        return RandomPolicy(rng)
    if name == "oracle":
        if instance is None:
            raise ValueError("oracle policy needs the ground-truth instance")
        return OraclePolicy(instance)
    raise ValueError(f"unknown policy {name!r}")


def make_environment(cfg: ExperimentConfig, T: int, d, trial: int,
                     dataset: Optional[ReplayDataset] = None):
    """Environment and (for synthetic / hard instances) its ground truth."""
    spec = cfg.environment
    seq = np.random.SeedSequence(cell_seed(cfg.base_seed, ENV_STREAM, T, d, trial))
    model_seq, stream_seq = seq.spawn(2)
    model_rng = np.random.default_rng(model_seq)
    if spec.type == "synthetic":
        theta = draw_theta_star(d, model_rng, spec.theta)
        law = ContextLaw(spec.context_law, spec.lo, spec.hi)
        inst = SIBInstance(d, theta, get_link(spec.link), spec.noise_sigma, spec.K, law)
        return SyntheticEnvironment(inst, stream_seq), inst
    if spec.type == "hard_instance":
        hi = HardInstance(T)
        beta = spec.beta
        if beta == "null":
            beta = -np.ones(hi.N)
        elif beta == "spike":
            j = spec.spike_bin or int(model_rng.integers(1, hi.N + 1))
            beta = spike_beta(hi.N, j)
        elif beta == "random":
            beta = np.where(model_rng.random(hi.N) < 0.5, -1.0, 1.0)
        inst = build_hard_env(hi, beta)
        return SyntheticEnvironment(inst, stream_seq), inst
    if spec.type == "replay":
        if dataset is None:
            raise ValueError("replay environment needs a dataset")
        return ReplayEnvironment(dataset, stream_seq), None
    raise ValueError(f"unknown environment type {spec.type!r}")


def run_policy(env, policy, T: int, chunk: int = 2048, telemetry: bool = False) -> Trajectory:
    """Play ``T`` rounds and return the cumulative regret trajectory."""
    regret = np.empty(T)
    alt = 0.0
    has_alt = False
    tel = None
    if telemetry:
        tel = {k: [] for k in ("t", "phase", "chosen_arm", "bin", "fallback", "instant_regret")}
    t = 0
    while t < T:
        blk = env.draw(min(chunk, T - t))
        X, means, noise = blk.contexts, blk.means, blk.noise
        best = means.max(axis=1)
        if blk.alt_means is not None:
            has_alt = True
            alt_best = blk.alt_means.max(axis=1)
        for i in range(len(blk)):
            x = X[i]
            a = policy.select(x)
            mu = means[i, a]
            policy.update(x, a, mu + noise[i])
            r = best[i] - mu
            regret[t] = r
            if has_alt:
                alt += alt_best[i] - blk.alt_means[i, a]
            if tel is not None:
                tel["t"].append(t + 1)
                tel["phase"].append(policy.phase)
                tel["chosen_arm"].append(a)
                tel["bin"].append(policy.last_bin if policy.phase == "commit" else None)
                tel["fallback"].append(bool(policy.last_fallback) and policy.phase == "commit")
                tel["instant_regret"].append(float(r))
            t += 1
    return Trajectory(np.cumsum(regret), alt if has_alt else None, tel)


def run_cell(cfg: ExperimentConfig, spec: PolicySpec, T: int, d, trial: int,
             dataset: Optional[ReplayDataset] = None) -> ExperimentRecord:
    seed = cell_seed(cfg.base_seed, spec.id, T, d, trial)
    env, inst = make_environment(cfg, T, d, trial, dataset)
    start = time.perf_counter()
    rec = ExperimentRecord(spec.id, T, env.d, trial, seed, np.zeros(0))
    try:
        policy = make_policy(spec, T, env.K, env.d, env.noise_sigma,
                             np.random.default_rng(seed), inst)
        traj = run_policy(env, policy, T, telemetry=cfg.telemetry)
    except DegenerateEstimateError as exc:
        log.warning("cell %s T=%d d=%s trial=%d failed: %s", spec.id, T, d, trial, exc)
        rec.failed = True
        rec.error = str(exc)
    else:
        rec.trajectory = traj.cum_regret
        rec.alt_final = traj.alt_cum_final
        rec.telemetry = traj.telemetry
        rec.T0_actual = policy.t0_actual
        rec.fallback_rounds = int(policy.fallback_rounds)
    rec.wall_clock = time.perf_counter() - start
    return rec


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None,
                   dataset: Optional[ReplayDataset] = None) -> list:
    """Run every cell; records come back in declaration order."""
    if cfg.environment.type == "replay" and dataset is None:
        spec = cfg.environment
        dataset = build_replay(
            spec.csv, spec.K, spec.target, spec.label_column, spec.feature_columns,
            seed=spec.kmeans_seed, max_iters=spec.max_iters, cache=spec.cache,
            n_init=spec.n_init,
        )
    jobs = [(cfg, p, T, d, trial, dataset) for p, T, d, trial in cfg.cells()]
    threads = threads or default_threads()
    if threads <= 1 or len(jobs) <= 1:
        return [run_cell(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_cell_args, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
