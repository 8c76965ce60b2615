"""Offline classification data as a replay bandit.

Rows are standardized, clustered with k-means into ``K`` arms, and each
round shows one uniformly sampled row per cluster.  The reward of a row
is 1 when its label equals the target class.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .env import RoundBlock

log = logging.getLogger(__name__)

__all__ = [
    "CSVFormatError",
    "LoadedData",
    "load_csv",
    "kmeans",
    "KMeansResult",
    "ReplayDataset",
    "ReplayEnvironment",
    "replay_round",
    "build_replay",
    "save_cluster_cache",
    "load_cluster_cache",
]


class CSVFormatError(ValueError):
    pass


@dataclass
class LoadedData:
    features: np.ndarray  # standardized, (rows, d)
    rewards: np.ndarray  # 0/1, (rows,)
    labels: list
    columns: list  # names of the kept feature columns
    dropped: list  # (column, reason)


def _parse_float(cell: str):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, feature_columns: Optional[Sequence[str]] = None,
             label_column: str = "label", target_class: str = "1") -> LoadedData:
    """Read a headed CSV into standardized features and binary rewards.

    With ``feature_columns=None`` every numeric column except the label is
    used and non-numeric ones are dropped.  Named columns must be numeric.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CSVFormatError(f"{path}: empty file") from None
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    if label_column not in header:
        raise CSVFormatError(f"{path}: missing label column {label_column!r}")
    for i, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise CSVFormatError(
                f"{path}: row {i} has {len(r)} cells, header has {len(header)}"
            )
    li = header.index(label_column)
    dropped = []
    if feature_columns is None:
        candidates = [c for c in header if c != label_column]
        strict = False
    else:
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise CSVFormatError(f"{path}: missing feature column(s) {missing}")
        candidates = list(feature_columns)
        strict = True

    cols, names = [], []
    for name in candidates:
        ci = header.index(name)
        values = []
        for i, r in enumerate(rows, start=2):
            v = _parse_float(r[ci].strip())
            if v is None:
                if strict:
                    raise CSVFormatError(
                        f"{path}: non-numeric cell {r[ci]!r} at row {i}, column {name!r}"
                    )
                break
            values.append(v)
        else:
            cols.append(values)
            names.append(name)
            continue
        dropped.append((name, "non-numeric"))
        log.warning("dropping non-numeric column %r", name)
    if not cols:
        raise CSVFormatError(f"{path}: no numeric feature columns")

    X = np.array(cols, dtype=float).T
    std = X.std(axis=0)
    keep = std > 0
    for name, k in zip(names, keep):
        if not k:
            dropped.append((name, "constant"))
            log.warning("dropping constant column %r", name)
    if not keep.any():
        raise CSVFormatError(f"{path}: every feature column is constant")
    X = (X[:, keep] - X[:, keep].mean(axis=0)) / std[keep]
    labels = [r[li].strip() for r in rows]
    rewards = np.array([lab == str(target_class) for lab in labels], dtype=float)
    return LoadedData(X, rewards, labels, [n for n, k in zip(names, keep) if k], dropped)


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia_history: list
    n_iter: int
    seed: int

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _lloyd(X, K, max_iters, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            i = rng.choice(n, p=d2 / total)
        else:
            i = rng.integers(n)
        centers.append(X[i])
        d2 = np.minimum(d2, ((X - X[i]) ** 2).sum(axis=1))
    C = np.array(centers)

    assign = np.argmin(_sq_dists(X, C), axis=1)
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        for k in range(K):
            members = assign == k
            if members.any():
                C[k] = X[members].mean(axis=0)
        D = _sq_dists(X, C)
        history.append(float(D[np.arange(n), assign].sum()))
        new = np.argmin(D, axis=1)
        if np.array_equal(new, assign):
            break
        assign = new
    history.append(float(_sq_dists(X, C)[np.arange(n), assign].sum()))
    return C, assign, history, it


def kmeans(features, K: int, max_iters: int = 100, seed: int = 0,
           n_init: int = 10) -> KMeansResult:
    """Lloyd's algorithm from distance-weighted (k-means++) seeding.

    ``n_init`` restarts share one seeded stream; the lowest final
    within-cluster sum of squares wins (first one on ties).
    """
    X = np.asarray(features, dtype=float)
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} must lie in 1..{n} (number of rows)")
    if n_init < 1:
        raise ValueError("n_init must be positive")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        run = _lloyd(X, K, max_iters, rng)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    C, assign, history, it = best
    return KMeansResult(C, assign, history, it, seed)


@dataclass
class ReplayDataset:
    features: np.ndarray
    rewards: np.ndarray
    clusters: np.ndarray  # cluster id per row, 0..K-1 after dropping empties
    members: list  # row indices per cluster

    @property
    def K(self) -> int:
        return len(self.members)

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def cluster_means(self) -> np.ndarray:
        return np.array([self.rewards[m].mean() for m in self.members])

    @classmethod
    def from_assignments(cls, features, rewards, assignments):
        assignments = np.asarray(assignments)
        ids = np.unique(assignments)
        members = [np.flatnonzero(assignments == k) for k in ids]
        remap = np.empty(assignments.max() + 1, dtype=np.intp)
        remap[ids] = np.arange(ids.size)
        return cls(np.asarray(features, float), np.asarray(rewards, float),
                   remap[assignments], members)


def replay_round(dataset: ReplayDataset, rng: np.random.Generator):
    """One sampled row per cluster: ``(contexts (K, d), rewards (K,))``."""
    rows = np.array([m[rng.integers(m.size)] for m in dataset.members])
    return dataset.features[rows], dataset.rewards[rows]


class ReplayEnvironment:
    """Round stream over a :class:`ReplayDataset`.

    Regret is measured on realized rewards (``means`` in each block); the
    cluster-mean regret is carried as ``alt_means``.
    """

    # Bernoulli rewards: variance at most 1/4
    noise_sigma = 0.5

    def __init__(self, dataset: ReplayDataset, seed):
        self.dataset = dataset
        self.rng = np.random.default_rng(seed)
        self._cmeans = dataset.cluster_means

    @property
    def K(self):
        return self.dataset.K

    @property
    def d(self):
        return self.dataset.d

    def draw(self, n: int) -> RoundBlock:
        ds = self.dataset
        sizes = np.array([m.size for m in ds.members])
        picks = np.floor(self.rng.random((n, ds.K)) * sizes).astype(np.intp)
        rows = np.empty((n, ds.K), dtype=np.intp)
        for k, m in enumerate(ds.members):
            rows[:, k] = m[picks[:, k]]
        alt = np.broadcast_to(self._cmeans, (n, ds.K))
        return RoundBlock(ds.features[rows], ds.rewards[rows], np.zeros(n), alt)


def build_replay(path, K: int, target_class: str, label_column: str = "label",
                 feature_columns=None, seed: int = 0, max_iters: int = 100,
                 cache=None, n_init: int = 10) -> ReplayDataset:
    data = load_csv(path, feature_columns, label_column, target_class)
    if cache is not None and Path(cache).exists():
        assign = load_cluster_cache(cache, expected_seed=seed, rows=data.features.shape[0])
    else:
        res = kmeans(data.features, K, max_iters=max_iters, seed=seed, n_init=n_init)
        assign = res.assignments
        if cache is not None:
            save_cluster_cache(cache, res)
    ds = ReplayDataset.from_assignments(data.features, data.rewards, assign)
    if ds.K < K:
        log.warning("dropped %d empty cluster(s); K reduced to %d", K - ds.K, ds.K)
    return ds


def save_cluster_cache(path, result: KMeansResult) -> None:
    payload = {
        "centroids": result.centroids.tolist(),
        "assignments": result.assignments.tolist(),
        "seed": result.seed,
    }
    Path(path).write_text(json.dumps(payload))


def load_cluster_cache(path, expected_seed=None, rows=None) -> np.ndarray:
    payload = json.loads(Path(path).read_text())
    if expected_seed is not None and payload["seed"] != expected_seed:
        raise ValueError(f"cluster cache {path} was built with seed {payload['seed']}")
    assign = np.asarray(payload["assignments"], dtype=np.intp)
    if rows is not None and assign.size != rows:
        raise ValueError(f"cluster cache {path} has {assign.size} rows, data has {rows}")
    return assign
