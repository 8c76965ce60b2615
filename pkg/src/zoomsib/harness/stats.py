"""Trial aggregation and power-law fits."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = ["Aggregate", "aggregate", "aggregate_trajectories", "SlopeFit", "loglog_slope"]


@dataclass
class Aggregate:
    mean: np.ndarray
    std: np.ndarray
    n: int

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_std(self) -> float:
        return float(self.std[-1])


def aggregate_trajectories(trajectories: Sequence[np.ndarray]) -> Aggregate:
    """Pointwise mean and sample std (``ddof=1``) across trials."""
    if not trajectories:
        raise ValueError("nothing to aggregate")
    lengths = {len(t) for t in trajectories}
    if len(lengths) != 1:
        raise ValueError(f"trajectories have mixed lengths {sorted(lengths)}")
    arr = np.asarray(trajectories, dtype=float)
    mean = arr.mean(axis=0)
    if arr.shape[0] == 1:
        warnings.warn("single trial: reporting zero standard deviation", stacklevel=2)
        std = np.zeros_like(mean)
    else:
        std = arr.std(axis=0, ddof=1)
    # rounds where every trial agrees are reported exactly, free of
    # summation rounding
    same = (arr == arr[0]).all(axis=0)
    mean[same] = arr[0, same]
    std[same] = 0.0
    return Aggregate(mean, std, arr.shape[0])


def aggregate(records: Iterable, key=("policy", "T", "d")) -> dict:
    """Group successful records by ``key`` attributes and aggregate each group."""
    groups: dict = {}
    for r in records:
        if getattr(r, "failed", False):
            continue
        k = tuple(getattr(r, name) for name in key)
        groups.setdefault(k, []).append(r.trajectory)
    return {k: aggregate_trajectories(v) for k, v in groups.items()}


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def loglog_slope(points: Iterable[tuple[float, float]]) -> SlopeFit:
    """Least-squares fit of ``log R = slope * log T + intercept``.

    Points with nonpositive T or R are dropped with a warning.
    """
    pts = []
    for T, R in points:
        if T > 0 and R > 0 and math.isfinite(R):
            pts.append((T, R))
        else:
            warnings.warn(f"dropping nonpositive point (T={T}, R={R})", stacklevel=2)
    if len(pts) < 2:
        raise ValueError("need at least two positive points for a slope")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2, len(pts))
