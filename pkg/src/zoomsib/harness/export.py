"""Persistence: per-record CSV, summary JSON, optional SVG plots."""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .config import PROXY_POLICIES, ExperimentConfig
from .stats import aggregate, loglog_slope

__all__ = [
    "ensure_writable",
    "subsample_rounds",
    "write_records_csv",
    "build_summary",
    "write_summary",
    "write_telemetry",
    "write_plots",
    "export",
]

MAX_POINTS = 1000


def ensure_writable(output_dir) -> Path:
    """Create ``output_dir`` and prove it is writable; raises OSError."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()
    return out


def subsample_rounds(T: int, max_points: int = MAX_POINTS) -> np.ndarray:
    """1-based rounds on a geometric grid, always ending with ``T``."""
    if T <= max_points:
        return np.arange(1, T + 1)
    grid = np.unique(np.round(np.geomspace(1, T, min(max_points, T))).astype(np.int64))
    if grid[-1] != T:
        grid = np.append(grid, T)
    return grid


def write_records_csv(path, records) -> int:
    rows = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "T", "d", "seed", "round", "cum_regret"])
        for r in records:
            if r.failed:
                continue
            for t in subsample_rounds(r.T):
                w.writerow([r.policy, r.T, r.d, r.seed, int(t), repr(float(r.trajectory[t - 1]))])
                rows += 1
    return rows


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def build_summary(records, config: ExperimentConfig) -> dict:
    aggs = aggregate(records)
    by_group = defaultdict(list)
    for r in records:
        by_group[(r.policy, r.T, r.d)].append(r)
    groups = []
    for (policy, T, d), recs in by_group.items():
        ok = [r for r in recs if not r.failed]
        agg = aggs.get((policy, T, d))
        t0 = [r.T0_actual / T for r in ok if r.T0_actual is not None]
        alt = [r.alt_final for r in ok if r.alt_final is not None]
        entry = {
            "policy": policy,
            "T": T,
            "d": d,
            "trials": len(recs),
            "failed": len(recs) - len(ok),
            "final_mean": agg.final_mean if agg else None,
            "final_std": agg.final_std if agg else None,
            "T0_fraction_mean": float(np.mean(t0)) if t0 else None,
            "fallback_rounds_mean": float(np.mean([r.fallback_rounds for r in ok])) if ok else None,
        }
        if alt:
            entry["cluster_mean_regret_mean"] = float(np.mean(alt))
            entry["cluster_mean_regret_std"] = float(np.std(alt, ddof=1)) if len(alt) > 1 else 0.0
        groups.append(entry)

    slopes = []
    curves = defaultdict(list)
    for g in groups:
        if g["final_mean"] is not None:
            curves[(g["policy"], g["d"])].append((g["T"], g["final_mean"]))
    for (policy, d), pts in curves.items():
        if len(pts) < 2:
            continue
        try:
            fit = loglog_slope(sorted(pts))
        except ValueError:
            continue
        slopes.append({"policy": policy, "d": d, "slope": fit.slope,
                       "intercept": fit.intercept, "r_squared": _finite_or_none(fit.r_squared)})

    proxies = {p.id: PROXY_POLICIES[p.name] for p in config.policies if p.name in PROXY_POLICIES}
    return {
        "name": config.name,
        "environment": vars(config.environment),
        "policies": [{"id": p.id, "name": p.name, "params": p.params} for p in config.policies],
        "proxies": proxies,
        "trials": config.trials,
        "base_seed": config.base_seed,
        "groups": groups,
        "slopes": slopes,
        "wall_clock_total": float(sum(r.wall_clock for r in records)),
    }


def write_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=False))


def write_telemetry(directory, records) -> list:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in records:
        tel = r.telemetry
        if not tel:
            continue
        p = out / f"{r.policy}_T{r.T}_d{r.d}_trial{r.trial}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["t", "phase", "chosen_arm", "bin", "fallback", "instant_regret"]
            w.writerow(cols)
            for row in zip(*(tel[c] for c in cols)):
                t, phase, arm, b, fb, reg = row
                w.writerow([t, phase, arm, "" if b is None else b, int(fb), repr(reg)])
        paths.append(p)
    return paths


def write_plots(directory, records, summary: dict) -> list:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(directory)
    paths = []
    aggs = aggregate(records)
    T_max = max(r.T for r in records)
    for d in sorted({k[2] for k in aggs}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for (policy, T, dd), agg in aggs.items():
            if T != T_max or dd != d:
                continue
            t = np.arange(1, T + 1)
            ax.plot(t, agg.mean, label=policy)
            ax.fill_between(t, agg.mean - agg.std, agg.mean + agg.std, alpha=0.2)
        ax.set_xlabel("round")
        ax.set_ylabel("cumulative regret")
        ax.set_title(f"{summary['name']} (T={T_max}, d={d})")
        ax.legend()
        p = out / f"regret_T{T_max}_d{d}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(p)

    fits = summary["slopes"]
    if fits:
        fig, ax = plt.subplots(figsize=(6, 4))
        for s in fits:
            pts = sorted((g["T"], g["final_mean"]) for g in summary["groups"]
                         if g["policy"] == s["policy"] and g["d"] == s["d"] and g["final_mean"])
            Ts = np.array([p[0] for p in pts], dtype=float)
            Rs = np.array([p[1] for p in pts])
            ax.loglog(Ts, Rs, "o", label=f"{s['policy']} d={s['d']} slope={s['slope']:.2f}")
            ax.loglog(Ts, np.exp(s["intercept"]) * Ts ** s["slope"], "--", color="gray")
        ax.set_xlabel("T")
        ax.set_ylabel("final cumulative regret")
        ax.legend(fontsize=7)
        p = out / "loglog.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(p)
    return paths


def export(records, config: ExperimentConfig, output_dir=None) -> dict:
    """Write records.csv, summary.json and (if configured) plots and
    telemetry; returns the summary."""
    out = ensure_writable(output_dir or config.output_dir)
    write_records_csv(out / "records.csv", records)
    summary = build_summary(records, config)
    write_summary(out / "summary.json", summary)
    if config.telemetry:
        write_telemetry(out / "telemetry", records)
    if config.emit_plots and any(not r.failed for r in records):
        write_plots(out, [r for r in records if not r.failed], summary)
    return summary

