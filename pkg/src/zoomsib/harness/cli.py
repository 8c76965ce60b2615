"""Command line entry point: ``zoomsib {run,validate-lb,slope,ingest}``.

Failures print one JSON line ``{"error": ..., "message": ...}`` to stderr
and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .. import lowerbound as lb
from ..ingest import CSVFormatError, kmeans, load_csv, save_cluster_cache
from .config import ConfigError, load_config
from .export import ensure_writable, export
from .runner import default_threads, run_experiment
from .stats import loglog_slope

log = logging.getLogger("zoomsib")


def _global_flags(parser, default):
    parser.add_argument("--seed", type=int, default=default, help="base seed")
    parser.add_argument("--threads", type=int, default=default,
                        help="worker processes (default: $ZOOMSIB_THREADS or CPU count)")
    parser.add_argument("--out", default=default, help="output directory or file")


def _build_parser():
    parser = argparse.ArgumentParser(prog="zoomsib", description=__doc__.splitlines()[0])
    _global_flags(parser, None)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run an experiment config")
    p.add_argument("config")

    p = sub.add_parser("validate-lb", parents=[common], help="check a hard instance")
    p.add_argument("T", type=int)
    p.add_argument("--mc-rounds", type=int, default=100_000,
                   help="Monte Carlo rounds for the availability check (0 skips it)")
    p.add_argument("--kl-logs", type=int, default=100)

    p = sub.add_parser("slope", parents=[common], help="log-log slopes from a summary")
    p.add_argument("summary")

    p = sub.add_parser("ingest", parents=[common], help="cluster a CSV into replay arms")
    p.add_argument("csv")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--features", default=None, help="comma-separated feature columns")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--n-init", type=int, default=10, help="k-means restarts")
    return parser


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    ensure_writable(cfg.output_dir)
    records = run_experiment(cfg, threads=args.threads or default_threads())
    summary = export(records, cfg)
    print(json.dumps({"output_dir": str(cfg.output_dir), "records": len(records),
                      "failed": sum(r.failed for r in records), "slopes": summary["slopes"]}))
    return 0


def _random_pull_log(hi, rng, n):
    z = rng.uniform(-1, 1, n)
    return list(zip(hi.bin_of(z).tolist(), z.tolist()))


def cmd_validate_lb(args):
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    hi = lb.HardInstance(args.T)
    N = hi.N
    checks = {
        "null": lb.validate_instance(hi).to_dict(),
        "spike": lb.validate_instance(hi.with_beta(lb.spike_beta(N, 1 + N // 2))).to_dict(),
        "random": lb.validate_instance(
            hi.with_beta(np.where(rng.random(N) < 0.5, -1.0, 1.0))).to_dict(),
    }
    analytic = (1 - 1 / (2 * N)) ** hi.K
    avail = {"analytic": analytic, "bound": float(args.T) ** -2,
             "analytic_ok": analytic <= float(args.T) ** -2}
    if args.mc_rounds > 0:
        res = lb.availability_mc(hi, args.mc_rounds, rng)
        avail.update(rounds=res.rounds, empirical=res.empirical.tolist(),
                     standard_error=res.standard_error,
                     mc_ok=bool(res.within(3.0).all()))
    kl_ok = True
    for _ in range(args.kl_logs):
        j = int(rng.integers(1, N + 1))
        kl_ok &= lb.kl_accumulate(_random_pull_log(hi, rng, 200), j, hi).ok
    report = {"T": hi.T, "N": N, "K": hi.K, "epsilon": hi.epsilon,
              "validity": checks, "availability": avail, "kl_ok": bool(kl_ok)}
    report["ok"] = bool(all(c["ok"] for c in checks.values()) and avail["analytic_ok"]
                        and avail.get("mc_ok", True) and kl_ok)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0 if report["ok"] else 1


def cmd_slope(args):
    summary = json.loads(Path(args.summary).read_text())
    curves = {}
    for g in summary["groups"]:
        if g.get("final_mean") is not None:
            curves.setdefault((g["policy"], g["d"]), []).append((g["T"], g["final_mean"]))
    out = []
    for (policy, d), pts in curves.items():
        if len(pts) < 2:
            continue
        fit = loglog_slope(sorted(pts))
        out.append({"policy": policy, "d": d, "slope": fit.slope,
                    "intercept": fit.intercept, "r_squared": fit.r_squared,
                    "points": len(pts)})
    print(json.dumps(out, indent=2))
    return 0


def cmd_ingest(args):
    feats = args.features.split(",") if args.features else None
    data = load_csv(args.csv, feats, args.label_column, args.target)
    seed = 0 if args.seed is None else args.seed
    res = kmeans(data.features, args.k, max_iters=args.max_iters, seed=seed,
                 n_init=args.n_init)
    sizes = np.bincount(res.assignments, minlength=args.k)
    means = [float(data.rewards[res.assignments == k].mean()) if sizes[k] else None
             for k in range(args.k)]
    info = {"rows": int(data.features.shape[0]), "d": int(data.features.shape[1]),
            "columns": data.columns, "dropped": data.dropped, "K": args.k,
            "nonempty_clusters": int((sizes > 0).sum()), "cluster_sizes": sizes.tolist(),
            "cluster_reward_means": means, "iterations": res.n_iter, "inertia": res.inertia}
    if args.out:
        out = Path(args.out)
        if out.suffix != ".json":
            ensure_writable(out)
            out = out / "clusters.json"
        save_cluster_cache(out, res)
        info["cache"] = str(out)
    print(json.dumps(info, indent=2))
    return 0


COMMANDS = {"run": cmd_run, "validate-lb": cmd_validate_lb, "slope": cmd_slope,
            "ingest": cmd_ingest}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CSVFormatError, FileNotFoundError, PermissionError,
            ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
