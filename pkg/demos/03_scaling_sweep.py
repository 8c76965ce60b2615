# %% [markdown]
# # Regret scaling across horizons
#
# The harness runs every (policy, T, d, trial) cell from one config and
# fits log R_T against log T.  Fewer trials than the full sweep keep this
# quick; `zoomsib run configs/quadratic_sweep.yaml` runs the full one.

# %%
from pathlib import Path

from zoomsib.harness import export, load_config, run_experiment

cfg = load_config(Path(__file__).parent / "configs" / "quadratic_sweep.yaml")
cfg.trials = 5
cfg.horizons = [2000, 5000, 10_000]
cfg.output_dir = "results/demo_sweep"
records = run_experiment(cfg)
summary = export(records, cfg)

# %%
for s in summary["slopes"]:
    print(f"{s['policy']:10s} slope={s['slope']:.3f}")
for g in summary["groups"]:
    print(f"{g['policy']:10s} T={g['T']:6d}  {g['final_mean']:9.1f} +- {g['final_std']:.1f}")
