# %% [markdown]
# # Replay on clustered classification data
#
# Rows are standardized and grouped by k-means; every round shows one row
# from each cluster and pays 1 when the row has the target label.

# %%
from importlib import resources

import numpy as np

from zoomsib import RandomPolicy, ZoomSIB, ZoomSIBConfig
from zoomsib.harness.runner import run_policy
from zoomsib.ingest import ReplayEnvironment, build_replay

path = resources.files("zoomsib") / "data" / "planted_clusters.csv"
ds = build_replay(path, K=8, target_class="1", seed=0)
print("cluster reward rates:", np.round(ds.cluster_means, 2))

# %%
T = 5000
for name in ["zoomsib", "random"]:
    env = ReplayEnvironment(ds, seed=10)
    if name == "zoomsib":
        pol = ZoomSIB(ZoomSIBConfig(T=T, K=ds.K, noise_sigma_assumed=0.5), ds.d, 1)
    else:
        pol = RandomPolicy(1)
    traj = run_policy(env, pol, T)
    print(f"{name:8s} realized regret={traj.cum_regret[-1]:7.1f}  cluster-mean regret={traj.alt_cum_final:7.1f}")
