# %% [markdown]
# # Recovering the index direction
#
# For standard Gaussian contexts, E[y x] = E[f'(x . theta)] theta, so a
# plain average of y x points along theta for any link with nonzero mean
# slope.  Normalizing removes the unknown scale.

# %%
import numpy as np

from zoomsib.stein import SteinState, default_tau

d = 10
rng = np.random.default_rng(3)
theta = rng.standard_normal(d)
theta /= np.abs(theta).sum()

# %%
for n in [2500, 10_000, 40_000, 160_000]:
    errs = []
    for seed in range(20):
        r = np.random.default_rng([n, seed])
        X = r.standard_normal((n, d))
        z = X @ theta
        y = -((z - 1) ** 2) + 1 + 0.1 * r.standard_normal(n)  # quadratic link, E[f'] = 2
        st = SteinState(d, default_tau(n, d, 0.1)).accumulate_many(X, y)
        errs.append(np.abs(st.normalized() - theta).sum())
    print(f"n={n:7d}  median l1 error={np.median(errs):.4f}  scale estimate={st.mu_estimate():.3f}")

# %% [markdown]
# Each 4x increase in n roughly halves the error, the 1/sqrt(n) rate.
