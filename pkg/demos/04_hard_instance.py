# %% [markdown]
# # The hard instance family
#
# Bumps of height 1/(2N) sit in N bins of [-1, 1].  Only a learner that
# samples every bin about N^2 times can tell which bump points up.

# %%
import numpy as np

from zoomsib.lowerbound import (
    HardInstance,
    availability_mc,
    f_beta,
    kl_accumulate,
    spike_beta,
    validate_instance,
)

hi = HardInstance(1000).with_beta(spike_beta(10, 4))
print(f"N={hi.N} K={hi.K} eps={hi.epsilon}")
print(validate_instance(hi).to_json(indent=1))

# %%
z = np.linspace(-1, 1, 9)
print(np.round(f_beta(z, hi), 4))

# %% [markdown]
# With K = ceil(4 N ln T) contexts per round every inner half-bin is
# almost surely occupied:

# %%
res = availability_mc(hi, 200_000, np.random.default_rng(0))
print(f"analytic {res.analytic:.2e}  empirical {res.pooled:.2e}  bound {res.bound:.0e}")

# %%
# 50 pulls at the centre of bin 4: each contributes (2 eps)^2 / 2 of KL
r = kl_accumulate([(4, hi.centers[3])] * 50, 4, hi)
print(r)
