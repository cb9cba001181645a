# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Choosing k of m facilities
#
# With several facilities built, an agent's utility can add up every approved
# facility (`sum`), take the best one (`min`, closest) or take the literal
# minimum over all built facilities (`max`, where any unapproved facility
# contributes 0). (k,m)-Middle builds the k most approved facilities at 1/2.

# %%
from fractions import Fraction as F

import numpy as np

from hetfl import corpus
from hetfl.audit import approximation_ratio
from hetfl.mechanisms import Mechanism
from hetfl.model import Instance, UtilityClass, expected_welfare, optimal_choice
from hetfl.search import random_instance

km = Mechanism.parse("km-middle")
for j, inst in enumerate(corpus.km_lb_sequence(4, 2, F(1, 100))):
    print(f"I_{j}: km-middle {expected_welfare(inst, km(inst))}, optimum {optimal_choice(inst)[1]}")

# %% [markdown]
# The ratio-2 argument counts approvals of the built facilities. Under the
# `sum` class each approval is worth at least 1/2, so it goes through. Under
# `min` an agent approving several built facilities still earns at most 1,
# and the bound breaks:

# %%
inst = Instance.from_pairs([(F(1), {1, 2}), (F(1), {1, 2}), (F(0), {3})], m=3, k=2,
                           utility_class=UtilityClass.MIN_DIST)
print(approximation_ratio(km, inst))

# %% [markdown]
# A random sample per class, k < m.

# %%
rng = np.random.default_rng(0)
for uc in UtilityClass:
    above, worst = 0, F(0)
    for _ in range(2000):
        m = int(rng.integers(2, 6))
        sample = random_instance(rng, int(rng.integers(1, 9)), 16, m, int(rng.integers(1, m)), uc)
        r = approximation_ratio(km, sample).ratio
        above += r > 2
        worst = max(worst, r)
    print(f"{uc.value:4}: {above} of 2000 above 2, worst {worst}")
