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
# # Mechanisms and their lotteries
#
# Agents sit on [0, 1] and approve one or both of two facilities. Only one
# facility gets built. An agent's utility is `1 - |x - y|` when the built
# facility is one they approve, and 0 otherwise. Everything below is exact.

# %%
from fractions import Fraction as F

from hetfl import Instance, Mechanism, expected_welfare, optimal_choice

inst = Instance.from_pairs([
    (F(0), {1}), (F(1, 5), {1}), (F(3, 5), {1, 2}), (F(9, 10), {2}), (F(1), {2}),
])
outcome, best = optimal_choice(inst)
print("optimum:", outcome, "welfare", best)

# %% [markdown]
# Every named mechanism returns a lottery over outcomes. Deterministic ones
# put all the mass on a single outcome.

# %%
for name in ["middle", "proportional", "mirror", "random-median:1/3",
             "rd:optimal", "rd:fixed:1/2", "rd:proportional", "rd:lowest-index"]:
    lottery = Mechanism.parse(name)(inst)
    welfare = expected_welfare(inst, lottery)
    print(f"{name:18} E[W] = {str(welfare):8} ratio = {best / welfare}")

# %% [markdown]
# Random dictatorship lets a uniformly random agent choose. Someone who
# approves both facilities needs a tie rule; `rd:optimal` hands them the
# facility that wins in the optimal outcome.

# %%
for p, o in Mechanism.parse("rd:optimal")(inst):
    print(p, o)
