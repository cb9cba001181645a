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
# # Worst-case ratios
#
# Random dictatorship has a closed-form ratio on a five-count family of
# single-approval instances. Enumerating it exactly finds the 3/2 maximum.

# %%
import numpy as np

from hetfl.search import (
    SearchConfig,
    WorstCaseParams,
    conjecture_scan,
    maximize_rd_closedform,
    rd_closedform_ratio,
    worst_case_search,
)

best, ratio = maximize_rd_closedform(12, 4)
print("maximizer", best.counts, "x =", best.x, "ratio", ratio)
print("materialized:", best.materialize())

# %% [markdown]
# Ratios over part of the family; NaN marks counts where facility 1 would not
# be optimal, which the family excludes.

# %%
def closed_form_or_nan(*counts):
    try:
        return float(rd_closedform_ratio(WorstCaseParams(*counts)))
    except ValueError:
        return float("nan")


table = np.array([[closed_form_or_nan(a0, 0, 1, b, b) for b in range(4)] for a0 in range(1, 7)])
print("ratio for (a0, 0, 1, b, b), rows a0 = 1..6, columns b = 0..3")
print(np.round(table, 4))

# %% [markdown]
# The hill climber works on concrete instances for any mechanism. Moves shift
# one agent by one grid step or flip one approval; only strict improvements
# are kept. Equal seeds give equal results.

# %%
for name in ["middle", "mirror", "proportional", "rd:optimal"]:
    result = worst_case_search(SearchConfig(name, n_agents=4, iterations=3000, seed=0, grid=20))
    print(f"{name:14} {result.ratio} = {float(result.ratio):.4f}")

# %% [markdown]
# Random dictatorship with proportional tie-breaking: the scanner reports its
# maximum plus two reference instances and flags anything above 3/2.

# %%
scan = conjecture_scan(SearchConfig("rd:proportional", n_agents=4, iterations=3000, seed=0, grid=20))
print("search max", scan.max_ratio, "above 3/2:", scan.exceeds)
for ref in scan.references:
    print(f" {ref.name}: {ref.ratio} = {float(ref.ratio):.4f}, above 3/2: {ref.exceeds}")
