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
# # Looking for profitable misreports
#
# An audit tries every report in a finite deviation space and keeps those
# that strictly raise the deviator's true expected utility. A PASS covers
# only the searched space.

# %%
from fractions import Fraction as F

from hetfl import corpus
from hetfl.audit import DeviationSpace, audit_group_strategyproof, audit_strategyproof
from hetfl.mechanisms import Mechanism
from hetfl.model import InformationSetting

rd = Mechanism.parse("rd:optimal")
inst, prime = corpus.fig3_pair(4, F(1, 10))

general = audit_strategyproof(rd, inst, DeviationSpace(InformationSetting.GENERAL, 10))
print(general.verdict.value, general.deviations_checked, "deviations")
for v in general.violations:
    print(" agent", v.coalition, "reports", v.misreports, ":", v.truthful_utilities, "->", v.deviant_utilities)

# %% [markdown]
# The {2}-agent at 1 gains by moving next to the dual approvers: the optimum
# switches to facility 2 and dual dictators now pick facility 2 close to it.
# When positions are public the same mechanism has nothing to exploit.

# %%
known = audit_strategyproof(rd, inst, DeviationSpace(InformationSetting.KNOWN_POSITIONS, 10))
print(known.verdict.value, known.deviations_checked, "deviations")

# %% [markdown]
# Coalitions: (k,m)-Middle with k = 2 of m = 4 lets the two agents left out
# approve each other's facility and push both into the top k.

# %%
report = audit_group_strategyproof(
    Mechanism.parse("km-middle"), corpus.km_nongsp_instance(4, 2),
    DeviationSpace(InformationSetting.KNOWN_POSITIONS, 2), max_coalition=2,
)
print(report.verdict.value)
for v in report.violations:
    print(" coalition", v.coalition, [sorted(a.approvals) for a in v.misreports],
          v.truthful_utilities, "->", v.deviant_utilities)
