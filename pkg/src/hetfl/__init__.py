"""Facility location on [0, 1] with approval preferences over facilities.

Exact (Fraction) mechanisms, optimal welfare, manipulation audits and
worst-case ratio search.
"""

from .audit import (
    AuditReport,
    DeviationSpace,
    RatioReport,
    Verdict,
    approximation_ratio,
    audit_group_strategyproof,
    audit_strategyproof,
    within_sqrt3_bound,
)
from .mechanisms import Mechanism, TieRule
from .model import (
    Agent,
    InformationSetting,
    Instance,
    Lottery,
    Outcome,
    UtilityClass,
    expected_welfare,
    load_instance,
    optimal_choice,
    social_welfare,
)
from .search import SearchConfig, conjecture_scan, maximize_rd_closedform, worst_case_search

__version__ = "0.1.0"

__all__ = [
    "Agent", "AuditReport", "DeviationSpace", "InformationSetting", "Instance", "Lottery",
    "Mechanism", "Outcome", "RatioReport", "SearchConfig", "TieRule", "UtilityClass", "Verdict",
    "approximation_ratio", "audit_group_strategyproof", "audit_strategyproof", "conjecture_scan",
    "expected_welfare", "load_instance", "maximize_rd_closedform", "optimal_choice",
    "social_welfare", "within_sqrt3_bound", "worst_case_search",
]
