"""Exhaustive manipulability audits and approximation-ratio evaluation.

A PASS only says that no profitable misreport exists inside the searched
deviation space; it is not a proof of strategyproofness.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, MutableMapping

from .model import (
    HALF,
    ONE,
    ZERO,
    Agent,
    InformationSetting,
    Instance,
    Lottery,
    expected_agent_utility,
    expected_welfare,
    format_rational,
    optimal_choice,
)

SCHEMA_VERSION = 1
INFINITY = math.inf

CSV_COLUMNS = (
    "mechanism", "instance_id", "setting", "verdict", "n_deviations",
    "first_violation_agent", "utility_before", "utility_after",
)


class DeviationSpaceTooLarge(RuntimeError):
    pass


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"


def all_approval_sets(m: int) -> list:
    """Every non-empty subset of facilities ``1..m``, smallest first."""
    facilities = range(1, m + 1)
    return [
        frozenset(c)
        for size in range(1, m + 1)
        for c in itertools.combinations(facilities, size)
    ]


@dataclass(frozen=True)
class DeviationSpace:
    """Which misreports an agent may submit.

    Positions range over ``{0, 1/q, ..., 1}`` and 1/2, plus (with
    ``include_positions``) every agent's true position. Approvals range over
    all non-empty subsets. The setting freezes positions or approvals.
    """

    setting: InformationSetting = InformationSetting.GENERAL
    grid: int = 4
    include_positions: bool = True
    max_deviations: int = 2_000_000

    def __post_init__(self):
        object.__setattr__(self, "setting", InformationSetting(self.setting))
        if self.grid < 1:
            raise ValueError("grid denominator must be >= 1")

    def position_candidates(self, instance: Instance) -> list:
        grid = {Fraction(i, self.grid) for i in range(self.grid + 1)} | {HALF}
        if self.include_positions:
            grid |= set(instance.positions) | {ZERO, ONE}
        return sorted(grid)

    def misreports(self, instance: Instance, agent_id: int, positions=None) -> list:
        """Admissible reports of ``agent_id`` other than the truthful one, sorted."""
        truth = instance.agents[agent_id]
        if self.setting.positions_private:
            xs = positions if positions is not None else self.position_candidates(instance)
        else:
            xs = [truth.position]
        if self.setting.preferences_private:
            prefs = all_approval_sets(instance.m)
        else:
            prefs = [truth.approvals]
        reports = [Agent(x, a) for x in xs for a in prefs]
        return sorted((r for r in reports if r != truth), key=Agent.sort_key)


@dataclass(frozen=True)
class Violation:
    coalition: tuple
    misreports: tuple
    truthful_utilities: tuple
    deviant_utilities: tuple

    def __post_init__(self):
        if not all(d > t for t, d in zip(self.truthful_utilities, self.deviant_utilities)):
            raise ValueError("every coalition member must strictly gain")

    def sort_key(self) -> tuple:
        return (self.coalition, tuple(a.sort_key() for a in self.misreports))


@dataclass(frozen=True)
class AuditReport:
    verdict: Verdict
    violations: tuple
    deviations_checked: int
    setting: InformationSetting = InformationSetting.GENERAL

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    @property
    def first_violation(self) -> Violation | None:
        return self.violations[0] if self.violations else None


class _LotteryCache:
    """Lotteries keyed by the reported profile, plus utilities per lottery.

    The key is the tuple of reported agents, so an ``Instance`` is only
    built on a miss. The store may be shared between audits of one mechanism.
    """

    def __init__(self, mechanism: Callable, store: MutableMapping | None):
        self.mechanism = mechanism
        self.store = {} if store is None else store
        self.utilities: dict = {}

    def lottery(self, base: Instance, agents: tuple) -> Lottery:
        key = (agents, base.m, base.k, base.utility_class)
        lottery = self.store.get(key)
        if lottery is None:
            reported = Instance(agents, base.m, base.k, base.utility_class)
            lottery = self.store[key] = self.mechanism(reported)
        return lottery

    def utility(self, truth: Instance, agent_id: int, lottery: Lottery) -> Fraction:
        key = (id(lottery), truth.agents[agent_id])
        u = self.utilities.get(key)
        if u is None:
            u = self.utilities[key] = expected_agent_utility(truth, agent_id, lottery)
        return u


def _finish(violations: list, checked: int, setting: InformationSetting) -> AuditReport:
    violations.sort(key=Violation.sort_key)
    verdict = Verdict.FAIL if violations else Verdict.PASS
    return AuditReport(verdict, tuple(violations), checked, setting)


def audit_strategyproof(
    mechanism: Callable[[Instance], Lottery],
    instance: Instance,
    space: DeviationSpace = DeviationSpace(),
    *,
    stop_at_first: bool = False,
    cache: MutableMapping | None = None,
) -> AuditReport:
    """Try every unilateral misreport of every agent.

    Utilities are always measured at the agent's true attributes. Pass the
    same ``cache`` dict to several audits of one mechanism to reuse lotteries
    of repeated reported profiles.
    """
    return audit_group_strategyproof(
        mechanism, instance, space, 1, stop_at_first=stop_at_first, cache=cache
    )


def audit_group_strategyproof(
    mechanism: Callable[[Instance], Lottery],
    instance: Instance,
    space: DeviationSpace = DeviationSpace(),
    max_coalition: int = 2,
    *,
    stop_at_first: bool = False,
    cache: MutableMapping | None = None,
) -> AuditReport:
    """Try every joint misreport of every coalition of size 1..max_coalition.

    A violation needs every member to gain strictly. Joint misreports where
    some member reports truthfully are skipped because the smaller coalition
    already covers them.
    """
    run = _LotteryCache(mechanism, cache)
    positions = space.position_candidates(instance)
    options = [space.misreports(instance, i, positions) for i in range(instance.n)]
    coalitions = [
        c for size in range(1, max(max_coalition, 0) + 1)
        for c in itertools.combinations(range(instance.n), size)
    ]
    total = sum(math.prod(len(options[i]) for i in c) for c in coalitions)
    if total > space.max_deviations:
        raise DeviationSpaceTooLarge(
            f"{total} deviations exceed the cap max_deviations={space.max_deviations}"
        )

    truthful = run.lottery(instance, instance.agents)
    before = [run.utility(instance, i, truthful) for i in range(instance.n)]
    best_possible = [Fraction(min(instance.k, len(a.approvals))) for a in instance.agents]

    violations: list = []
    checked = 0
    for coalition in coalitions:
        if any(before[i] >= best_possible[i] for i in coalition):
            # someone already at the utility ceiling cannot strictly gain
            checked += math.prod(len(options[i]) for i in coalition)
            continue
        for joint in itertools.product(*(options[i] for i in coalition)):
            checked += 1
            reported = list(instance.agents)
            for i, agent in zip(coalition, joint):
                reported[i] = agent
            lottery = run.lottery(instance, tuple(reported))
            after = []
            for i in coalition:
                u = run.utility(instance, i, lottery)
                if u <= before[i]:
                    break
                after.append(u)
            else:
                violations.append(Violation(
                    coalition, tuple(joint),
                    tuple(before[i] for i in coalition), tuple(after),
                ))
                if stop_at_first:
                    return _finish(violations, checked, space.setting)
    return _finish(violations, checked, space.setting)


@dataclass(frozen=True)
class RatioReport:
    instance_digest: str
    mechanism_welfare: Fraction
    optimal_welfare: Fraction
    ratio: Fraction | float

    @property
    def unbounded(self) -> bool:
        return self.ratio == INFINITY


def approximation_ratio(mechanism: Callable[[Instance], Lottery], instance: Instance) -> RatioReport:
    """Optimal welfare over the mechanism's expected welfare on one instance.

    The ratio is ``INFINITY`` when the mechanism earns nothing but the
    optimum is positive.
    """
    optimum = optimal_choice(instance)[1]
    achieved = expected_welfare(instance, mechanism(instance))
    if achieved == 0:
        ratio = ONE if optimum == 0 else INFINITY
    else:
        ratio = optimum / achieved
    return RatioReport(instance.digest(), achieved, optimum, ratio)


def within_sqrt3_bound(optimum: Fraction, achieved: Fraction) -> bool:
    """Exact test of ``optimum / achieved <= (1 + sqrt(3)) / 2``.

    Equivalent to ``2*W^2 - 2*E^2 <= sqrt(3) * E^2``; when the left side is
    positive both sides are squared.
    """
    lhs = 2 * optimum * optimum - 2 * achieved * achieved
    if lhs <= 0:
        return True
    return lhs * lhs <= 3 * achieved**4


# --- report serialization -------------------------------------------------


def _rational_or_inf(value) -> str:
    return "inf" if value == INFINITY else format_rational(value)


def violation_to_dict(v: Violation) -> dict:
    return {
        "coalition": list(v.coalition),
        "misreports": [
            {"x": format_rational(a.position), "approve": sorted(a.approvals)}
            for a in v.misreports
        ],
        "utility_before": [format_rational(u) for u in v.truthful_utilities],
        "utility_after": [format_rational(u) for u in v.deviant_utilities],
    }


def audit_report_to_dict(report: AuditReport, mechanism: str = "", instance_id: str = "") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mechanism": mechanism,
        "instance_id": instance_id,
        "setting": report.setting.value,
        "verdict": report.verdict.value,
        "n_deviations": report.deviations_checked,
        "violations": [violation_to_dict(v) for v in report.violations],
    }


def ratio_report_to_dict(report: RatioReport, mechanism: str = "") -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "mechanism": mechanism,
        "instance_id": report.instance_digest,
        "mechanism_welfare": format_rational(report.mechanism_welfare),
        "optimal_welfare": format_rational(report.optimal_welfare),
        "ratio": _rational_or_inf(report.ratio),
    }
    if not report.unbounded:
        out["ratio_decimal"] = float(report.ratio)
    return out


def audit_csv_row(report: AuditReport, mechanism: str, instance_id: str) -> dict:
    first = report.first_violation
    return {
        "mechanism": mechanism,
        "instance_id": instance_id,
        "setting": report.setting.value,
        "verdict": report.verdict.value,
        "n_deviations": report.deviations_checked,
        "first_violation_agent": "" if first is None else first.coalition[0],
        "utility_before": "" if first is None else format_rational(first.truthful_utilities[0]),
        "utility_after": "" if first is None else format_rational(first.deviant_utilities[0]),
    }


def audit_reports_to_csv(rows: Iterable[tuple]) -> str:
    """CSV text for ``(report, mechanism, instance_id)`` triples."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report, mechanism, instance_id in rows:
        writer.writerow(audit_csv_row(report, mechanism, instance_id))
    return buffer.getvalue()
