"""Expected-versus-computed check tables for every corpus construction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import corpus
from .audit import (
    DeviationSpace,
    approximation_ratio,
    audit_group_strategyproof,
    audit_strategyproof,
)
from .mechanisms import Mechanism
from .model import (
    HALF,
    ONE,
    ZERO,
    InformationSetting,
    Outcome,
    as_rational,
    best_location_on,
    expected_agent_utility,
    expected_welfare,
    format_rational,
    optimal_choice,
    social_welfare,
)


@dataclass(frozen=True)
class Check:
    label: str
    expected: object
    computed: object
    source: str = "paper"
    relation: str = "=="

    @property
    def ok(self) -> bool:
        if self.relation == "<=":
            return self.computed <= self.expected
        return self.computed == self.expected


def _show(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, tuple):
        return "(" + ", ".join(_show(v) for v in value) + ")"
    return str(value)


def _differing_agents(first, second) -> list:
    return [i for i, (a, b) in enumerate(zip(first.agents, second.agents)) if a != b]


def fig1_checks(eps=corpus.DEFAULT_EPS) -> list:
    eps = as_rational(eps)
    first, second = corpus.fig1_pair(eps)
    counts = first.approval_counts()
    moved = _differing_agents(first, second)
    return [
        Check("I: approvers of facility 1", 2, counts[1]),
        Check("I: approvers of facility 2", 2, counts[2]),
        Check("I': optimal welfare", Fraction(2), optimal_choice(second)[1]),
        Check("I': best welfare from facility 2", 1 + eps, best_location_on(second, 2)[1], relation="<="),
        Check("middle ratio on I'", Fraction(2), approximation_ratio(Mechanism.parse("middle"), second).ratio, "derived"),
        Check("pair differs only in agent 1's position", "position of agent 1",
              "position of agent 1" if moved == [1] and first.agents[1].approvals == second.agents[1].approvals
              else f"agents {moved}", "structure"),
    ]


def fig2_checks() -> list:
    first, second = corpus.fig2_pair()
    outcome, optimum = optimal_choice(first)
    left = best_location_on(first, 1, ZERO, HALF)[1]
    moved = _differing_agents(first, second)
    return [
        Check("I: optimal welfare", Fraction(13, 6), optimum),
        Check("I: optimal outcome (lowest index)", Outcome.single(1, Fraction(5, 6)), outcome),
        Check("I: facility 2 at 1/6", Fraction(13, 6), social_welfare(first, Outcome.single(2, Fraction(1, 6)))),
        Check("I: best facility-1 welfare with y <= 1/2", Fraction(11, 6), left),
        Check("I: ratio 13/6 over 11/6", Fraction(13, 11), optimum / left),
        Check("I: middle welfare", Fraction(11, 6), expected_welfare(first, Mechanism.parse("middle")(first))),
        Check("I': best facility-1 welfare", Fraction(11, 6), best_location_on(second, 1)[1]),
        Check("I': facility-1 welfare anywhere in [5/6, 1]", Fraction(11, 6),
              min(social_welfare(second, Outcome.single(1, y)) for y in (Fraction(5, 6), Fraction(11, 12), ONE))),
        Check("I': best facility-2 welfare (at 1/6)", (Fraction(1, 6), Fraction(13, 6)), best_location_on(second, 2)),
        Check("pair differs only in agent 1's preference", "preference of agent 1",
              "preference of agent 1" if moved == [1] and first.agents[1].position == second.agents[1].position
              else f"agents {moved}", "structure"),
    ]


def random_median_lb_checks(eps=corpus.DEFAULT_EPS) -> list:
    eps = as_rational(eps)
    first, second = corpus.random_median_lb_pair(eps)
    mirror = Mechanism.parse("mirror")
    return [
        Check("I': best facility-1 welfare (at eps)", (eps, Fraction(2)), best_location_on(second, 1)),
        Check("I': best facility-2 welfare (paper states 1+eps)", 1 + 2 * eps, best_location_on(second, 2)[1], "derived"),
        Check("I': mirror expected welfare", Fraction(3, 2) + eps, expected_welfare(second, mirror(second)), "derived"),
        Check("I': mirror ratio 4/(3+2eps)", 4 / (3 + 2 * eps), approximation_ratio(mirror, second).ratio, "derived"),
        Check("pair differs only in agent 3's position", [3], _differing_agents(first, second), "structure"),
    ]


def fig3_checks(n: int = 4, eps=Fraction(1, 10)) -> list:
    eps = as_rational(eps)
    first, second = corpus.fig3_pair(n, eps)
    rd = Mechanism.parse("rd:optimal")
    last = n - 1
    ideal_first, ideal_second = corpus.fig3_pair(n, ZERO)
    general = audit_strategyproof(rd, first, DeviationSpace(InformationSetting.GENERAL, 10),
                                  stop_at_first=True)
    known = audit_strategyproof(rd, first, DeviationSpace(InformationSetting.KNOWN_POSITIONS, 10))
    return [
        Check("I: truthful utility of the {2}-agent", Fraction(1, n), expected_agent_utility(first, last, rd(first))),
        Check("I': utility after misreport (unperturbed)", Fraction(n - 1, 2 * n),
              expected_agent_utility(ideal_first, last, rd(ideal_second))),
        Check("I': utility after misreport (perturbed)",
              Fraction(n - 1, n) * (HALF - eps),
              expected_agent_utility(first, last, rd(second)), "derived"),
        Check("rd:optimal general audit", "fail", general.verdict.value, "derived"),
        Check("rd:optimal known-positions audit", "pass", known.verdict.value),
    ]


def prd_checks() -> list:
    instance = corpus.prd_instance()
    optimum = optimal_choice(instance)[1]
    checks = [Check("optimal welfare", Fraction(30), optimum)]
    for p in (ZERO, Fraction(1, 4), HALF):
        mech = Mechanism.parse(f"rd:fixed:{p}")
        welfare = expected_welfare(instance, mech(instance))
        checks.append(Check(f"rd:fixed:{p} expected welfare", ((3 + p) * 225 + 200) / Fraction(50), welfare))
        checks.append(Check(f"rd:fixed:{p} ratio", 1500 / ((3 + p) * 225 + 200), optimum / welfare))
    checks.append(Check("rd:fixed:1/2 ratio is 120/79", Fraction(120, 79),
                        approximation_ratio(Mechanism.parse("rd:fixed:1/2"), instance).ratio))
    prop = approximation_ratio(Mechanism.parse("rd:proportional"), instance).ratio
    checks.append(Check("rd:proportional ratio (p = 8/13)", Fraction(780, 527), prop, "derived"))
    return checks


def km_nongsp_checks(m: int = 4, k: int = 2) -> list:
    instance = corpus.km_nongsp_instance(m, k)
    outcome = Mechanism.parse("km-middle")(instance).support[0][1]
    report = audit_group_strategyproof(
        Mechanism.parse("km-middle"), instance,
        DeviationSpace(InformationSetting.KNOWN_POSITIONS, 2), 2,
    )
    coalitions = sorted({v.coalition for v in report.violations})
    return [
        Check("every facility approved once", [1] * m, list(instance.approval_counts().values())),
        Check("km-middle picks facilities 1..k", tuple(range(1, k + 1)), outcome.facilities, "derived"),
        Check("group audit (coalitions <= 2)", "fail", report.verdict.value),
        Check("coalition of the approvers of facilities k+1, k+2 manipulates", True,
              (k, k + 1) in coalitions, "derived"),
    ]


def km_lb_checks(m: int = 4, k: int = 2, eps=corpus.DEFAULT_EPS) -> list:
    eps = as_rational(eps)
    sequence = corpus.km_lb_sequence(m, k, eps)
    mech = Mechanism.parse("km-middle")
    checks = [Check("sequence length m - k + 1", m - k + 1, len(sequence), "trivial")]
    for j, instance in enumerate(sequence):
        welfare = expected_welfare(instance, mech(instance))
        checks.append(Check(f"I_{j}: km-middle welfare <= (1+eps)k", (1 + eps) * k, welfare, relation="<="))
    checks.append(Check("final optimal welfare", Fraction(2 * k), optimal_choice(sequence[-1])[1]))
    return checks


def checks_for(name: str) -> list:
    base, *args = name.strip().split(":")
    base = base.lower()
    if base == "fig1":
        return fig1_checks(*args)
    if base == "fig2":
        return fig2_checks()
    if base == "random-median-lb":
        return random_median_lb_checks(*args)
    if base == "fig3":
        return fig3_checks(*([int(args[0])] + args[1:] if args else []))
    if base == "prd":
        return prd_checks()
    if base == "km-nongsp":
        return km_nongsp_checks(*(int(a) for a in args))
    if base == "km-lb":
        return km_lb_checks(*([int(a) for a in args[:2]] + args[2:]))
    raise KeyError(name)


def checks_to_rows(checks: list) -> list:
    return [
        {"check": c.label, "expected": _show(c.expected), "computed": _show(c.computed),
         "relation": c.relation, "source": c.source, "ok": c.ok}
        for c in checks
    ]


def format_table(checks: list) -> str:
    rows = [("check", "expected", "computed", "source", "ok")]
    for c in checks:
        rel = "" if c.relation == "==" else f"{c.relation} "
        rows.append((c.label, rel + _show(c.expected), _show(c.computed), c.source, "yes" if c.ok else "NO"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)
