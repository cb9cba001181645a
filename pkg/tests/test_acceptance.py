"""Acceptance criteria 1 to 10.

Every comparison is exact (Fraction) unless a tolerance is named next to it.
Each test tags itself with its criterion number; the summary at the end of a
pytest run prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import itertools
import json
import sys
from fractions import Fraction

import numpy as np
import pytest

from hetfl import corpus
from hetfl.audit import (
    DeviationSpace,
    all_approval_sets,
    approximation_ratio,
    audit_group_strategyproof,
    audit_strategyproof,
    within_sqrt3_bound,
)
from hetfl.mechanisms import Mechanism
from hetfl.model import (
    HALF,
    ZERO,
    InformationSetting,
    Instance,
    Outcome,
    UtilityClass,
    best_location_on,
    expected_welfare,
    instance_from_dict,
    optimal_choice,
    optimal_welfare_bruteforce,
    social_welfare,
)
from hetfl.search import (
    CONJECTURED_RATIO,
    SearchConfig,
    WorstCaseParams,
    conjecture_result_to_dict,
    conjecture_scan,
    enumerate_worst_case_params,
    maximize_rd_closedform,
    random_instance,
    rd_closedform_ratio,
)

F = Fraction
GENERAL = InformationSetting.GENERAL
KNOWN_POSITIONS = InformationSetting.KNOWN_POSITIONS

RANDOM_GRID = 64          # positions of random instances lie on multiples of 1/64
RANDOM_SAMPLES = 100_000  # criteria 3, 4, 5
MIRROR_TOLERANCE = F(1, 100)    # criterion 5: distance of the pair ratio from 4/3


@pytest.fixture
def criterion(record_property):
    def tag(number: int, part: str = "") -> None:
        record_property("criterion", number)
        record_property("part", part)
    return tag


def random_two_facility(seed: int, count: int, max_agents: int = 8, grid: int = RANDOM_GRID):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_instance(rng, int(rng.integers(1, max_agents + 1)), grid)


def worst_ratio(mechanism: str, seed: int):
    """Largest ratio over the random sample and the instance attaining it."""
    mech = Mechanism.parse(mechanism)
    worst, witness = F(0), None
    for inst in random_two_facility(seed, RANDOM_SAMPLES):
        report = approximation_ratio(mech, inst)
        if report.ratio > worst:
            worst, witness = report.ratio, inst
    return worst, witness


def test_criterion_1_oracle_equivalence(criterion):
    criterion(1)
    mismatches = []
    for inst in random_two_facility(seed=1, count=1000, grid=16):
        fast = optimal_choice(inst)[1]
        slow = optimal_welfare_bruteforce(inst, 16)
        if fast != slow:
            mismatches.append((inst, fast, slow))
    assert mismatches == []


def test_criterion_2_thirteen_elevenths(criterion):
    criterion(2)
    first, _ = corpus.fig2_pair()
    optimum = optimal_choice(first)[1]
    best_left = best_location_on(first, 1, ZERO, HALF)[1]
    # an independent sweep over a fine grid of y <= 1/2 agrees with the breakpoint search
    swept = max(social_welfare(first, Outcome.single(1, F(i, 96))) for i in range(49))
    assert optimum == F(13, 6)
    assert best_left == swept == F(11, 6)
    assert optimum / best_left == F(13, 11)


def test_criterion_3_middle(criterion):
    criterion(3, "fig1 I' ratio")
    _, prime = corpus.fig1_pair(F(1, 100))
    assert approximation_ratio(Mechanism.parse("middle"), prime).ratio == 2


def test_criterion_3_middle_random(criterion):
    criterion(3, "random sample <= 2")
    worst, witness = worst_ratio("middle", seed=3)
    assert worst <= 2, witness


def test_criterion_4_proportional_random(criterion):
    criterion(4)
    mech = Mechanism.parse("proportional")
    breaches = []
    for inst in random_two_facility(seed=4, count=RANDOM_SAMPLES):
        report = approximation_ratio(mech, inst)
        if not within_sqrt3_bound(report.optimal_welfare, report.mechanism_welfare):
            breaches.append(inst)
    assert breaches == []


def test_criterion_5_mirror_lower_bound_pair(criterion):
    criterion(5, "random-median-lb I' ratio")
    eps = F(1, 1000)
    _, prime = corpus.random_median_lb_pair(eps)
    ratio = approximation_ratio(Mechanism.parse("mirror"), prime).ratio
    assert ratio == 2 / (F(3, 2) + eps)
    assert abs(ratio - F(4, 3)) <= MIRROR_TOLERANCE


def test_criterion_5_mirror_random(criterion):
    criterion(5, "random sample <= 4/3")
    worst, witness = worst_ratio("mirror", seed=5)
    assert worst <= F(4, 3), witness


def test_criterion_6_rd_worst_case(criterion):
    criterion(6, "canonical worst case")
    assert approximation_ratio(Mechanism.parse("rd:optimal"), corpus.rd_worst_case()).ratio == F(3, 2)


def test_criterion_6_closed_form_maximum(criterion):
    criterion(6, "maximize(12, 4)")
    best, ratio = maximize_rd_closedform(12, 4)
    assert ratio == F(3, 2)
    c = best.alpha0 // 3
    assert c >= 1 and best.counts == (3 * c, 0, c, c, c)


def test_criterion_6_closed_form_equivalence(criterion):
    criterion(6, "closed form == materialized, up to 10 agents")
    rd = Mechanism.parse("rd:optimal")
    checked = 0
    for params in enumerate_worst_case_params(10, 4):
        assert rd_closedform_ratio(params) == approximation_ratio(rd, params.materialize()).ratio, params
        checked += 1
    assert checked > 1000
    assert WorstCaseParams(3, 0, 1, 1, 1) in set(enumerate_worst_case_params(6, 4))


@pytest.mark.parametrize("p", [F(0), F(1, 4), F(1, 2)])
def test_criterion_7_prd(criterion, p):
    criterion(7, f"p={p}")
    inst = corpus.prd_instance()
    ratio = approximation_ratio(Mechanism.parse(f"rd:fixed:{p}"), inst).ratio
    assert ratio == 1500 / ((3 + p) * 225 + 200)
    if p == HALF:
        assert ratio == F(120, 79)


def test_criterion_8_middle_group_audit(criterion):
    """Exhaustive family: 1 to 3 agents on the 1/4 grid with every approval set.

    Middle only reads approval counts, so the verdict is unchanged when agents
    are relabelled; the family is enumerated as multisets of (position,
    approvals) types.
    """
    criterion(8, "middle group audit")
    mech = Mechanism.parse("middle")
    types = [(F(i, 4), a) for i in range(5) for a in all_approval_sets(2)]
    space = DeviationSpace(GENERAL, 4)
    cache: dict = {}
    audited, failures = 0, []
    for n in (1, 2, 3):
        for combo in itertools.combinations_with_replacement(types, n):
            inst = Instance.from_pairs(combo)
            report = audit_group_strategyproof(mech, inst, space, 3, cache=cache)
            audited += 1
            if not report.passed:
                failures.append((inst, report.first_violation))
    assert audited == 15 + 120 + 680
    assert failures == []


def test_criterion_8_rd_known_positions(criterion):
    criterion(8, "rd:optimal known-positions audit")
    rd = Mechanism.parse("rd:optimal")
    space = DeviationSpace(KNOWN_POSITIONS, 4)
    failures = [
        inst for inst in random_two_facility(seed=8, count=10_000, max_agents=6)
        if not audit_strategyproof(rd, inst, space).passed
    ]
    assert failures == []


def test_criterion_8_rd_general_fails(criterion):
    criterion(8, "rd:optimal general audit on fig3")
    first, prime = corpus.fig3_pair(4, F(1, 10))
    report = audit_strategyproof(Mechanism.parse("rd:optimal"), first, DeviationSpace(GENERAL, 10))
    assert not report.passed
    witness = [v for v in report.violations if v.misreports[0] == prime.agents[3]]
    assert len(witness) == 1
    assert witness[0].coalition == (3,)
    assert (witness[0].truthful_utilities, witness[0].deviant_utilities) == ((F(1, 4),), (F(3, 10),))


@pytest.mark.parametrize("utility_class", list(UtilityClass), ids=lambda u: u.value)
def test_criterion_9_km_middle_ratio(criterion, utility_class):
    criterion(9, f"km-middle <= 2 ({utility_class.value})")
    mech = Mechanism.parse("km-middle")
    rng = np.random.default_rng(9)
    breaches = []
    for _ in range(10_000):
        m = int(rng.integers(2, 6))
        k = int(rng.integers(1, m))
        inst = random_instance(rng, int(rng.integers(1, 9)), 16, m, k, utility_class)
        ratio = approximation_ratio(mech, inst).ratio
        if ratio > 2:
            breaches.append((ratio, inst))
    worst = max(breaches, key=lambda b: b[0], default=None)
    assert not breaches, f"{len(breaches)} of 10000 above 2, worst {worst[0]} on {worst[1]}"


def test_criterion_9_km_nongsp(criterion):
    criterion(9, "km-nongsp coalition")
    report = audit_group_strategyproof(
        Mechanism.parse("km-middle"), corpus.km_nongsp_instance(4, 2), DeviationSpace(KNOWN_POSITIONS, 2), 2
    )
    assert not report.passed
    # 0-based agents 2 and 3 approve facilities 3 and 4
    assert {v.coalition for v in report.violations} == {(2, 3)}


def test_criterion_9_km_lb_sequence(criterion):
    criterion(9, "km-lb sequence")
    eps, k = F(1, 100), 2
    sequence = corpus.km_lb_sequence(4, k, eps)
    mech = Mechanism.parse("km-middle")
    for inst in sequence:
        assert expected_welfare(inst, mech(inst)) <= (1 + eps) * k
    assert optimal_choice(sequence[-1])[1] == 2 * k


@pytest.fixture(scope="module")
def conjecture():
    return conjecture_scan(SearchConfig("rd:proportional", iterations=100_000, seed=0))


def test_criterion_10_scan_completes(criterion, conjecture):
    criterion(10, "scan with witness")
    data = json.loads(json.dumps(conjecture_result_to_dict(conjecture)))
    assert data["seed"] == 0 and data["evaluations"] == 100_000
    witness = instance_from_dict(data["witness_instance"])
    assert approximation_ratio(Mechanism.parse("rd:proportional"), witness).ratio == F(data["max_ratio"])
    assert data["exceeds_conjecture"] == (conjecture.max_ratio > CONJECTURED_RATIO)


def test_criterion_10_prd_recomputed(criterion, conjecture):
    """Dual approvers pick facility 1 with probability 40/65 = 8/13, so the
    welfare is ((3 + 8/13) * 225 + 200) / 50 = 527/26 against an optimum of 30."""
    criterion(10, "prd value recomputed")
    prd = next(ref for ref in conjecture.references if ref.name == "prd")
    assert prd.ratio == 30 / ((3 + F(8, 13)) * 225 + 200) * 50 == F(780, 527)


def test_criterion_10_prd_value(criterion, conjecture):
    criterion(10, "prd value 3900/2263 flagged")
    prd = next(ref for ref in conjecture.references if ref.name == "prd")
    assert prd.ratio == F(3900, 2263)
    assert prd.exceeds


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
