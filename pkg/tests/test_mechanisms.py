from __future__ import annotations

import pickle
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetfl.mechanisms import (
    ConstantRule,
    Mechanism,
    MechanismError,
    TieRule,
    km_middle,
    mechanism_names,
    middle,
    mirror,
    mirror_rule,
    proportional,
    random_dictatorship,
    random_median,
)
from hetfl.model import HALF, ONE, ZERO, Instance, Lottery, Outcome, expected_welfare

F = Fraction

grid_points = st.integers(0, 16).map(lambda i: F(i, 16))
approval_sets = st.sampled_from([{1}, {2}, {1, 2}])
instances = st.lists(st.tuples(grid_points, approval_sets), min_size=1, max_size=7).map(Instance.from_pairs)

ALL_TWO_FACILITY = ["middle", "proportional", "mirror", "random-median:1/3", "rd:optimal",
                    "rd:fixed:1/4", "rd:proportional", "rd:lowest-index", "km-middle"]


def test_middle_takes_majority():
    inst = Instance.from_pairs([(ZERO, {2}), (ONE, {2}), (HALF, {1})])
    assert middle(inst) == Lottery.point(Outcome.single(2, HALF))


def test_middle_tie_goes_to_facility_one():
    inst = Instance.from_pairs([(ZERO, {2}), (ONE, {1})])
    assert middle(inst) == Lottery.point(Outcome.single(1, HALF))


def test_middle_needs_two_facilities():
    with pytest.raises(MechanismError):
        middle(Instance.from_pairs([(ZERO, {1})], m=3))


def test_km_middle_picks_top_counts():
    inst = Instance.from_pairs([(ZERO, {3}), (ONE, {3}), (HALF, {2, 4}), (HALF, {4})], m=4, k=2)
    assert km_middle(inst).support[0][1] == Outcome(((3, HALF), (4, HALF)))


def test_km_middle_matches_middle_for_one_of_two():
    inst = Instance.from_pairs([(ZERO, {2}), (ONE, {1, 2})])
    assert km_middle(inst) == middle(inst)


def test_proportional_lottery():
    inst = Instance.from_pairs([(ZERO, {1}), (F(1, 4), {1}), (ONE, {1}), (ONE, {2})])
    lot = proportional(inst)
    assert lot.probability(Outcome.single(1, F(1, 4))) == F(3, 4)
    assert lot.probability(Outcome.single(2, ONE)) == F(1, 4)


def test_lower_median_with_even_approvers():
    inst = Instance.from_pairs([(ZERO, {1}), (ONE, {1})])
    assert proportional(inst).support[0][1] == Outcome.single(1, ZERO)


def test_unapproved_facility_goes_to_half_with_no_value():
    inst = Instance.from_pairs([(F(1, 4), {1})])
    lot = random_median(inst, ConstantRule(F(1, 2)))
    assert lot.probability(Outcome.single(2, HALF)) == HALF
    assert expected_welfare(inst, lot) == HALF


@pytest.mark.parametrize("n1, n2, q1", [
    (1, 1, F(1, 2)), (2, 1, F(2, 3)), (1, 0, F(3, 4)), (0, 1, F(1, 4)), (3, 2, F(5, 8)),
])
def test_mirror_rule(n1, n2, q1):
    assert mirror_rule(n1, n2) == (q1, ONE - q1)


@given(st.integers(0, 50), st.integers(0, 50))
def test_mirror_rule_symmetric_and_favours_majority(n1, n2):
    if n1 + n2 == 0:
        return
    q1, q2 = mirror_rule(n1, n2)
    assert q1 + q2 == ONE
    assert mirror_rule(n2, n1) == (q2, q1)
    if n1 > n2:
        assert q1 >= F(1, 2)
    assert F(1, 4) <= q1 <= F(3, 4)


def test_mirror_lottery_on_balanced_instance():
    inst = Instance.from_pairs([(ZERO, {1}), (ONE, {2})])
    assert mirror(inst).probability(Outcome.single(1, ZERO)) == HALF


def test_constant_rule_rejects_bad_probability():
    with pytest.raises(MechanismError):
        ConstantRule(F(3, 2))


class TestRandomDictatorship:
    inst = Instance.from_pairs([(ZERO, {1}), (ONE, {2}), (HALF, {1, 2}), (ONE, {1})])

    def test_single_approvers_get_their_facility(self):
        lot = random_dictatorship(self.inst, TieRule.lowest_index())
        assert lot.probability(Outcome.single(1, ZERO)) == F(1, 4)
        assert lot.probability(Outcome.single(2, ONE)) == F(1, 4)
        assert lot.probability(Outcome.single(1, HALF)) == F(1, 4)

    def test_optimal_tie_uses_optimal_facility(self):
        lot = random_dictatorship(self.inst, TieRule.optimal())
        # facility 1 has three approvers and wins in the optimum
        assert lot.probability(Outcome.single(1, HALF)) == F(1, 4)

    def test_fixed_tie(self):
        lot = random_dictatorship(self.inst, TieRule.fixed(F(1, 3)))
        assert lot.probability(Outcome.single(1, HALF)) == F(1, 12)
        assert lot.probability(Outcome.single(2, HALF)) == F(2, 12)

    def test_proportional_tie(self):
        lot = random_dictatorship(self.inst, TieRule.proportional())
        assert lot.probability(Outcome.single(1, HALF)) == F(1, 4) * F(3, 5)

    def test_tie_rule_validation(self):
        with pytest.raises(MechanismError):
            TieRule("coin")
        with pytest.raises(MechanismError):
            TieRule("fixed")
        with pytest.raises(MechanismError):
            TieRule("optimal", F(1, 2))
        with pytest.raises(MechanismError):
            TieRule.fixed(2)


class TestParse:
    @pytest.mark.parametrize("spec", ALL_TWO_FACILITY)
    def test_every_name_runs_and_pickles(self, spec):
        mech = Mechanism.parse(spec)
        inst = Instance.from_pairs([(ZERO, {1}), (F(1, 3), {1, 2}), (ONE, {2})])
        lot = mech(inst)
        assert sum(p for p, _ in lot) == ONE
        assert pickle.loads(pickle.dumps(mech))(inst) == lot

    def test_fixed_name_is_normalised(self):
        assert Mechanism.parse("RD:fixed:0.5").name == "rd:fixed:1/2"

    def test_random_median_name(self):
        assert Mechanism.parse("random-median:0.25").name == "random-median:1/4"

    @pytest.mark.parametrize("spec", ["dictator", "rd:", "rd:fixed", "rd:fixed:2", "rd:fixed:x",
                                      "random-median:-1/2", "rd:optimal:1"])
    def test_unknown(self, spec):
        with pytest.raises(MechanismError):
            Mechanism.parse(spec)

    def test_names_listed(self):
        assert "middle" in mechanism_names()


@given(instances)
def test_every_lottery_is_a_distribution_of_single_placements(inst):
    for spec in ALL_TWO_FACILITY:
        lot = Mechanism.parse(spec)(inst)
        assert sum(p for p, _ in lot) == ONE
        assert all(len(o.placements) == 1 and ZERO <= o.location(o.facilities[0]) <= ONE for _, o in lot)


@given(instances)
def test_rd_dictators_get_full_utility(inst):
    """Whoever is picked as dictator gets a facility they approve at their own position."""
    lot = random_dictatorship(inst, TieRule.lowest_index())
    assert all(o.location(o.facilities[0]) in inst.positions for _, o in lot)
