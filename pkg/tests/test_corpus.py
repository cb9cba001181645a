from __future__ import annotations

from fractions import Fraction

import pytest

from hetfl import corpus, reproduce
from hetfl.audit import approximation_ratio
from hetfl.mechanisms import Mechanism
from hetfl.model import HALF, ONE, ZERO, Instance, UtilityClass, expected_welfare, optimal_choice

F = Fraction


def differing(first: Instance, second: Instance) -> list:
    return [i for i, (a, b) in enumerate(zip(first.agents, second.agents)) if a != b]


class TestPairs:
    def test_fig1_moves_one_position(self):
        first, second = corpus.fig1_pair(F(1, 100))
        assert differing(first, second) == [1]
        assert first.agents[1].approvals == second.agents[1].approvals
        assert second.agents[1].position == ONE

    def test_fig2_changes_one_preference(self):
        first, second = corpus.fig2_pair()
        assert differing(first, second) == [1]
        assert first.agents[1].position == second.agents[1].position == F(1, 6)
        assert second.agents[1].approvals == frozenset({2})

    def test_random_median_pair(self):
        first, second = corpus.random_median_lb_pair(F(1, 1000))
        assert differing(first, second) == [3]
        assert second.agents[3].position == F(1, 1000)

    def test_fig3_pair(self):
        first, second = corpus.fig3_pair(6, F(1, 10))
        assert first.n == 6
        assert differing(first, second) == [5]
        assert [a.approvals for a in first.agents[1:5]] == [frozenset({1, 2})] * 4
        assert second.agents[5].position == F(2, 5)

    @pytest.mark.parametrize("eps", [ZERO, HALF, F(-1, 10), F(3, 4)])
    def test_eps_range(self, eps):
        with pytest.raises(ValueError):
            corpus.fig1_pair(eps)

    def test_fig3_allows_zero_eps(self):
        first, _ = corpus.fig3_pair(4, ZERO)
        assert first.agents[1].position == HALF


class TestInstances:
    def test_prd_counts(self):
        inst = corpus.prd_instance()
        assert inst.n == 50
        assert inst.approval_counts() == {1: 40, 2: 25}

    def test_km_nongsp(self):
        inst = corpus.km_nongsp_instance(5, 3, UtilityClass.MIN_DIST)
        assert [a.approvals for a in inst.agents] == [frozenset({j}) for j in range(1, 6)]
        assert inst.utility_class is UtilityClass.MIN_DIST

    @pytest.mark.parametrize("m, k", [(3, 2), (4, 1), (4, 3)])
    def test_km_nongsp_requires_room(self, m, k):
        with pytest.raises(ValueError):
            corpus.km_nongsp_instance(m, k)

    def test_km_lb_sequence(self):
        seq = corpus.km_lb_sequence(4, 2, F(1, 100))
        assert len(seq) == 3
        assert differing(seq[0], seq[1]) == [4]
        assert differing(seq[1], seq[2]) == [6]
        mech = Mechanism.parse("km-middle")
        for inst in seq:
            assert expected_welfare(inst, mech(inst)) <= (1 + F(1, 100)) * 2
        assert optimal_choice(seq[-1])[1] == 4

    def test_rd_worst_case_scales(self):
        rd = Mechanism.parse("rd:optimal")
        assert approximation_ratio(rd, corpus.rd_worst_case()).ratio == F(3, 2)
        assert approximation_ratio(rd, corpus.rd_worst_case(3)).ratio == F(3, 2)

    def test_proportional_lb_instance(self):
        inst = corpus.proportional_lb_instance(41, 30)
        assert inst.approval_counts() == {1: 41, 2: 30}
        with pytest.raises(ValueError):
            corpus.proportional_lb_instance(4, 3)


class TestNames:
    @pytest.mark.parametrize("name", [
        "fig1", "fig1:1/10", "fig1-prime", "fig2", "fig2-prime", "random-median-lb:0.001",
        "fig3", "fig3:6", "fig3-prime:4:1/10", "prd", "km-nongsp", "km-nongsp:5:2",
        "km-lb", "km-lb:6:3:1/10:0", "rd-worst-case:2",
    ])
    def test_resolve(self, name):
        assert corpus.is_corpus_name(name)
        assert isinstance(corpus.resolve(name).instance, Instance)

    @pytest.mark.parametrize("name", ["fig9", "prd-prime", "fig1:2", "km-nongsp:3:2", "fig2:1"])
    def test_unknown(self, name):
        with pytest.raises(KeyError):
            corpus.resolve(name)

    def test_prime_is_second_of_pair(self):
        assert corpus.resolve("fig2-prime").instance == corpus.fig2_pair()[1]

    def test_file_paths_are_not_names(self):
        assert not corpus.is_corpus_name("data/fig1.json")


@pytest.mark.parametrize("name", corpus.REPRODUCIBLE)
def test_reproduce_tables_all_hold(name):
    checks = reproduce.checks_for(name)
    assert checks
    assert [c.label for c in checks if not c.ok] == []
    table = reproduce.format_table(checks)
    assert table.splitlines()[0].split()[:3] == ["check", "expected", "computed"]
    rows = reproduce.checks_to_rows(checks)
    assert all(r["ok"] for r in rows)


def test_reproduce_unknown():
    with pytest.raises(KeyError):
        reproduce.checks_for("nothing")
