from __future__ import annotations

import random
from fractions import Fraction as Q

import pytest

from conftest import random_outcome, random_ttg
from ocfgames import core, corpus, deviations
from ocfgames.model import (
    CoalitionStructure,
    GameError,
    Outcome,
    PartialCoalition,
    payoff_vector,
)

ZERO = Q(0)


def company_fixtures():
    """One game, three structures: the mixed split, the interleaved split,
    and the split with an abandoned-looking second coalition."""
    g = corpus.two_company_game()  # weights (4, 6), tasks (5, 15), (4, 10)
    mixed = CoalitionStructure(
        (PartialCoalition((Q(1), Q(4))), PartialCoalition((Q(3), Q(2))))
    )
    even = CoalitionStructure(
        (PartialCoalition((Q(2), Q(3))), PartialCoalition((Q(2), Q(3))))
    )
    lone = CoalitionStructure(
        (PartialCoalition((Q(4), Q(3))), PartialCoalition((ZERO, Q(3))))
    )
    y = Outcome(mixed, ((Q(7), Q(8)), (Q(8), Q(7))))
    xp = Outcome(even, ((Q(3), Q(12)), (Q(12), Q(3))))
    z = Outcome(lone, ((Q(3), Q(12)), (ZERO, ZERO)))
    yp = Outcome(even, ((Q(7), Q(8)), (Q(8), Q(7))))
    return g, y, xp, z, yp


def test_refined_deviation_breaks_the_balanced_mixed_split():
    g, y, *_ = company_fixtures()
    result = deviations.find_r_deviation(g, y, {1}, cap=3, grid=1)
    assert result.found
    # agent 2 walks out of one coalition and earns 17 instead of 15
    assert sum(result.gains.values()) == 2
    assert set(result.gains) == {1}


def test_refined_core_accepts_the_interleaved_split():
    g, _, xp, _, _ = company_fixtures()
    verdict = deviations.core_membership(g, xp, kind="r", cap=3, grid=1)
    assert verdict.stable


def test_joint_deviation_recovers_the_full_optimum():
    g, _, _, z, _ = company_fixtures()
    result = deviations.find_r_deviation(g, z, {0, 1}, cap=3, grid=1)
    assert result.found
    post = sum((payoff_vector(z)[j] for j in result.plan.deviators), ZERO) \
        + sum(result.gains.values())
    assert post == 30


def test_optimistic_deviation_exploits_the_partner_contribution():
    g, _, xp, _, _ = company_fixtures()
    result = deviations.find_o_deviation(g, xp, {1}, cap=3, grid=1)
    assert result.found
    # claim 7 from a reshaped shared coalition plus 10 alone, beating 15
    assert sum(result.gains.values()) == 2


def test_optimistic_core_accepts_the_even_balanced_split():
    g, _, _, _, yp = company_fixtures()
    verdict = deviations.core_membership(g, yp, kind="o", cap=3, grid=1)
    assert verdict.stable


def test_conservative_deviation_is_grid_independent():
    g, y, *_ = company_fixtures()
    # underpay agent 2: 14 across both coalitions, 15 alone
    x = Outcome(y.structure, ((Q(7), Q(8)), (Q(9), Q(6))))
    for grid in (1, 2, 5):
        result = deviations.find_c_deviation(g, x, {1}, cap=3, grid=grid)
        assert result.found
        assert sum(result.gains.values()) == 1
    # the balanced split leaves nothing for a lone walkout
    assert not deviations.find_c_deviation(g, y, {1}, cap=3, grid=1).found


def test_unknown_kind_is_rejected():
    g, y, *_ = company_fixtures()
    with pytest.raises(GameError):
        deviations.core_membership(g, y, kind="q")


def test_stability_chain_on_seeded_games():
    """o-stable implies r-stable implies c-stable at the same resolution."""
    rng = random.Random(33)
    for _ in range(30):
        g = random_ttg(rng, max_n=3, max_total=6)
        o = random_outcome(rng, g)
        verdicts = {
            kind: deviations.core_membership(g, o, kind=kind, cap=3, grid=1).stable
            for kind in ("c", "r", "o")
        }
        assert not (verdicts["o"] and not verdicts["r"])
        assert not (verdicts["r"] and not verdicts["c"])


def test_deviation_plans_are_internally_consistent():
    rng = random.Random(37)
    seen = 0
    for _ in range(40):
        g = random_ttg(rng, max_n=3, max_total=6)
        o = random_outcome(rng, g)
        for kind in ("c", "r", "o"):
            verdict = deviations.core_membership(g, o, kind=kind, cap=3, grid=1)
            if verdict.stable:
                continue
            seen += 1
            result = verdict.deviation
            plan = result.plan
            touched = set(plan.kept) | set(plan.abandoned) | \
                {i for i, _ in plan.modified}
            assert touched == set(range(len(o.structure)))
            assert all(gain > 0 for gain in result.gains.values()) or \
                sum(result.gains.values()) > 0
            # deviator capacity: old kept/modified rows plus new coalitions
            for j in plan.deviators:
                used = sum(
                    (o.structure.coalitions[i].units[j] for i in plan.kept), ZERO
                )
                used += sum((row[j] for _, row in plan.modified), ZERO)
                used += sum(
                    (c.units[j] for c in plan.new_structure.coalitions), ZERO
                )
                assert used <= g.weights[j]
    assert seen >= 10


def test_every_agent_gains_strictly_in_a_found_plan():
    g, y, *_ = company_fixtures()
    result = deviations.find_r_deviation(g, y, {1}, cap=3, grid=1)
    assert all(gain > 0 for gain in result.gains.values())


def test_membership_and_direct_check_agree_for_conservative_kind():
    rng = random.Random(41)
    for _ in range(25):
        g = random_ttg(rng, max_n=3, max_total=6)
        o = random_outcome(rng, g)
        by_search = deviations.core_membership(g, o, kind="c", cap=4, grid=1)
        by_subsets = core.check_group_rationality(g, o)
        assert by_search.stable == by_subsets.stable
