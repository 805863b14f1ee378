from __future__ import annotations

import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_best_utility, random_ttg
from ocfgames import corpus, welfare
from ocfgames.model import GameError, TTG, TaskType, validate_structure

ZERO = Q(0)


def test_overlapping_beats_nonoverlapping_on_symmetric_trio():
    g = corpus.three_symmetric_game()
    over, counts, cs = welfare.max_welfare_overlapping(g)
    nonover, blocks = welfare.max_welfare_nonoverlapping(g)
    assert over == 2
    assert nonover == 1
    assert counts == (2,)
    assert validate_structure(g, cs) == []
    assert blocks == (frozenset({0, 1, 2}),)


def test_canonical_structure_realizes_the_optimum():
    rng = random.Random(3)
    for _ in range(50):
        g = random_ttg(rng)
        total, _, cs = welfare.max_welfare_overlapping(g)
        assert validate_structure(g, cs) == []
        assert sum((g.value(c.units) for c in cs.coalitions), ZERO) == total


def test_knapsack_profile_matches_multiset_enumeration():
    rng = random.Random(5)
    for _ in range(60):
        g = random_ttg(rng, max_n=3, max_total=12, max_tasks=3)
        profile = welfare.knapsack_profile(g)
        for w in range(int(g.total_weight()) + 1):
            assert profile.utilities[w] == brute_best_utility(g, Q(w)), (g, w)


def test_profile_utilities_are_nondecreasing():
    rng = random.Random(9)
    for _ in range(40):
        g = random_ttg(rng, max_total=10, max_tasks=3)
        us = welfare.knapsack_profile(g).utilities
        assert all(a <= b for a, b in zip(us, us[1:]))


def test_recovered_task_multiset_is_affordable_and_optimal():
    rng = random.Random(13)
    for _ in range(40):
        g = random_ttg(rng, max_total=10, max_tasks=3)
        profile = welfare.knapsack_profile(g)
        chosen = profile.recover_tasks(profile.limit)
        spent = sum((g.tasks[j].threshold for j in chosen), ZERO)
        earned = sum((g.tasks[j].utility for j in chosen), ZERO)
        assert spent <= g.total_weight()
        assert earned == profile.utilities[profile.limit]


def test_welfare_is_invariant_under_common_weight_scaling():
    rng = random.Random(17)
    for _ in range(30):
        g = random_ttg(rng, max_total=8)
        k = rng.randint(2, 4)
        scaled = TTG(
            tuple(w * k for w in g.weights),
            tuple(TaskType(t.threshold * k, t.utility) for t in g.tasks),
        )
        assert welfare.max_welfare_overlapping(scaled)[0] == \
            welfare.max_welfare_overlapping(g)[0]


def test_vstar_on_a_ttg_is_the_pooled_optimum():
    g = corpus.two_company_game()  # weights 4, 6; tasks (5,15), (4,10)
    assert welfare.vstar(g, {0}) == 10
    assert welfare.vstar(g, {1}) == 15
    # together they afford two copies of the (5, 15) task
    assert welfare.vstar(g, {0, 1}) == 30


def test_vstar_rejects_unknown_agents():
    with pytest.raises(GameError):
        welfare.vstar(corpus.two_company_game(), {5})


def test_rule_based_vstar_respects_the_structure_cap():
    g = corpus.four_escorts_game()
    S = frozenset({0, 2, 4, 6})
    assert welfare.vstar(g, S) == 202
    assert welfare.vstar(g, S, cap=2) == 200
    assert welfare.vstar(g, S, cap=1) == 100


def test_rule_based_vstar_singletons():
    g = corpus.four_escorts_game()
    for j in range(4):  # light agents meet no rule alone
        assert welfare.vstar(g, {j}) == 0
    for j in range(4, 7):  # each heavy agent meets the side rule alone
        assert welfare.vstar(g, {j}) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_vstar_is_monotone_under_set_inclusion(seed):
    rng = random.Random(seed)
    g = random_ttg(rng)
    members = [j for j in range(g.n) if rng.random() < 0.6]
    if not members:
        return
    sub = members[:-1]
    v_big = welfare.vstar(g, members)
    assert v_big >= (welfare.vstar(g, sub) if sub else ZERO)
    assert welfare.vstar(g, range(g.n)) >= v_big
