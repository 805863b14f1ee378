from __future__ import annotations

import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from conftest import random_ttg
from ocfgames.model import (
    CoalitionStructure,
    GameError,
    Outcome,
    PartialCoalition,
    Requirement,
    Rule,
    RuleBasedGame,
    TTG,
    TaskType,
    crisp,
    payoff_vector,
    structure_value,
    validate_outcome,
    validate_structure,
    value,
)

ZERO = Q(0)


def simple_game() -> TTG:
    return TTG((Q(2), Q(2), Q(2)), (TaskType(Q(3), Q(1)),))


def test_value_is_best_single_task_for_pooled_weight():
    g = TTG((Q(4), Q(6)), (TaskType(Q(5), Q(15)), TaskType(Q(4), Q(10))))
    assert g.value((ZERO, ZERO)) == 0
    assert g.value((Q(3), ZERO)) == 0
    assert g.value((Q(4), ZERO)) == 10
    assert g.value((Q(4), Q(1))) == 15
    # a coalition performs one task, so extra weight adds nothing past 15
    assert g.value((Q(4), Q(6))) == 15


def test_module_value_rejects_wrong_width():
    with pytest.raises(GameError):
        value(simple_game(), PartialCoalition((Q(1),)))


def test_structure_value_rejects_over_capacity():
    cs = CoalitionStructure((PartialCoalition((Q(3), ZERO, ZERO)),))
    with pytest.raises(GameError):
        structure_value(simple_game(), cs)


def test_weights_must_be_positive():
    with pytest.raises(GameError):
        TTG((Q(0), Q(1)), (TaskType(Q(1), Q(1)),))


def test_task_thresholds_must_be_positive():
    with pytest.raises(GameError):
        TTG((Q(1),), (TaskType(Q(0), Q(1)),))


def test_rule_based_value_requires_all_requirements():
    g = RuleBasedGame(
        (Q(2), Q(3)),
        (Rule((Requirement(frozenset({0}), Q(1)),
               Requirement(frozenset({1}), Q(2))), Q(7)),),
    )
    assert g.value((Q(1), Q(2))) == 7
    assert g.value((Q(2), Q(1))) == 0
    assert g.value((ZERO, Q(3))) == 0


def test_crisp_puts_full_weight_on_members():
    g = simple_game()
    c = crisp(g, {0, 2})
    assert c.units == (Q(2), ZERO, Q(2))
    assert c.support == frozenset({0, 2})


def test_payoff_vector_sums_rows():
    cs = CoalitionStructure(
        (PartialCoalition((Q(1), Q(2))), PartialCoalition((Q(1), ZERO)))
    )
    o = Outcome(cs, ((Q(3), Q(4)), (Q(5), ZERO)))
    assert payoff_vector(o) == (Q(8), Q(4))


def test_validate_structure_flags_over_capacity():
    g = simple_game()
    cs = CoalitionStructure(
        (PartialCoalition((Q(2), ZERO, ZERO)), PartialCoalition((Q(1), ZERO, ZERO)))
    )
    assert any("over capacity" in msg for msg in validate_structure(g, cs))


def test_validate_outcome_flags_each_clause():
    g = simple_game()
    cs = CoalitionStructure((PartialCoalition((Q(2), Q(1), ZERO)),))
    # value of (2,1,0) is 1; paying 2 breaks efficiency
    bad_sum = Outcome(cs, ((Q(1), Q(1), ZERO),))
    assert any("sum" in m for m in validate_outcome(g, bad_sum))
    # paying a non-contributor
    freeload = Outcome(cs, ((ZERO, ZERO, Q(1)),))
    assert any("non-contributor" in m for m in validate_outcome(g, freeload))
    # negative entry
    negative = Outcome(cs, ((Q(2), Q(-1), ZERO),))
    assert any("negative" in m for m in validate_outcome(g, negative))


def test_validate_outcome_accepts_a_clean_outcome():
    g = simple_game()
    cs = CoalitionStructure(
        (PartialCoalition((Q(2), Q(1), ZERO)), PartialCoalition((ZERO, Q(1), Q(2))))
    )
    o = Outcome(cs, ((ZERO, Q(1), ZERO), (ZERO, ZERO, Q(1))))
    assert validate_outcome(g, o) == []


def test_structure_value_adds_coalition_values():
    g = simple_game()
    cs = CoalitionStructure(
        (PartialCoalition((Q(2), Q(1), ZERO)), PartialCoalition((ZERO, Q(1), Q(2))))
    )
    assert structure_value(g, cs) == 2


@given(st.integers(min_value=0, max_value=10_000))
def test_random_value_is_monotone_in_units(seed):
    rng = random.Random(seed)
    g = random_ttg(rng)
    units = [Q(rng.randint(0, int(w))) for w in g.weights]
    smaller = list(units)
    j = rng.randrange(g.n)
    if smaller[j] > 0:
        smaller[j] -= 1
    assert g.value(smaller) <= g.value(units)
    assert g.value([ZERO] * g.n) == 0
