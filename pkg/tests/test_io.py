from __future__ import annotations

import json
from fractions import Fraction as Q

import pytest

from ocfgames import corpus, io
from ocfgames.model import (
    CoalitionStructure,
    GameError,
    Outcome,
    PartialCoalition,
    RuleBasedGame,
    TTG,
)

ZERO = Q(0)


def test_task_game_round_trip(tmp_path):
    g = corpus.two_company_game()
    path = tmp_path / "game.json"
    io.save_game(g, str(path))
    assert io.load_game(str(path)) == g


def test_rule_game_round_trip(tmp_path):
    g = corpus.four_escorts_game()
    path = tmp_path / "game.json"
    io.save_game(g, str(path))
    loaded = io.load_game(str(path))
    assert isinstance(loaded, RuleBasedGame)
    assert loaded == g


def test_outcome_round_trip(tmp_path):
    g = corpus.two_company_game()
    cs = CoalitionStructure(
        (PartialCoalition((Q(1), Q(4))), PartialCoalition((Q(3), Q(2))))
    )
    o = Outcome(cs, ((Q(7), Q(8)), (Q(17, 2), Q(13, 2))))
    path = tmp_path / "outcome.json"
    io.save_outcome(o, str(path))
    assert io.load_outcome(str(path), g) == o


def test_rationals_are_written_as_strings(tmp_path):
    g = corpus.two_company_game()
    cs = CoalitionStructure((PartialCoalition((Q(1), Q(4))),))
    o = Outcome(cs, ((Q(7), Q(8)),))
    path = tmp_path / "outcome.json"
    io.save_outcome(o, str(path))
    doc = json.loads(path.read_text())
    flat = [x for row in doc["payoffs"] for x in row]
    assert all(isinstance(x, (int, str)) for x in flat)


def test_float_literals_are_rejected():
    with pytest.raises(GameError):
        io.game_from_dict(json.loads('{"agents": 1}'))  # missing fields
    with pytest.raises(GameError):
        io._loads('{"agents": 1, "weights": [1.5], '
                  '"tasks": [{"threshold": 1, "utility": 1}]}')


def test_agent_labels_are_one_based_in_files():
    doc = {
        "agents": 2,
        "weights": [2, 3],
        "rules": [
            {"requirements": [{"agents": [1], "min": 1},
                              {"agents": [2], "min": 2}],
             "value": 7},
        ],
    }
    g = io.game_from_dict(doc)
    rule = g.rules[0]
    groups = {req.agents for req in rule.requirements}
    assert groups == {frozenset({0}), frozenset({1})}


def test_out_of_range_agent_label_is_rejected():
    doc = {
        "agents": 2,
        "weights": [2, 3],
        "rules": [
            {"requirements": [{"agents": [3], "min": 1}], "value": 7},
        ],
    }
    with pytest.raises(GameError):
        io.game_from_dict(doc)


def test_tasks_and_rules_are_mutually_exclusive():
    doc = {
        "agents": 1,
        "weights": [1],
        "tasks": [{"threshold": 1, "utility": 1}],
        "rules": [],
    }
    with pytest.raises(GameError):
        io.game_from_dict(doc)


def test_outcome_width_mismatch_is_rejected():
    g = corpus.two_company_game()
    doc = {"structure": [[1, 4, 2]], "payoffs": [[5, 5, 5]]}
    with pytest.raises(GameError):
        io.outcome_from_dict(doc, g)


def test_save_is_deterministic(tmp_path):
    g = corpus.four_escorts_game()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.save_game(g, str(a))
    io.save_game(g, str(b))
    assert a.read_bytes() == b.read_bytes()
