"""Instance and outcome files: JSON documents with rational-string numbers.

A game document carries `agents`, `weights`, and either `tasks` or `rules`;
an outcome document carries `structure` and `payoffs`.  Every numeric
quantity is an integer or a string like "3/4" — floating-point literals are
rejected outright so exact arithmetic is never silently degraded.  Agents
are numbered from 1 in files and from 0 in memory.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Union

from ocfgames.model import (
    CoalitionStructure,
    Game,
    GameError,
    Outcome,
    PartialCoalition,
    Requirement,
    Rule,
    RuleBasedGame,
    TaskType,
    TTG,
)
from ocfgames.rationals import as_q, q_str


def _reject_float(text: str) -> Fraction:
    raise GameError(f"floating-point literal {text!r}: use \"p/q\" strings")


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as err:
        raise GameError(f"malformed document: {err}") from err
    if not isinstance(doc, dict):
        raise GameError("top-level document must be an object")
    return doc


def _rationals(values, what: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise GameError(f"{what} must be an array")
    return tuple(as_q(v) for v in values)


def game_from_dict(doc: dict) -> Game:
    n = doc.get("agents")
    if not isinstance(n, int) or n < 1:
        raise GameError("'agents' must be a positive integer")
    weights = _rationals(doc.get("weights"), "'weights'")
    if len(weights) != n:
        raise GameError(f"{len(weights)} weights for {n} agents")
    has_tasks = "tasks" in doc
    has_rules = "rules" in doc
    if has_tasks == has_rules:
        raise GameError("exactly one of 'tasks' or 'rules' is required")
    if has_tasks:
        tasks = tuple(
            TaskType(as_q(t["threshold"]), as_q(t["utility"]))
            for t in doc["tasks"]
        )
        return TTG(weights, tasks)
    rules = []
    for rule in doc["rules"]:
        requirements = tuple(
            Requirement(
                frozenset(_agent_index(a, n) for a in req["agents"]),
                as_q(req["min"]),
            )
            for req in rule["requirements"]
        )
        rules.append(Rule(requirements, as_q(rule["value"])))
    return RuleBasedGame(weights, tuple(rules))


def _agent_index(label, n: int) -> int:
    if not isinstance(label, int) or not (1 <= label <= n):
        raise GameError(f"agent label {label!r} out of range 1..{n}")
    return label - 1


def game_to_dict(game: Game) -> dict:
    doc: dict = {
        "agents": game.n,
        "weights": [q_str(w) for w in game.weights],
    }
    if isinstance(game, TTG):
        doc["tasks"] = [
            {"threshold": q_str(t.threshold), "utility": q_str(t.utility)}
            for t in game.tasks
        ]
    else:
        doc["rules"] = [
            {
                "requirements": [
                    {
                        "agents": sorted(j + 1 for j in req.agents),
                        "min": q_str(req.minimum),
                    }
                    for req in rule.requirements
                ],
                "value": q_str(rule.value),
            }
            for rule in game.rules
        ]
    return doc


def outcome_from_dict(doc: dict, game: Game) -> Outcome:
    structure = doc.get("structure")
    payoffs = doc.get("payoffs")
    if not isinstance(structure, list) or not isinstance(payoffs, list):
        raise GameError("'structure' and 'payoffs' arrays are required")
    coalitions = tuple(
        PartialCoalition(_rationals(row, "coalition row")) for row in structure
    )
    for c in coalitions:
        if len(c.units) != game.n:
            raise GameError(f"coalition row of width {len(c.units)}, need {game.n}")
    rows = tuple(_rationals(row, "payoff row") for row in payoffs)
    for row in rows:
        if len(row) != game.n:
            raise GameError(f"payoff row of width {len(row)}, need {game.n}")
    return Outcome(CoalitionStructure(coalitions), rows)


def outcome_to_dict(outcome: Outcome) -> dict:
    return {
        "structure": [
            [q_str(u) for u in c.units] for c in outcome.structure.coalitions
        ],
        "payoffs": [[q_str(x) for x in row] for row in outcome.payoffs],
    }


def load_game(path: str) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return game_from_dict(_loads(fh.read()))


def load_outcome(path: str, game: Game) -> Outcome:
    with open(path, "r", encoding="utf-8") as fh:
        return outcome_from_dict(_loads(fh.read()), game)


def _dump(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def save_game(game: Game, path: str) -> None:
    _dump(game_to_dict(game), path)


def save_outcome(outcome: Outcome, path: str) -> None:
    _dump(outcome_to_dict(outcome), path)
