"""Exact-arithmetic toolkit for games with overlapping coalitions.

Everything is computed with exact rational arithmetic (``fractions.Fraction``);
there is no floating point anywhere, so strict inequalities in the stability
definitions are decided without tolerances.
"""

from ocfgames.model import (
    TTG,
    CoalitionStructure,
    GameError,
    Outcome,
    PartialCoalition,
    Requirement,
    Rule,
    RuleBasedGame,
    TaskType,
    payoff_vector,
    structure_value,
    to_nonoverlapping,
    validate_outcome,
    validate_structure,
    value,
)

__all__ = [
    "TTG",
    "CoalitionStructure",
    "GameError",
    "Outcome",
    "PartialCoalition",
    "Requirement",
    "Rule",
    "RuleBasedGame",
    "TaskType",
    "payoff_vector",
    "structure_value",
    "to_nonoverlapping",
    "validate_outcome",
    "validate_structure",
    "value",
]
