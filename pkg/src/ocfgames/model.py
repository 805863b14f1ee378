"""Data model for games with overlapping coalitions.

Games come in two flavours: threshold task games (agents with weights, a
monotone list of tasks) and rule-based games (requirement rules with values).
Contributions are stored in absolute weight units, so a partial coalition is
a vector ``units`` with ``0 <= units[j] <= weights[j]``; the participation
fraction of agent ``j`` is recovered as ``units[j] / weights[j]``.

All quantities are ``fractions.Fraction``; construction validates every
structural invariant and raises :class:`GameError` on violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from ocfgames.rationals import Q, as_q

ZERO = Q(0)


class GameError(ValueError):
    """Malformed game, coalition, structure or outcome."""


# ---------------------------------------------------------------------------
# games


@dataclass(frozen=True)
class TaskType:
    """A task: a weight threshold and the utility earned for meeting it."""

    threshold: Fraction
    utility: Fraction

    def __post_init__(self):
        object.__setattr__(self, "threshold", as_q(self.threshold))
        object.__setattr__(self, "utility", as_q(self.utility))
        if self.threshold < 0 or self.utility < 0:
            raise GameError(f"task thresholds and utilities must be >= 0: {self}")


def normalize_tasks(tasks: Iterable[TaskType]) -> tuple[TaskType, ...]:
    """Drop dominated tasks and sort so thresholds and utilities both increase.

    A task is dominated when another task has a threshold at most as large
    and a utility at least as large; dominated tasks never get chosen, so
    removing them preserves the value function.  A zero-threshold task with
    positive utility makes every welfare question unbounded and is rejected.
    """
    kept: list[TaskType] = []
    for t in sorted(tasks, key=lambda t: (t.threshold, -t.utility)):
        if t.utility == 0:
            continue
        if kept and kept[-1].utility >= t.utility:
            continue
        kept.append(t)
    out = tuple(kept)
    for a, b in zip(out, out[1:]):
        if not (a.threshold < b.threshold and a.utility < b.utility):
            raise GameError(f"task list not strictly monotone after pruning: {out}")
    if out and out[0].threshold == 0:
        raise GameError("zero-threshold task with positive utility: value is unbounded")
    return out


def _check_weights(weights: Sequence) -> tuple[Fraction, ...]:
    w = tuple(as_q(x) for x in weights)
    if not w:
        raise GameError("a game needs at least one agent")
    if any(x <= 0 for x in w):
        raise GameError(f"agent weights must be positive: {w}")
    return w


@dataclass(frozen=True)
class TTG:
    """Threshold task game: positive agent weights plus a monotone task list."""

    weights: tuple[Fraction, ...]
    tasks: tuple[TaskType, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_weights(self.weights))
        object.__setattr__(self, "tasks", normalize_tasks(self.tasks))

    @property
    def n(self) -> int:
        return len(self.weights)

    def total_weight(self, agents: Optional[Iterable[int]] = None) -> Fraction:
        idx = range(self.n) if agents is None else agents
        return sum((self.weights[i] for i in idx), ZERO)

    def best_utility(self, pooled_weight: Fraction) -> Fraction:
        """Largest task utility whose threshold the pooled weight meets."""
        best = ZERO
        for t in self.tasks:
            if t.threshold <= pooled_weight:
                best = t.utility
            else:
                break
        return best

    def value(self, units: Sequence[Fraction]) -> Fraction:
        return self.best_utility(sum(units, ZERO))


@dataclass(frozen=True)
class Requirement:
    """Minimum total weight units a group of agents must put into a coalition."""

    agents: frozenset[int]
    minimum: Fraction

    def __post_init__(self):
        object.__setattr__(self, "agents", frozenset(self.agents))
        object.__setattr__(self, "minimum", as_q(self.minimum))
        if not self.agents:
            raise GameError("requirement over an empty agent set")
        if self.minimum < 0:
            raise GameError("requirement minimum must be >= 0")


@dataclass(frozen=True)
class Rule:
    """A way of earning ``value``: every requirement met inside one coalition."""

    requirements: tuple[Requirement, ...]
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "requirements", tuple(self.requirements))
        object.__setattr__(self, "value", as_q(self.value))
        if self.value < 0:
            raise GameError("rule value must be >= 0")

    def satisfied_by(self, units: Sequence[Fraction]) -> bool:
        return all(
            sum((units[j] for j in req.agents), ZERO) >= req.minimum
            for req in self.requirements
        )


@dataclass(frozen=True)
class RuleBasedGame:
    """Game where a coalition earns the best value among its satisfied rules."""

    weights: tuple[Fraction, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_weights(self.weights))
        object.__setattr__(self, "rules", tuple(self.rules))
        n = len(self.weights)
        for rule in self.rules:
            for req in rule.requirements:
                if any(j < 0 or j >= n for j in req.agents):
                    raise GameError(f"requirement names an unknown agent: {req}")

    @property
    def n(self) -> int:
        return len(self.weights)

    def total_weight(self, agents: Optional[Iterable[int]] = None) -> Fraction:
        idx = range(self.n) if agents is None else agents
        return sum((self.weights[i] for i in idx), ZERO)

    def value(self, units: Sequence[Fraction]) -> Fraction:
        best = ZERO
        for rule in self.rules:
            if rule.value > best and rule.satisfied_by(units):
                best = rule.value
        return best


Game = Union[TTG, RuleBasedGame]


# ---------------------------------------------------------------------------
# coalitions, structures, outcomes


@dataclass(frozen=True)
class PartialCoalition:
    """Per-agent contributions in weight units."""

    units: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(as_q(u) for u in self.units))
        if any(u < 0 for u in self.units):
            raise GameError(f"negative contribution: {self.units}")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(j for j, u in enumerate(self.units) if u != 0)

    @property
    def weight(self) -> Fraction:
        return sum(self.units, ZERO)

    def is_zero(self) -> bool:
        return all(u == 0 for u in self.units)


def crisp(game: Game, agents: Iterable[int]) -> PartialCoalition:
    """The coalition where each member contributes its whole weight."""
    s = set(agents)
    return PartialCoalition(
        tuple(game.weights[j] if j in s else ZERO for j in range(game.n))
    )


@dataclass(frozen=True)
class CoalitionStructure:
    """Finite list of partial coalitions; duplicates allowed."""

    coalitions: tuple[PartialCoalition, ...]
    cap: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "coalitions", tuple(self.coalitions))
        if self.cap is not None and self.cap < 1:
            raise GameError("structure cap must be a positive integer")

    def __len__(self) -> int:
        return len(self.coalitions)

    def agent_total(self, j: int) -> Fraction:
        return sum((c.units[j] for c in self.coalitions), ZERO)

    def normalized(self) -> "CoalitionStructure":
        """Drop all-zero coalitions (value 0, no payoff)."""
        return CoalitionStructure(
            tuple(c for c in self.coalitions if not c.is_zero()), self.cap
        )


@dataclass(frozen=True)
class Outcome:
    """A structure together with a per-coalition payoff matrix.

    ``allow_negative`` switches off the default policy that per-coalition
    payoff entries are nonnegative (intra-coalition side payments).
    """

    structure: CoalitionStructure
    payoffs: tuple[tuple[Fraction, ...], ...]
    allow_negative: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "payoffs", tuple(tuple(as_q(x) for x in row) for row in self.payoffs)
        )
        if len(self.payoffs) != len(self.structure):
            raise GameError(
                f"payoff matrix has {len(self.payoffs)} rows for "
                f"{len(self.structure)} coalitions"
            )


# ---------------------------------------------------------------------------
# operations


def _check_dims(game: Game, coalition: PartialCoalition) -> None:
    if len(coalition.units) != game.n:
        raise GameError(
            f"coalition over {len(coalition.units)} agents in a {game.n}-agent game"
        )


def value(game: Game, coalition: PartialCoalition) -> Fraction:
    """Value of a single partial coalition."""
    _check_dims(game, coalition)
    return game.value(coalition.units)


def structure_value(game: Game, cs: CoalitionStructure) -> Fraction:
    """Sum of coalition values over the structure."""
    problems = validate_structure(game, cs)
    if problems:
        raise GameError("invalid structure: " + "; ".join(problems))
    return sum((game.value(c.units) for c in cs.coalitions), ZERO)


def payoff_vector(outcome: Outcome) -> tuple[Fraction, ...]:
    """Per-agent column sums of the payoff matrix."""
    if not outcome.payoffs:
        n = max((len(c.units) for c in outcome.structure.coalitions), default=0)
        return (ZERO,) * n
    widths = {len(row) for row in outcome.payoffs}
    widths |= {len(c.units) for c in outcome.structure.coalitions}
    if len(widths) > 1:
        raise GameError(f"inconsistent outcome dimensions: {sorted(widths)}")
    n = widths.pop()
    return tuple(sum((row[j] for row in outcome.payoffs), ZERO) for j in range(n))


def validate_structure(game: Game, cs: CoalitionStructure) -> list[str]:
    """Every violated capacity constraint and cap violation, empty when ok."""
    problems = []
    for i, c in enumerate(cs.coalitions):
        if len(c.units) != game.n:
            problems.append(f"coalition {i} has {len(c.units)} entries, expected {game.n}")
    if problems:
        return problems
    for j in range(game.n):
        total = cs.agent_total(j)
        if total > game.weights[j]:
            problems.append(
                f"agent {j} over capacity by {total - game.weights[j]}"
            )
    if cs.cap is not None and len(cs) > cs.cap:
        problems.append(f"structure has {len(cs)} coalitions, cap is {cs.cap}")
    return problems


def validate_outcome(game: Game, outcome: Outcome) -> list[str]:
    """Check payoff distribution, support rule, individual rationality, sign policy."""
    from ocfgames import welfare  # deferred: welfare builds on this module

    problems = validate_structure(game, outcome.structure)
    if problems:
        return problems
    for i, (c, row) in enumerate(zip(outcome.structure.coalitions, outcome.payoffs)):
        v = game.value(c.units)
        if sum(row, ZERO) != v:
            problems.append(f"coalition {i}: payoffs sum to {sum(row, ZERO)}, value is {v}")
        for j, x in enumerate(row):
            if c.units[j] == 0 and x != 0:
                problems.append(f"coalition {i}: non-contributor {j} paid {x}")
            if x < 0 and not outcome.allow_negative:
                problems.append(f"coalition {i}: negative payoff {x} to agent {j}")
    p = payoff_vector(outcome) if outcome.payoffs else (ZERO,) * game.n
    for j in range(game.n):
        floor = welfare.vstar(game, frozenset([j]))
        if p[j] < floor:
            problems.append(
                f"agent {j} paid {p[j]} in total, can get {floor} alone"
            )
    return problems


def to_nonoverlapping(game: Game, agents: Iterable[int]) -> Fraction:
    """Value of the crisp coalition over ``agents`` under the game's v."""
    return game.value(crisp(game, agents).units)
