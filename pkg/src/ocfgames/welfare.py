"""Optimal social welfare and the superadditive cover.

For threshold task games everything reduces to an unbounded-knapsack profile
over integer-scaled weight: ``U[w]`` is the best total utility obtainable by
pooling ``w`` scaled weight units across any number of task copies.  For
rule-based games the cover is computed by a pruned search over rule
multisets with an exact feasibility check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import FrozenSet, Iterable, Optional, Sequence

from ocfgames.model import (
    CoalitionStructure,
    Game,
    GameError,
    PartialCoalition,
    Rule,
    RuleBasedGame,
    TTG,
    to_nonoverlapping,
)
from ocfgames.rationals import Q, common_denominator

ZERO = Q(0)


def scale_factor(game: TTG) -> int:
    """Smallest integer making all weights and thresholds integral."""
    return common_denominator(
        list(game.weights) + [t.threshold for t in game.tasks]
    )


@dataclass(frozen=True)
class KnapsackProfile:
    """Best pooled utility per integer-scaled weight.

    ``utilities[w]`` is the best total utility of any multiset of task copies
    whose thresholds sum to at most ``w`` scaled units (``scale`` original
    units per unit weight:  scaled = original * scale).
    """

    game: TTG
    scale: int
    utilities: tuple[Fraction, ...]

    @property
    def limit(self) -> int:
        return len(self.utilities) - 1

    def value_at(self, weight: Fraction) -> Fraction:
        """Profile value at an exact grid point."""
        w = Q(weight) * self.scale
        if w.denominator != 1 or w < 0 or w > self.limit:
            raise GameError(f"weight {weight} is off the profile grid")
        return self.utilities[int(w)]

    def floor_value_at(self, weight: Fraction) -> Fraction:
        """Profile value at the grid point just below ``weight``."""
        w = floor(Q(weight) * self.scale)
        if w < 0 or w > self.limit:
            raise GameError(f"weight {weight} is outside the profile range")
        return self.utilities[w]

    def recover_tasks(self, scaled_weight: int) -> tuple[int, ...]:
        """A value-optimal multiset of task indices for ``scaled_weight``.

        Deterministic: at each step the lowest-index task that still attains
        the optimum is taken.
        """
        tasks = self.game.tasks
        thresholds = [int(t.threshold * self.scale) for t in tasks]
        chosen: list[int] = []
        w = scaled_weight
        U = self.utilities
        while w > 0 and U[w] > 0:
            if U[w] == U[w - 1]:
                w -= 1
                continue
            for j, T in enumerate(thresholds):
                if T <= w and tasks[j].utility + U[w - T] == U[w]:
                    chosen.append(j)
                    w -= T
                    break
            else:  # pragma: no cover - the profile recurrence guarantees a hit
                raise AssertionError("profile table inconsistent")
        return tuple(sorted(chosen))


@lru_cache(maxsize=None)
def knapsack_profile(game: TTG, limit: Optional[Fraction] = None) -> KnapsackProfile:
    """Unbounded-knapsack utility profile up to ``limit`` (default: total weight)."""
    M = scale_factor(game)
    top = game.total_weight() if limit is None else Q(limit)
    W = floor(top * M)
    items = [(int(t.threshold * M), t.utility) for t in game.tasks]
    U = [ZERO] * (W + 1)
    for w in range(1, W + 1):
        best = U[w - 1]
        for T, u in items:
            if T <= w and u + U[w - T] > best:
                best = u + U[w - T]
        U[w] = best
    return KnapsackProfile(game, M, tuple(U))


def canonical_structure(game: TTG) -> CoalitionStructure:
    """Welfare-optimal structure where every agent joins every coalition.

    One coalition per task copy in an optimal multiset, each funded
    proportionally to agent weight; unused weight is pooled into a single
    zero-value coalition.
    """
    profile = knapsack_profile(game)
    chosen = profile.recover_tasks(profile.limit)
    total = game.total_weight()
    coalitions = []
    used = ZERO
    for j in chosen:
        T = game.tasks[j].threshold
        coalitions.append(
            PartialCoalition(tuple(w * T / total for w in game.weights))
        )
        used += T
    leftover = total - used
    if leftover > 0:
        coalitions.append(
            PartialCoalition(tuple(w * leftover / total for w in game.weights))
        )
    return CoalitionStructure(tuple(coalitions))


def max_welfare_overlapping(
    game: TTG,
) -> tuple[Fraction, tuple[int, ...], CoalitionStructure]:
    """Best total value over arbitrary coalition structures.

    Returns the value, per-task copy counts of a deterministic optimal task
    multiset, and the witness structure from :func:`canonical_structure`.
    """
    profile = knapsack_profile(game)
    chosen = profile.recover_tasks(profile.limit)
    counts = tuple(chosen.count(j) for j in range(len(game.tasks)))
    return profile.utilities[profile.limit], counts, canonical_structure(game)


def max_welfare_nonoverlapping(
    game: Game,
) -> tuple[Fraction, tuple[FrozenSet[int], ...]]:
    """Best total value over partitions of the agents, with a witness partition."""
    n = game.n
    if n > 16:
        raise GameError(f"partition search supports at most 16 agents, got {n}")
    full = (1 << n) - 1
    best: list[Fraction] = [ZERO] * (full + 1)
    split: list[int] = [0] * (full + 1)
    block_value = {}
    for mask in range(1, full + 1):
        agents = [j for j in range(n) if mask >> j & 1]
        block_value[mask] = to_nonoverlapping(game, agents)
        low = mask & -mask
        rest = mask ^ low
        # iterate submasks of mask that contain the lowest set bit
        sub = rest
        while True:
            block = sub | low
            cand = block_value[block] + best[mask ^ block]
            if cand > best[mask]:
                best[mask] = cand
                split[mask] = block
            if sub == 0:
                break
            sub = (sub - 1) & rest
    blocks = []
    mask = full
    while mask:
        block = split[mask]
        if block == 0:
            break
        if block_value[block] > 0:
            blocks.append(frozenset(j for j in range(n) if block >> j & 1))
        mask ^= block
    return best[full], tuple(blocks)


# ---------------------------------------------------------------------------
# superadditive cover


def vstar(
    game: Game,
    agents: Iterable[int],
    cap: Optional[int] = None,
    grid: int = 1,
) -> Fraction:
    """Best total value the coalition ``agents`` can create on its own.

    For threshold task games this is exact (members simply pool all their
    weight); ``cap`` and ``grid`` are ignored.  For rule-based games ``cap``
    bounds the number of coalitions (rule instances); ``grid`` is accepted
    for interface symmetry but unused, because once a rule multiset is fixed
    feasible contributions form a polyhedron checked exactly.
    """
    S = frozenset(agents)
    if any(j < 0 or j >= game.n for j in S):
        raise GameError(f"unknown agents in {sorted(S)}")
    return _vstar_cached(game, S, cap)


@lru_cache(maxsize=None)
def _vstar_cached(game: Game, S: FrozenSet[int], cap: Optional[int]) -> Fraction:
    if not S:
        return ZERO
    if isinstance(game, TTG):
        profile = knapsack_profile(game)
        return profile.value_at(game.total_weight(S))
    return _rule_cover(game, S, cap)


def _rule_cover(game: RuleBasedGame, S: FrozenSet[int], cap: Optional[int] = None) -> Fraction:
    budget = game.total_weight(S)
    usable: list[tuple[Rule, Fraction]] = []
    for rule in game.rules:
        if rule.value == 0:
            continue
        need = ZERO  # a lower bound on weight one instance consumes
        ok = True
        for req in rule.requirements:
            inside = sum((game.weights[j] for j in req.agents & S), ZERO)
            if inside < req.minimum:
                # a single instance already exceeds what those agents have
                ok = False
                break
            need = max(need, req.minimum)
        if ok and need == 0:
            raise GameError(f"rule with positive value and no weight demand: {rule}")
        if ok and need <= budget:
            usable.append((rule, need))
    if not usable:
        return ZERO
    usable.sort(key=lambda rn: rn[0].value / rn[1], reverse=True)

    best = ZERO

    def dfs(idx: int, multiset: tuple[int, ...], value: Fraction, spent: Fraction):
        nonlocal best
        if value > best and _multiset_feasible(game, S, [usable[i][0] for i in multiset]):
            best = value
        if cap is not None and len(multiset) >= cap:
            return
        for i in range(idx, len(usable)):
            rule, need = usable[i]
            if spent + need > budget:
                continue
            # optimistic bound: fill the rest at the best remaining density
            density = max(usable[k][0].value / usable[k][1] for k in range(i, len(usable)))
            if value + rule.value + (budget - spent - need) * density <= best:
                continue
            if not _multiset_feasible(
                game, S, [usable[k][0] for k in multiset] + [rule]
            ):
                continue
            dfs(i, multiset + (i,), value + rule.value, spent + need)

    dfs(0, (), ZERO, ZERO)
    return best


def _multiset_feasible(
    game: RuleBasedGame, S: FrozenSet[int], instances: Sequence[Rule]
) -> bool:
    """Can agents in ``S`` fund one coalition per rule instance within capacity?"""
    if not instances:
        return True
    disjoint = all(
        not (a.agents & b.agents)
        for rule in instances
        for a, b in itertools.combinations(rule.requirements, 2)
    )
    if disjoint:
        return _feasible_by_flow(game, S, instances)
    return _feasible_by_lp(game, S, instances)


def _feasible_by_flow(
    game: RuleBasedGame, S: FrozenSet[int], instances: Sequence[Rule]
) -> bool:
    """Max-flow feasibility: agents supply, requirement instances demand."""
    agents = sorted(S)
    reqs = [
        (ci, req) for ci, rule in enumerate(instances) for req in rule.requirements
    ]
    demand = sum((req.minimum for _, req in reqs), ZERO)
    if demand == 0:
        return True
    # node ids: 0 = source, 1..len(agents) = agents, then requirements, last = sink
    src = 0
    sink = 1 + len(agents) + len(reqs)
    INF = demand + 1
    cap: dict[tuple[int, int], Fraction] = {}
    for ai, j in enumerate(agents):
        cap[(src, 1 + ai)] = game.weights[j]
    for ri, (_, req) in enumerate(reqs):
        rnode = 1 + len(agents) + ri
        cap[(rnode, sink)] = req.minimum
        for ai, j in enumerate(agents):
            if j in req.agents:
                cap[(1 + ai, rnode)] = INF
    flow = _max_flow(sink + 1, cap, src, sink)
    return flow == demand


def _max_flow(n: int, cap: dict[tuple[int, int], Fraction], s: int, t: int) -> Fraction:
    residual = dict(cap)
    for (u, v) in list(cap):
        residual.setdefault((v, u), ZERO)
    adj: dict[int, list[int]] = {u: [] for u in range(n)}
    for (u, v) in residual:
        adj[u].append(v)
    total = ZERO
    while True:
        parent = {s: s}
        queue = [s]
        while queue and t not in parent:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in parent and residual[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            return total
        path = []
        v = t
        while v != s:
            path.append((parent[v], v))
            v = parent[v]
        push = min(residual[e] for e in path)
        for (u, v) in path:
            residual[(u, v)] -= push
            residual[(v, u)] += push
        total += push


def _feasible_by_lp(
    game: RuleBasedGame, S: FrozenSet[int], instances: Sequence[Rule]
) -> bool:
    from ocfgames import lp

    agents = sorted(S)
    var = {}
    names = []
    for ci in range(len(instances)):
        for j in agents:
            var[(ci, j)] = len(names)
            names.append(f"y_{ci}_{j}")
    constraints = []
    for ci, rule in enumerate(instances):
        for req in rule.requirements:
            coeffs = [ZERO] * len(names)
            for j in req.agents & S:
                coeffs[var[(ci, j)]] = Q(1)
            constraints.append((tuple(coeffs), ">=", req.minimum))
    for j in agents:
        coeffs = [ZERO] * len(names)
        for ci in range(len(instances)):
            coeffs[var[(ci, j)]] = Q(1)
        constraints.append((tuple(coeffs), "<=", game.weights[j]))
    program = lp.LinearProgram(tuple(names), tuple(constraints))
    return lp.solve(program).status != "infeasible"
