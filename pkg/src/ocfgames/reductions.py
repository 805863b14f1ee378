"""Hardness-style instance generators with independently checkable answers.

Two families of (game, outcome) pairs whose core-membership verdict encodes
a classical decision problem:

- from_knapsack: a single-agent game in which the outcome is stable for the
  strict core exactly when the unbounded-knapsack instance cannot reach its
  target value;
- from_biclique: a multi-agent game in which the outcome survives
  refinement deviations (deviators keep shares of untouched coalitions)
  exactly when the bipartite graph has no biclique of the target edge count.

Both come with brute-force deciders so the encodings can be cross-checked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ocfgames.model import (
    CoalitionStructure,
    GameError,
    Outcome,
    PartialCoalition,
    TaskType,
    TTG,
)
from ocfgames.rationals import Q

ZERO = Q(0)


# ---------------------------------------------------------------------------
# unbounded knapsack
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnapsackInstance:
    """Unbounded knapsack decision instance: reach value >= target within
    capacity using unlimited copies of each (size, value) item."""

    items: tuple[tuple[int, int], ...]
    capacity: int
    target: int

    def normalized(self) -> "KnapsackInstance":
        """Drop items never used by an optimal solution.

        Removes items dominated by a smaller-or-equal item of strictly
        larger value, then enforces size < capacity and value < target.
        """
        kept = []
        for idx, (s, z) in enumerate(self.items):
            dominated = any(
                (s2 <= s and z2 > z) or (s2 < s and z2 >= z and idx < idx2)
                for idx2, (s2, z2) in enumerate(self.items)
                if idx2 != idx
            )
            if not dominated and (s, z) not in kept:
                kept.append((s, z))
        for s, z in kept:
            if s <= 0 or z <= 0:
                raise GameError("item sizes and values must be positive")
            if s >= self.capacity:
                raise GameError(f"item size {s} must be below capacity")
            if z >= self.target:
                raise GameError(f"item value {z} must be below the target")
        return KnapsackInstance(tuple(sorted(kept)), self.capacity, self.target)


def knapsack_decision(instance: KnapsackInstance) -> bool:
    """Brute-force decider: can the capacity hold value >= target?"""
    best = [0] * (instance.capacity + 1)
    for w in range(1, instance.capacity + 1):
        for s, z in instance.items:
            if s <= w and best[w - s] + z > best[w]:
                best[w] = best[w - s] + z
    return best[instance.capacity] >= instance.target


def from_knapsack(instance: KnapsackInstance) -> tuple[TTG, Outcome]:
    """Encode an unbounded-knapsack instance as a single-agent game.

    One agent of weight equal to the capacity; one task per item plus a
    sentinel task paying target - 1 at full weight.  The outcome commits
    everything to one coalition, earning target - 1; a strictly profitable
    deviation exists exactly when the knapsack can reach the target.
    """
    inst = instance.normalized()
    if inst.target < 2 and not inst.items:
        raise GameError("degenerate target")
    tasks = tuple(
        TaskType(Q(s), Q(z)) for s, z in inst.items
    ) + (TaskType(Q(inst.capacity), Q(inst.target - 1)),)
    game = TTG((Q(inst.capacity),), tasks)
    cs = CoalitionStructure((PartialCoalition((Q(inst.capacity),)),))
    outcome = Outcome(cs, ((Q(inst.target - 1),),))
    return game, outcome


# ---------------------------------------------------------------------------
# maximum edge biclique
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BicliqueInstance:
    """Bipartite graph (left_size, right_size, edges) and an edge-count
    target: is there a complete bipartite subgraph with at least `target`
    edges?  Edges are 0-based (left, right) pairs."""

    left_size: int
    right_size: int
    edges: frozenset[tuple[int, int]]
    target: int

    def __post_init__(self):
        if self.left_size < 1 or self.right_size < 1 or self.target < 1:
            raise GameError("sides and target must be positive")
        for a, b in self.edges:
            if not (0 <= a < self.left_size and 0 <= b < self.right_size):
                raise GameError(f"edge ({a},{b}) out of range")

    def swapped(self) -> "BicliqueInstance":
        return BicliqueInstance(
            self.right_size,
            self.left_size,
            frozenset((b, a) for a, b in self.edges),
            self.target,
        )


def biclique_decision(instance: BicliqueInstance) -> bool:
    """Brute-force decider: enumerate all (L', R') pairs."""
    for ls in range(1, instance.left_size + 1):
        for L in itertools.combinations(range(instance.left_size), ls):
            common = [
                b
                for b in range(instance.right_size)
                if all((a, b) in instance.edges for a in L)
            ]
            if ls * len(common) >= instance.target:
                return True
    return False


def from_biclique(instance: BicliqueInstance) -> tuple[TTG, Outcome]:
    """Encode a biclique instance as a game with one coalition per left
    vertex and one agent per right vertex (plus a heavy anchor agent).

    Every agent spreads its weight evenly over all coalitions; each
    coalition completes the high-value task.  Shares are 1 on edges and
    prohibitively large otherwise, the anchor absorbing the remainder.  A
    set of agents can profitably abandon a set of coalitions and run the
    low task exactly when those sets form a biclique with at least
    `target` edges.
    """
    inst = instance
    if inst.left_size > inst.right_size:
        inst = inst.swapped()
    k = inst.left_size
    n = inst.right_size + 1
    M = k * k * n * n
    V = k * k * n * M
    weights = tuple([Q(k)] * (n - 1) + [Q(k * (k * n - n + 1))])
    tasks = (TaskType(Q(k * n), Q(V)), TaskType(Q(inst.target), Q((n - 1) * k + 1)))
    game = TTG(weights, tasks)
    coalitions = tuple(
        PartialCoalition(tuple(w / k for w in weights)) for _ in range(k)
    )
    payoffs = []
    for j in range(k):
        row = [Q(1) if (j, i) in inst.edges else Q(M) for i in range(n - 1)]
        row.append(Q(V) - sum(row, ZERO))
        payoffs.append(tuple(row))
    outcome = Outcome(CoalitionStructure(coalitions), tuple(payoffs))
    return game, outcome
