"""Core stability: decision procedures for outcomes under group deviations.

An outcome is stable against group deviations exactly when every agent set
collectively receives at least what it could create on its own.  This module
offers that check in four flavours: direct subset enumeration, a
dynamic-programming shortcut for threshold task games, a constructive
stabilization procedure built on constraint generation, and per-structure
stabilization with a dual certificate when no stabilizing imputation exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterable, Optional, Sequence

from ocfgames import lp, welfare
from ocfgames.model import (
    CoalitionStructure,
    Game,
    GameError,
    Outcome,
    PartialCoalition,
    TTG,
    payoff_vector,
    structure_value,
    to_nonoverlapping,
    validate_outcome,
)
from ocfgames.rationals import Q

ZERO = Q(0)
SUBSET_GUARD = 16


@dataclass(frozen=True)
class BalancedCollection:
    """Dual weights certifying that a structure cannot be stabilized.

    ``lambdas`` maps agent sets to nonnegative weights; ``mus`` has one entry
    per coalition.  Together they satisfy, for every coalition ``i`` and every
    agent ``j`` in its support, ``sum(lambdas[S] for S containing j) + mus[i]
    == 1``, while the weighted combination of achievable values strictly
    exceeds the grand coalition's optimum.
    """

    lambdas: dict[FrozenSet[int], Fraction]
    mus: tuple[Fraction, ...]

    def check(self, game: Game, cs: CoalitionStructure) -> list[str]:
        """Every violated certificate condition; empty when the certificate
        is valid (balance equalities hold and the value inequality is
        strictly violated)."""
        problems = []
        if any(l < 0 for l in self.lambdas.values()):
            problems.append("negative lambda weight")
        if len(self.mus) != len(cs):
            problems.append("mu length does not match the structure")
            return problems
        for i, c in enumerate(cs.coalitions):
            for j in sorted(c.support):
                total = self.mus[i] + sum(
                    (l for S, l in self.lambdas.items() if j in S), ZERO
                )
                if total != 1:
                    problems.append(
                        f"balance equality fails at coalition {i}, agent {j}: {total}"
                    )
        lhs = sum(
            (l * welfare.vstar(game, S) for S, l in self.lambdas.items()), ZERO
        ) + sum(
            (mu * game.value(c.units) for mu, c in zip(self.mus, cs.coalitions)),
            ZERO,
        )
        top = welfare.vstar(game, range(game.n))
        if lhs <= top:
            problems.append(f"value inequality not violated: {lhs} <= {top}")
        return problems


@dataclass(frozen=True)
class CoreVerdict:
    stable: bool
    witness: Optional[FrozenSet[int]] = None  # a blocking agent set
    witness_value: Optional[Fraction] = None  # what the blockers can achieve
    shortfall: Optional[Fraction] = None  # witness_value - their current payoff
    outcome: Optional[Outcome] = None  # stabilizing outcome, when one is built
    certificate: Optional[BalancedCollection] = None
    resolution: Optional[tuple] = None  # (cap, grid) for grid-limited searches
    deviation: Optional[object] = None  # DeviationResult when found by a search


def _subsets(n: int) -> Iterable[tuple[int, ...]]:
    """All nonempty agent sets, lexicographically by sorted member tuple."""
    return itertools.chain.from_iterable(
        itertools.combinations(range(n), k) for k in range(1, n + 1)
    )


def check_group_rationality(
    game: Game,
    outcome: Outcome,
    cap: Optional[int] = None,
    grid: int = 1,
) -> CoreVerdict:
    """Stable iff every agent set is paid at least its standalone optimum.

    Enumerates all nonempty agent sets; the witness is the first violator in
    lexicographic order.  For rule-based games the standalone optimum is
    searched at the given resolution (structure cap and contribution grid);
    the threshold-task path is exact and ignores them.
    """
    n = game.n
    if n > SUBSET_GUARD and not isinstance(game, TTG):
        raise GameError(f"subset enumeration supports at most {SUBSET_GUARD} agents")
    if isinstance(game, TTG):
        return ttg_membership(game, outcome)
    p = payoff_vector(outcome)
    return _check_subsets(game, p, cap, grid)


def _check_subsets(
    game: Game, p: Sequence[Fraction], cap: Optional[int] = None, grid: int = 1
) -> CoreVerdict:
    for S in _subsets(game.n):
        need = welfare.vstar(game, S, cap=cap, grid=grid)
        have = sum((p[j] for j in S), ZERO)
        if have < need:
            return CoreVerdict(
                stable=False,
                witness=frozenset(S),
                witness_value=need,
                shortfall=need - have,
            )
    return CoreVerdict(stable=True)


# ---------------------------------------------------------------------------
# threshold task games: DP membership


@dataclass(frozen=True)
class MinPayoffTable:
    """Minimal total payoff of any agent subset pooling at least ``w`` units.

    ``P[i][w]`` is the cheapest (by payoff) subset of the first ``i`` agents
    whose scaled weights sum to at least ``w``; ``None`` marks "no subset".
    """

    scale: int
    P: tuple[tuple[Optional[Fraction], ...], ...]

    def cheapest(self, w: int) -> Optional[Fraction]:
        return self.P[-1][w]


def min_payoff_table(
    game: TTG, payoffs: Sequence[Fraction], limit: Optional[int] = None
) -> MinPayoffTable:
    M = welfare.scale_factor(game)
    weights = [int(w * M) for w in game.weights]
    W = sum(weights) if limit is None else limit
    n = game.n
    P: list[list[Optional[Fraction]]] = [[None] * (W + 1) for _ in range(n + 1)]
    P[0][0] = ZERO
    for i in range(n):
        wi, pi = weights[i], payoffs[i]
        prev, cur = P[i], P[i + 1]
        for w in range(W + 1):
            best = prev[w]
            take = prev[max(0, w - wi)]
            if take is not None and (best is None or pi + take < best):
                best = pi + take
            cur[w] = best
    return MinPayoffTable(M, tuple(tuple(row) for row in P))


def _recover_cheap_subset(
    game: TTG, payoffs: Sequence[Fraction], table: MinPayoffTable, w: int
) -> FrozenSet[int]:
    """Backtrack a subset attaining ``P[n][w]``; prefers leaving out the
    higher-index agent when both branches attain the minimum."""
    M = table.scale
    weights = [int(x * M) for x in game.weights]
    chosen = []
    target = table.P[game.n][w]
    for i in range(game.n, 0, -1):
        if table.P[i - 1][w] == target:
            continue  # skip agent i-1
        chosen.append(i - 1)
        w = max(0, w - weights[i - 1])
        target = target - payoffs[i - 1]
    return frozenset(chosen)


def ttg_membership(game: TTG, outcome: Outcome) -> CoreVerdict:
    """DP shortcut for the subset condition on threshold task games.

    Compares, for every pooled scaled weight ``w``, the cheapest subset
    reaching ``w`` against the best utility ``w`` can earn; the first failing
    weight (ascending) yields a concrete blocking set.
    """
    p = payoff_vector(outcome)
    return ttg_payoff_membership(game, p)


def ttg_payoff_membership(game: TTG, p: Sequence[Fraction]) -> CoreVerdict:
    """Same subset condition, stated on a bare payoff vector."""
    if len(p) != game.n:
        raise GameError(f"payoff vector of length {len(p)} for {game.n} agents")
    profile = welfare.knapsack_profile(game)
    table = min_payoff_table(game, p)
    for w in range(1, profile.limit + 1):
        cheapest = table.cheapest(w)
        if cheapest is not None and cheapest < profile.utilities[w]:
            S = _recover_cheap_subset(game, p, table, w)
            return CoreVerdict(
                stable=False,
                witness=S,
                witness_value=profile.utilities[w],
                shortfall=profile.utilities[w] - cheapest,
            )
    return CoreVerdict(stable=True)


# ---------------------------------------------------------------------------
# stabilization


def stabilize(game: TTG) -> CoreVerdict:
    """Find a stable outcome on the canonical welfare-optimal structure.

    Runs constraint generation over payoff vectors (nonnegative, summing to
    the optimal welfare) with the DP membership check as separation oracle,
    then spreads each agent's payoff over the coalitions proportionally to
    coalition value.  Reports instability when the payoff polytope is empty,
    which by group rationality of the condition means no stable outcome
    exists at all.
    """
    total, _, cs = welfare.max_welfare_overlapping(game)
    if total == 0:
        empty = Outcome(CoalitionStructure(()), ())
        return CoreVerdict(stable=True, outcome=empty)
    n = game.n
    names = tuple(f"p_{j}" for j in range(n))
    base = lp.LinearProgram(
        names, (((Q(1),) * n, "==", total),)
    )

    def oracle(assignment):
        verdict = ttg_payoff_membership(game, assignment)
        if verdict.stable:
            return None
        S = verdict.witness
        coeffs = tuple(Q(1) if j in S else ZERO for j in range(n))
        return (coeffs, ">=", welfare.vstar(game, S))

    result, _ = lp.solve_with_separation(base, oracle)
    if result.status == "infeasible":
        return CoreVerdict(stable=False, certificate=None)
    p = result.assignment
    values = [game.value(c.units) for c in cs.coalitions]
    payoffs = tuple(
        tuple(p[j] * v / total for j in range(n)) for v in values
    )
    outcome = Outcome(cs, payoffs)
    problems = validate_outcome(game, outcome)
    if problems:  # pragma: no cover - guarded by construction
        raise AssertionError("stabilize built an invalid outcome: " + "; ".join(problems))
    return CoreVerdict(stable=True, outcome=outcome)


def stabilize_structure(game: Game, cs: CoalitionStructure) -> CoreVerdict:
    """Decide whether this particular structure admits a stable division.

    Solves the feasibility program over per-coalition payoff entries (free,
    supported agents only): rows sum to coalition values and every agent set
    is paid its standalone optimum.  On infeasibility the dual multipliers
    are reshaped into a :class:`BalancedCollection` certificate.
    """
    n = game.n
    if n > SUBSET_GUARD:
        raise GameError(f"subset enumeration supports at most {SUBSET_GUARD} agents")
    supports = [sorted(c.support) for c in cs.coalitions]
    var = {}
    names = []
    for i, sup in enumerate(supports):
        for j in sup:
            var[(i, j)] = len(names)
            names.append(f"x_{i}_{j}")
    nvars = len(names)
    constraints = []
    subset_rows = []
    for S in _subsets(n):
        coeffs = [ZERO] * nvars
        for (i, j), k in var.items():
            if j in S:
                coeffs[k] = Q(1)
        constraints.append((tuple(coeffs), ">=", welfare.vstar(game, S)))
        subset_rows.append(frozenset(S))
    for i, sup in enumerate(supports):
        coeffs = [ZERO] * nvars
        for j in sup:
            coeffs[var[(i, j)]] = Q(1)
        constraints.append(
            (tuple(coeffs), "==", game.value(cs.coalitions[i].units))
        )
    program = lp.LinearProgram(
        tuple(names), tuple(constraints), free=frozenset(range(nvars))
    )
    result = lp.solve(program)
    if result.status != "infeasible":
        payoffs = tuple(
            tuple(
                result.assignment[var[(i, j)]] if (i, j) in var else ZERO
                for j in range(n)
            )
            for i in range(len(cs))
        )
        outcome = Outcome(cs, payoffs, allow_negative=True)
        return CoreVerdict(stable=True, outcome=outcome)

    cert = _balanced_collection(game, cs, subset_rows, result.certificate)
    return CoreVerdict(stable=False, certificate=cert)


def _balanced_collection(
    game: Game,
    cs: CoalitionStructure,
    subset_rows: Sequence[FrozenSet[int]],
    farkas: Sequence[Fraction],
) -> BalancedCollection:
    """Reshape LP infeasibility multipliers into a balanced collection.

    The multipliers form a ray along which the balance equalities are
    unchanged; it is added to the trivial collection (all mu = 1) with a
    factor large enough that the combined value strictly exceeds the grand
    coalition's optimum.
    """
    m = len(subset_rows)
    lam_ray = {S: farkas[k] for k, S in enumerate(subset_rows)}
    mu_ray = list(farkas[m:])
    gap = sum(
        (lam_ray[S] * welfare.vstar(game, S) for S in subset_rows), ZERO
    ) + sum(
        (u * game.value(c.units) for u, c in zip(mu_ray, cs.coalitions)), ZERO
    )
    assert gap > 0
    base_value = sum((game.value(c.units) for c in cs.coalitions), ZERO)
    top = welfare.vstar(game, range(game.n))
    t = max(Q(1), (top - base_value + 1) / gap)
    lambdas = {S: t * lam_ray[S] for S in subset_rows if lam_ray[S] != 0}
    mus = tuple(Q(1) + t * u for u in mu_ray)
    cert = BalancedCollection(lambdas, mus)
    problems = cert.check(game, cs)
    if problems:  # pragma: no cover - guarded by LP duality
        raise AssertionError("bad certificate: " + "; ".join(problems))
    return cert


# ---------------------------------------------------------------------------
# non-overlapping core


def nonoverlapping_core_check(
    game: TTG, partition: Sequence[Iterable[int]], p: Sequence[Fraction]
) -> CoreVerdict:
    """Partition-core membership for threshold task games.

    Requires per-block efficiency (each block's payoffs sum to its crisp
    value); stability then compares, per pooled weight, the cheapest crisp
    coalition against the single best task that weight completes.
    """
    blocks = [frozenset(S) for S in partition]
    seen: set[int] = set()
    for S in blocks:
        if S & seen:
            raise GameError("partition blocks overlap")
        seen |= S
    if seen != set(range(game.n)):
        raise GameError("partition does not cover all agents")
    if len(p) != game.n:
        raise GameError(f"payoff vector of length {len(p)} for {game.n} agents")
    for S in blocks:
        have = sum((p[j] for j in S), ZERO)
        want = to_nonoverlapping(game, S)
        if have != want:
            raise GameError(
                f"payoffs for block {sorted(S)} sum to {have}, block value is {want}"
            )
    table = min_payoff_table(game, p)
    M = table.scale
    limit = int(game.total_weight() * M)
    for w in range(1, limit + 1):
        cheapest = table.cheapest(w)
        best_single = game.best_utility(Q(w, M))
        if cheapest is not None and cheapest < best_single:
            S = _recover_cheap_subset(game, p, table, w)
            return CoreVerdict(
                stable=False,
                witness=S,
                witness_value=best_single,
                shortfall=best_single - cheapest,
            )
    return CoreVerdict(stable=True)
