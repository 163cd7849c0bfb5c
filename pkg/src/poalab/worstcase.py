"""Construction of explicit games whose PoA matches the characterization LP.

At a bounded optimum (nu*, rho*) the binding constraints supply two rows with
opposite-signed nu coefficients; a convex weight eta balancing those
coefficients to zero yields a game on two disjoint resource cycles whose
worst equilibrium-to-optimum ratio is exactly 1/rho*.  When the optimum sits
at the nu ceiling, the ceiling row (a constraint with C(x) = 0) plays the
nonpositive role.  Unbounded classes instead get the two-resource family
whose PoA grows without bound as the scaling eta approaches zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .basis import BasisPair, Side
from .characterize import PoaReport
from .game_oracle import GameInstance, make_game
from .index_set import Triplet


class Scenario(enum.Enum):
    TWO_LINES = "two-lines"
    NUBAR_BOUNDARY = "nubar-boundary"
    UNBOUNDED = "unbounded"


class RecipeExtractionError(RuntimeError):
    """No qualifying pair of active rows; signals a tolerance misconfiguration."""


@dataclass(frozen=True)
class WorstCaseRecipe:
    scenario: Scenario
    pair_a: tuple[int, Triplet]
    pair_b: tuple[int, Triplet] | None
    eta: float


def _coef(pair: BasisPair, t: Triplet) -> float:
    return (t.x - t.z) * pair.f[t.x] - (t.y - t.z) * pair.f[t.x + 1]


def slope_balance_residual(recipe: WorstCaseRecipe, bases: list[BasisPair]) -> float:
    """Residual of eta*coef_a + (1-eta)*coef_b; zero certifies the equilibrium."""
    if recipe.pair_b is None:
        raise ValueError("unbounded recipes carry no slope balance")
    ja, ta = recipe.pair_a
    jb, tb = recipe.pair_b
    return recipe.eta * _coef(bases[ja], ta) + (1.0 - recipe.eta) * _coef(bases[jb], tb)


def extract_recipe(report: PoaReport, bases: list[BasisPair], n: int | None = None,
                   eta_unbounded: float = 1e-3) -> WorstCaseRecipe:
    """Select binding rows and the balancing weight eta from a characterization report."""
    if report.side is not Side.COST_MIN:
        raise ValueError("worst-case construction is implemented for the cost side only")
    if n is None:
        n = report.n
    if n != report.n or any(p.n != n for p in bases):
        raise ValueError("report and basis pairs disagree on n")

    if not report.bounded:
        if not 0.0 < eta_unbounded < 1.0:
            raise ValueError("eta for the unbounded construction must lie in (0, 1)")
        best = None
        for j, pair in enumerate(bases):
            for x in range(1, n + 1):
                if pair.f[x] <= 0.0 and pair.c[x] > 0.0:
                    if best is None or pair.f[x] < best[0]:
                        best = (pair.f[x], j, x)
        if best is None:
            raise RecipeExtractionError(
                "class is flagged unbounded but no pair has F(x) <= 0 with C(x) > 0")
        _, j, x = best
        return WorstCaseRecipe(Scenario.UNBOUNDED, (j, Triplet(x, 0, 0)), None, eta_unbounded)

    positive, nonpositive = [], []
    for j, t in report.active:
        coef = _coef(bases[j], t)
        cx = bases[j].c[t.x]
        if cx > 0.0 and coef > 0.0:
            positive.append((j, t, coef, cx))
        elif coef <= 0.0:
            nonpositive.append((j, t, coef, cx))
    if not positive or not nonpositive:
        raise RecipeExtractionError(
            "active set lacks a positive/nonpositive slope pair; "
            "check the activity tolerance")

    # prefer the nu-ceiling row (vertical boundary) when it is active, then
    # maximize the slope gap for a well-conditioned eta solve
    best_key, best_pair = None, None
    for pj, pt, pcoef, pcx in positive:
        for qj, qt, qcoef, qcx in nonpositive:
            on_ceiling = qcx == 0.0
            gap = math.inf if on_ceiling else abs(pcoef / pcx - qcoef / qcx)
            key = (1 if on_ceiling else 0, gap)
            if best_key is None or key > best_key:
                best_key = key
                best_pair = ((pj, pt, pcoef), (qj, qt, qcoef), on_ceiling)
    (pj, pt, pcoef), (qj, qt, qcoef), on_ceiling = best_pair
    if pcoef == 0.0:
        eta = 1.0
    elif qcoef == 0.0:
        eta = 0.0
    else:
        eta = qcoef / (qcoef - pcoef)
    scenario = Scenario.NUBAR_BOUNDARY if on_ceiling else Scenario.TWO_LINES
    return WorstCaseRecipe(scenario, (pj, pt), (qj, qt), eta)


def _cycle_positions(start: int, count: int, n: int) -> list[int]:
    return [(start + t) % n for t in range(count)]


def build_game(recipe: WorstCaseRecipe, bases: list[BasisPair], n: int) -> GameInstance:
    """Materialize the game instance encoded by a recipe.

    Bounded scenarios: two disjoint cycles of n resources; cycle 1 carries the
    pair of ``pair_a`` scaled by eta, cycle 2 the pair of ``pair_b`` scaled by
    1 - eta.  User i's equilibrium action takes x consecutive cycle-1
    resources starting at position i and x' consecutive cycle-2 resources
    starting at the mirrored position; its optimal action takes y resources
    ending at position i + z - 1 (and y' ending at i + z' - 1 on cycle 2), so
    per-resource loads realize exactly the recipe triplets.  Unbounded
    scenario: x users choose between two copies of the flagged pair scaled by
    eta and 1 - eta.
    """
    if any(p.n != n for p in bases):
        raise ValueError("basis pairs disagree with requested n")
    eta = recipe.eta

    if recipe.scenario is Scenario.UNBOUNDED:
        j, t = recipe.pair_a
        pair = bases[j]
        x = t.x
        # tables truncated to the instance's own user count
        resources = [(eta * pair.c[:x + 1], eta * pair.f[:x + 2]),
                     ((1.0 - eta) * pair.c[:x + 1], (1.0 - eta) * pair.f[:x + 2])]
        actions = [((0,), (1,))] * x
        return make_game(x, resources, actions, Side.COST_MIN)

    ja, ta = recipe.pair_a
    jb, tb = recipe.pair_b
    pa, pb = bases[ja], bases[jb]
    resources = [(eta * pa.c, eta * pa.f) for _ in range(n)]
    resources += [((1.0 - eta) * pb.c, (1.0 - eta) * pb.f) for _ in range(n)]
    action_sets = []
    for u in range(n):
        ne = sorted(_cycle_positions(u, ta.x, n)) \
            + [n + r for r in sorted(_cycle_positions(u, tb.x, n))]
        opt = sorted(_cycle_positions(u + ta.z - ta.y, ta.y, n)) \
            + [n + r for r in sorted(_cycle_positions(u + tb.z - tb.y, tb.y, n))]
        action_sets.append((tuple(ne), tuple(opt)))
    return make_game(n, resources, tuple(action_sets), Side.COST_MIN)


EQUILIBRIUM_PROFILE_INDEX = 0
OPTIMAL_PROFILE_INDEX = 1


def certificate_profiles(game: GameInstance) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The (equilibrium, optimal) profiles encoded in a constructed game."""
    n = game.n_users
    return ((EQUILIBRIUM_PROFILE_INDEX,) * n, (OPTIMAL_PROFILE_INDEX,) * n)
