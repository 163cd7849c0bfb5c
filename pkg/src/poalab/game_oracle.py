"""Explicit finite games with brute-force equilibrium analysis.

This module is the independent ground truth for every linear-programming
result in the package: it enumerates all pure profiles of a finite game,
checks the unilateral-deviation condition directly, computes the price of
anarchy from the definition, runs best-response dynamics and verifies
generalized-smoothness certificates by exhaustion.  Nothing here touches the
LP machinery.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

from .basis import BasisPair, Side
from .rng import Xoshiro256StarStar

PROFILE_CAP_DEFAULT = 10 ** 7

# Unilateral-deviation comparisons use a slack proportional to the magnitude
# of the compared costs: constructed worst-case games satisfy the equilibrium
# condition with mathematical equality, and an absolute slack would be
# meaningless once resource values exceed ~1e4.
EQUILIBRIUM_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Best-response dynamics failed to settle; falsifies the potential argument."""


@dataclass(frozen=True)
class ResourceTable:
    """Tabulated values of one resource: c over loads 0..n, f over 0..n+1."""

    c: tuple[float, ...]
    f: tuple[float, ...]


@dataclass(frozen=True)
class GameInstance:
    n_users: int
    resources: tuple[ResourceTable, ...]
    action_sets: tuple[tuple[tuple[int, ...], ...], ...]
    side: Side = Side.COST_MIN

    def __post_init__(self) -> None:
        n = self.n_users
        if n < 1:
            raise ValueError("game needs at least one user")
        if len(self.action_sets) != n:
            raise ValueError("need one action set per user")
        for res in self.resources:
            if len(res.c) != n + 1 or len(res.f) != n + 2:
                raise ValueError("resource tables must cover loads 0..n (c) and 0..n+1 (f)")
            if res.c[0] != 0.0:
                raise ValueError("resource cost at load 0 must be 0")
        num_res = len(self.resources)
        for user, actions in enumerate(self.action_sets):
            if len(actions) < 1:
                raise ValueError(f"user {user} has no actions")
            for action in actions:
                if any(not (0 <= r < num_res) for r in action):
                    raise ValueError(f"user {user} references an invalid resource index")

    @property
    def num_profiles(self) -> int:
        out = 1
        for actions in self.action_sets:
            out *= len(actions)
        return out


@dataclass(frozen=True)
class OracleReport:
    equilibria: tuple[tuple[int, ...], ...]
    best_value: float
    worst_eq_value: float | None
    poa: float | None
    num_profiles: int


def make_game(n_users, resources, action_sets, side=Side.COST_MIN) -> GameInstance:
    """Build a GameInstance from plain sequences (resources as (c, f) pairs)."""
    tables = tuple(ResourceTable(tuple(float(v) for v in c), tuple(float(v) for v in f))
                   for c, f in resources)
    actions = tuple(tuple(tuple(int(r) for r in a) for a in user) for user in action_sets)
    return GameInstance(n_users, tables, actions, side)


def _loads(game: GameInstance, profile: tuple[int, ...]) -> list[int]:
    loads = [0] * len(game.resources)
    for user, choice in enumerate(profile):
        for r in game.action_sets[user][choice]:
            loads[r] += 1
    return loads


def system_value(game: GameInstance, profile) -> float:
    """System cost C(a) (cost side) or welfare W(a): sum of c at the observed loads."""
    profile = tuple(profile)
    if len(profile) != game.n_users:
        raise ValueError("profile must assign an action to every user")
    loads = _loads(game, profile)
    return sum(res.c[load] for res, load in zip(game.resources, loads))


def user_cost(game: GameInstance, profile, i: int) -> float:
    """User i's cost J_i (or utility U_i): sum of f at loads over the selected resources."""
    profile = tuple(profile)
    if not (0 <= i < game.n_users):
        raise ValueError(f"invalid user index {i}")
    loads = _loads(game, profile)
    return sum(game.resources[r].f[loads[r]] for r in game.action_sets[i][profile[i]])


def _deviation_value(game, loads, current_action, alt_action) -> float:
    current = set(current_action)
    return sum(game.resources[r].f[loads[r] + (0 if r in current else 1)]
               for r in alt_action)


def _is_equilibrium(game: GameInstance, profile, loads, eq_tol: float) -> bool:
    minimizing = game.side is Side.COST_MIN
    for i, choice in enumerate(profile):
        actions = game.action_sets[i]
        current_action = actions[choice]
        cur = sum(game.resources[r].f[loads[r]] for r in current_action)
        for alt_idx, alt in enumerate(actions):
            if alt_idx == choice:
                continue
            val = _deviation_value(game, loads, current_action, alt)
            slack = eq_tol * max(1.0, abs(cur), abs(val))
            if minimizing and val < cur - slack:
                return False
            if not minimizing and val > cur + slack:
                return False
    return True


def enumerate_equilibria(game: GameInstance, cap: int = PROFILE_CAP_DEFAULT,
                         eq_tol: float = EQUILIBRIUM_TOL) -> OracleReport:
    """Exhaustive profile sweep: equilibria, optimum and PoA from the definition.

    PoA is None when no equilibrium exists or the defining ratio has a
    nonpositive denominator (outside the model's positivity assumption).
    """
    total = game.num_profiles
    if total > cap:
        raise ValueError(f"profile space {total} exceeds cap {cap}")
    minimizing = game.side is Side.COST_MIN
    best = math.inf if minimizing else -math.inf
    equilibria = []
    worst_eq = None
    for profile in itertools.product(*[range(len(a)) for a in game.action_sets]):
        loads = _loads(game, profile)
        value = sum(res.c[load] for res, load in zip(game.resources, loads))
        best = min(best, value) if minimizing else max(best, value)
        if _is_equilibrium(game, profile, loads, eq_tol):
            equilibria.append(profile)
            if worst_eq is None:
                worst_eq = value
            else:
                worst_eq = max(worst_eq, value) if minimizing else min(worst_eq, value)
    poa = None
    if worst_eq is not None:
        denom = best if minimizing else worst_eq
        numer = worst_eq if minimizing else best
        if denom > 0:
            poa = numer / denom
    return OracleReport(tuple(equilibria), best, worst_eq, poa, total)


def potential_value(game: GameInstance, profile) -> float:
    """Rosenthal-style exact potential: sum over resources of cumulative f up to the load."""
    loads = _loads(game, tuple(profile))
    return sum(sum(res.f[k] for k in range(1, load + 1))
               for res, load in zip(game.resources, loads))


def best_response_dynamics(game: GameInstance, seed: int, max_rounds: int = 10_000,
                           start: tuple[int, ...] | None = None,
                           on_move=None) -> tuple[int, ...]:
    """Asynchronous best response from a seeded random start profile.

    Users move in index order; ties break toward the lowest action index.  The
    exact potential must strictly improve at every accepted move, and the
    dynamics must settle within ``max_rounds`` sweeps; violations raise
    :class:`ConvergenceError`.  ``on_move`` (if given) receives
    (potential_before, potential_after) for every accepted move.
    """
    if start is not None:
        profile = list(start)
        if len(profile) != game.n_users:
            raise ValueError("start profile must cover every user")
    else:
        rng = Xoshiro256StarStar(seed)
        profile = [rng.randrange(len(actions)) for actions in game.action_sets]
    minimizing = game.side is Side.COST_MIN
    for _ in range(max_rounds):
        moved = False
        for i in range(game.n_users):
            loads = _loads(game, tuple(profile))
            actions = game.action_sets[i]
            current_action = actions[profile[i]]
            cur = sum(game.resources[r].f[loads[r]] for r in current_action)
            best_idx, best_val = profile[i], cur
            for alt_idx, alt in enumerate(actions):
                if alt_idx == profile[i]:
                    continue
                val = _deviation_value(game, loads, current_action, alt)
                if (minimizing and val < best_val) or (not minimizing and val > best_val):
                    best_idx, best_val = alt_idx, val
            slack = EQUILIBRIUM_TOL * max(1.0, abs(cur), abs(best_val))
            improving = (cur - best_val if minimizing else best_val - cur) > slack
            if improving and best_idx != profile[i]:
                before = potential_value(game, profile)
                profile[i] = best_idx
                after = potential_value(game, profile)
                descent = before - after if minimizing else after - before
                if not descent > 0:
                    raise ConvergenceError(
                        "potential failed to improve on an improving move; "
                        "the game is outside the potential-game class")
                if on_move is not None:
                    on_move(before, after)
                moved = True
        if not moved:
            return tuple(profile)
    raise ConvergenceError(f"no equilibrium reached within {max_rounds} sweeps")


def check_generalized_smoothness(game: GameInstance, lam: float, mu: float,
                                 cap: int = PROFILE_CAP_DEFAULT,
                                 tol: float = 1e-9) -> bool:
    """Exhaustively test the generalized smoothness inequality at (lambda, mu).

    Cost side: sum_i J_i(a'_i, a_-i) - sum_i J_i(a) + C(a) <= lam*C(a') + mu*C(a)
    for every profile pair; welfare side mirrors with >= and lam*W(a') - mu*W(a).
    """
    total = game.num_profiles
    if total * total > cap:
        raise ValueError(f"profile-pair count {total * total} exceeds cap {cap}")
    profiles = list(itertools.product(*[range(len(a)) for a in game.action_sets]))
    stats = []
    for profile in profiles:
        loads = _loads(game, profile)
        value = sum(res.c[load] for res, load in zip(game.resources, loads))
        per_user = [sum(game.resources[r].f[loads[r]] for r in game.action_sets[i][profile[i]])
                    for i in range(game.n_users)]
        stats.append((profile, loads, value, sum(per_user)))
    minimizing = game.side is Side.COST_MIN
    for profile_a, loads_a, value_a, sum_a in stats:
        for profile_b, _, value_b, _ in stats:
            deviation = 0.0
            for i in range(game.n_users):
                current_action = game.action_sets[i][profile_a[i]]
                alt = game.action_sets[i][profile_b[i]]
                deviation += _deviation_value(game, loads_a, current_action, alt)
            lhs = deviation - sum_a + value_a
            rhs = lam * value_b + (mu * value_a if minimizing else -mu * value_a)
            slack = tol * max(1.0, abs(lhs), abs(rhs))
            if minimizing and lhs > rhs + slack:
                return False
            if not minimizing and lhs < rhs - slack:
                return False
    return True


def poa_bound_from_certificate(lam: float, mu: float, side: Side = Side.COST_MIN) -> float:
    """PoA bound implied by a generalized-smoothness certificate.

    Cost side: lam/(1-mu) for lam > 0, mu < 1.  Welfare side: (1+mu)/lam for
    lam > 0, mu > -1.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if side is Side.COST_MIN:
        if mu >= 1:
            raise ValueError("mu must be below 1 on the cost side")
        return lam / (1.0 - mu)
    if mu <= -1:
        raise ValueError("mu must exceed -1 on the welfare side")
    return (1.0 + mu) / lam


def random_in_class_game(bases: list[BasisPair], n_users: int, seed: int,
                         max_resources: int = 4, max_actions: int = 3,
                         sparsity: float = 0.5, max_tries: int = 500) -> GameInstance:
    """Random game generated from ``bases`` by nonnegative coefficient draws.

    Coefficients alpha_r^j are U[0,1] kept with probability ``sparsity``;
    action sets are random nonempty resource subsets.  Instances violating the
    model's positivity assumption (a nonpositive optimal value, or on the
    welfare side a nonpositive equilibrium welfare) are redrawn so the PoA is
    well defined.
    """
    if not bases:
        raise ValueError("need at least one basis pair")
    side = bases[0].side
    n = bases[0].n
    if n_users > n:
        raise ValueError(f"basis pairs are tabulated for at most {n} users")
    rng = Xoshiro256StarStar(seed)
    for _ in range(max_tries):
        num_res = 1 + rng.randrange(max_resources)
        resources = []
        for _ in range(num_res):
            c = [0.0] * (n_users + 1)
            f = [0.0] * (n_users + 2)
            for pair in bases:
                if rng.random() >= sparsity:
                    continue
                alpha = rng.random()
                for k in range(1, n_users + 1):
                    c[k] += alpha * pair.c[k]
                    f[k] += alpha * pair.f[k]
            resources.append((c, f))  # f at load n_users+1 stays 0 (boundary convention)
        action_sets = []
        for _ in range(n_users):
            count = 1 + rng.randrange(max_actions)
            actions = []
            for _ in range(count):
                subset = tuple(r for r in range(num_res) if rng.random() < 0.5)
                if not subset:
                    subset = (rng.randrange(num_res),)
                actions.append(subset)
            action_sets.append(tuple(actions))
        game = make_game(n_users, resources, action_sets, side)
        if enumerate_equilibria(game).poa is not None:
            return game
    raise RuntimeError(f"no admissible instance found in {max_tries} draws")


def game_to_json(game: GameInstance) -> str:
    doc = {
        "n": game.n_users,
        "side": game.side.value,
        "resources": [{"c": list(res.c), "f": list(res.f)} for res in game.resources],
        "actions": [[list(action) for action in user] for user in game.action_sets],
    }
    return json.dumps(doc, indent=2)


def game_from_json(text: str) -> GameInstance:
    doc = json.loads(text)
    try:
        return make_game(
            int(doc["n"]),
            [(res["c"], res["f"]) for res in doc["resources"]],
            doc["actions"],
            Side(doc["side"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed game document: {exc}") from exc


def save_game(game: GameInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(game_to_json(game))
        fh.write("\n")


def load_game(path) -> GameInstance:
    with open(path) as fh:
        return game_from_json(fh.read())
