"""Exact price-of-anarchy characterization via tractable linear programs.

For a class generated by basis pairs {C^j, F^j} with at most n users, the
cost-side program maximizes rho subject to

    C^j(y) - rho*C^j(x) + nu*[(x-z)F^j(x) - (y-z)F^j(x+1)] >= 0

over all pairs j and triplets (x, y, z) in IR(n), with nu >= 0; the price of
anarchy is exactly 1/rho*.  Rows with C^j(x) = 0 either hold trivially
(nonnegative nu coefficient) or collapse into an upper bound nu_bar on nu;
with that ceiling in place every remaining row is an upper halfplane in the
(nu, rho) plane, which is what the geometric solution path exploits.  The
welfare-side program minimizes rho under the mirrored constraints and returns
rho* itself as the price of anarchy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisPair, Side
from .index_set import Triplet, TripletSet, enumerate_full, enumerate_reduced
from .lp_core import (DEFAULT_TOLERANCES, LinearProgram, LpStatus, SolverFailureError,
                      SolverTolerances, solve, solve_two_var_geometric)

REDUCTION_CHECK_DEFAULT_CAP = 6


@dataclass(frozen=True)
class PoaReport:
    """Result of one characterization solve."""

    poa: float
    rho_star: float
    nu_star: float
    bounded: bool
    active: tuple[tuple[int, Triplet], ...]
    side: Side
    n: int

    def certificate(self) -> tuple[float, float]:
        """Recover the smoothness parameters (lambda, mu) from the optimizer.

        Cost side: lambda = 1/nu, mu = 1 - rho/nu.  Welfare side: lambda =
        1/nu, mu = rho/nu - 1.  Only defined at a bounded optimum.
        """
        if not self.bounded:
            raise ValueError("no smoothness certificate exists for an unbounded class")
        if not self.nu_star > 0.0:
            raise ValueError("degenerate optimizer: nu* = 0 carries no certificate")
        lam = 1.0 / self.nu_star
        if self.side is Side.COST_MIN:
            return lam, 1.0 - self.rho_star / self.nu_star
        return lam, self.rho_star / self.nu_star - 1.0


def _validate_class(bases: list[BasisPair], side: Side, n: int | None) -> int:
    if not bases:
        raise ValueError("basis class must contain at least one pair")
    for pair in bases:
        if pair.side is not side:
            raise ValueError(f"expected {side.value}-side pairs, got {pair.side.value} "
                             f"for {pair.label!r}")
    n0 = bases[0].n
    if any(p.n != n0 for p in bases):
        raise ValueError("all pairs in a class must share the same n")
    if n is not None and n != n0:
        raise ValueError(f"requested n={n} but basis pairs are tabulated for n={n0}")
    return n0


def pair_constraint_terms(pair: BasisPair, xyz: np.ndarray):
    """Per-triplet terms (nu coefficient, C(x), C(y)) for one basis pair."""
    X, Y, Z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    coef = (X - Z) * pair.f[X] - (Y - Z) * pair.f[X + 1]
    return coef, pair.c[X], pair.c[Y]


def _resolve_triplets(n: int, triplet_set: TripletSet | None) -> TripletSet:
    if triplet_set is None:
        return enumerate_reduced(n)
    if triplet_set.n != n:
        raise ValueError("triplet set was enumerated for a different n")
    return triplet_set


def build_cost_lp(bases: list[BasisPair], triplet_set: TripletSet):
    """Assemble the cost-side characterization LP over (nu, rho).

    Returns (LinearProgram, nu_bar, nu_bar_tags).  Rows with C(x) = 0 and
    nonnegative nu coefficient are dropped; those with negative coefficient
    become the nu ceiling, tagged with every near-minimizing origin row.
    """
    xyz = triplet_set.as_array()
    triplets = triplet_set.triplets
    coeff_rows, rhs, tags = [], [], []
    nu_bar = math.inf
    nu_bar_candidates: list[tuple[float, int, Triplet]] = []
    for j, pair in enumerate(bases):
        coef, cx, cy = pair_constraint_terms(pair, xyz)
        line_mask = cx > 0.0
        for i in np.flatnonzero(line_mask):
            coeff_rows.append((coef[i], -cx[i]))
            rhs.append(-cy[i])
            tags.append((j, triplets[i]))
        ceil_mask = (~line_mask) & (coef < 0.0)
        for i in np.flatnonzero(ceil_mask):
            cand = cy[i] / (-coef[i])
            nu_bar_candidates.append((cand, j, triplets[i]))
            nu_bar = min(nu_bar, cand)
    if not coeff_rows:
        raise ValueError("degenerate class: every resource cost function is identically zero")
    nu_bar_tags = tuple((j, t) for cand, j, t in nu_bar_candidates
                        if cand <= nu_bar + 1e-12 * max(1.0, nu_bar))
    lp = LinearProgram(
        num_vars=2,
        objective=np.array([0.0, 1.0]),
        row_coeffs=np.array(coeff_rows),
        row_rhs=np.array(rhs),
        lower=np.array([0.0, -np.inf]),
        upper=np.array([nu_bar, np.inf]),
        row_tags=tuple(tags),
    )
    return lp, nu_bar, nu_bar_tags


def characterize_cost(bases: list[BasisPair], n: int | None = None, *,
                      method: str = "geometric",
                      triplet_set: TripletSet | None = None,
                      tol: SolverTolerances = DEFAULT_TOLERANCES) -> PoaReport:
    """Exact price of anarchy of the cost-minimization class spanned by ``bases``.

    ``method`` selects the halfplane-envelope path ("geometric", the sweep hot
    path) or the simplex path ("simplex"); both must agree and are
    cross-checked in the tests.  ``triplet_set`` overrides the constraint
    index set (used by the reduction-equivalence check).
    """
    n = _validate_class(bases, Side.COST_MIN, n)
    ts = _resolve_triplets(n, triplet_set)
    lp, nu_bar, nu_bar_tags = build_cost_lp(bases, ts)
    if method == "geometric":
        sol = solve_two_var_geometric(lp, tol)
    elif method == "simplex":
        sol = solve(lp, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(
            f"characterization LP reported {sol.status.value}; the program is "
            "feasible and bounded for every valid class")
    nu_star, rho_star = float(sol.values[0]), float(sol.values[1])
    bounded = rho_star > tol.activity
    active = [lp.row_tags[i] for i in sorted(sol.active_rows)]
    if math.isfinite(nu_bar) and nu_bar - nu_star <= tol.activity * max(1.0, nu_bar):
        active.extend(nu_bar_tags)
    return PoaReport(
        poa=1.0 / rho_star if bounded else math.inf,
        rho_star=rho_star,
        nu_star=nu_star,
        bounded=bounded,
        active=tuple(active),
        side=Side.COST_MIN,
        n=n,
    )


def build_welfare_lp(bases: list[BasisPair], triplet_set: TripletSet) -> LinearProgram:
    """Assemble the welfare-side characterization LP (minimize rho) over (nu, rho)."""
    xyz = triplet_set.as_array()
    triplets = triplet_set.triplets
    coeff_rows, rhs, tags = [], [], []
    for j, pair in enumerate(bases):
        coef, wx, wy = pair_constraint_terms(pair, xyz)
        # W(y) - rho*W(x) + nu*coef <= 0  rewritten as  -coef*nu + W(x)*rho >= W(y)
        for i in range(xyz.shape[0]):
            coeff_rows.append((-coef[i], wx[i]))
            rhs.append(wy[i])
            tags.append((j, triplets[i]))
    return LinearProgram(
        num_vars=2,
        objective=np.array([0.0, -1.0]),
        row_coeffs=np.array(coeff_rows),
        row_rhs=np.array(rhs),
        lower=np.array([0.0, -np.inf]),
        upper=np.array([np.inf, np.inf]),
        row_tags=tuple(tags),
    )


def characterize_welfare(bases: list[BasisPair], n: int | None = None, *,
                         triplet_set: TripletSet | None = None,
                         tol: SolverTolerances = DEFAULT_TOLERANCES) -> PoaReport:
    """Exact price of anarchy of the welfare-maximization class spanned by ``bases``.

    An infeasible program means no finite smoothness bound exists (for
    instance a reachable positive welfare with all-zero generating values);
    this is reported as an unbounded price of anarchy rather than an error.
    """
    n = _validate_class(bases, Side.WELFARE_MAX, n)
    if all(not np.any(p.c > 0.0) for p in bases):
        raise ValueError("degenerate class: every resource welfare function is identically zero")
    ts = _resolve_triplets(n, triplet_set)
    lp = build_welfare_lp(bases, ts)
    sol = solve(lp, tol)
    if sol.status is LpStatus.INFEASIBLE:
        return PoaReport(poa=math.inf, rho_star=math.nan, nu_star=math.nan,
                         bounded=False, active=(), side=Side.WELFARE_MAX, n=n)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(f"welfare characterization LP reported {sol.status.value}")
    nu_star, rho_star = float(sol.values[0]), float(sol.values[1])
    active = tuple(lp.row_tags[i] for i in sorted(sol.active_rows))
    return PoaReport(poa=rho_star, rho_star=rho_star, nu_star=nu_star,
                     bounded=True, active=active, side=Side.WELFARE_MAX, n=n)


def bilo_upper_bound(n: int, tol: SolverTolerances = DEFAULT_TOLERANCES,
                     with_multiplier: bool = False):
    """Bilo's two-variable baseline bound for affine congestion games.

    Solves min gamma s.t. gamma*y^2 - x^2 + kappa*[x^2 - (x+1)y] >= 0 over all
    x, y in {0..n} with kappa >= 0.  The optimal gamma upper-bounds the affine
    price of anarchy but is generally not tight (gamma* = 2.5 at n = 2 versus
    the exact value 2).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    coeff_rows, rhs = [], []
    for x in range(n + 1):
        for y in range(n + 1):
            if x == 0 and y == 0:
                continue
            coeff_rows.append((float(x * x - (x + 1) * y), float(y * y)))
            rhs.append(float(x * x))
    lp = LinearProgram(
        num_vars=2,
        objective=np.array([0.0, -1.0]),
        row_coeffs=np.array(coeff_rows),
        row_rhs=np.array(rhs),
        lower=np.array([0.0, -np.inf]),
        upper=np.array([np.inf, np.inf]),
    )
    sol = solve(lp, tol)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(f"baseline LP reported {sol.status.value}")
    kappa, gamma = float(sol.values[0]), float(sol.values[1])
    return (gamma, kappa) if with_multiplier else gamma


def check_reduction_equivalence(bases: list[BasisPair], n: int | None = None,
                                cap: int = REDUCTION_CHECK_DEFAULT_CAP,
                                tol: SolverTolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff the LP over the full set I(n) matches the one over IR(n).

    Agreement is required within 10x the feasibility tolerance.  Cubic in n,
    hence the cap.
    """
    side = bases[0].side if bases else Side.COST_MIN
    n0 = _validate_class(bases, side, n)
    if n0 > cap:
        raise ValueError(f"reduction check capped at n={cap} (requested n={n0})")
    full = enumerate_full(n0)
    red = enumerate_reduced(n0)
    fn = characterize_cost if side is Side.COST_MIN else characterize_welfare
    rep_full = fn(bases, n0, triplet_set=full, tol=tol)
    rep_red = fn(bases, n0, triplet_set=red, tol=tol)
    if rep_full.bounded != rep_red.bounded:
        return False
    if not rep_full.bounded:
        return True
    return abs(rep_full.rho_star - rep_red.rho_star) <= 10.0 * tol.feasibility
