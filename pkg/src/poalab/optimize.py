"""Synthesis of generating functions (incentives / utility rules) minimizing the PoA.

Given a resource cost function C, the optimal cost generating function solves

    maximize rho  over F in R^n, rho
    s.t. C(y) - rho*C(x) + (x-z)F(x) - (y-z)F(x+1) >= 0   for all (x,y,z) in IR(n)

(the welfare analogue minimizes rho under the mirrored constraints).  The
returned F is nu-scaled: equilibrium conditions are invariant to positive
scaling of F, so the scale is immaterial and can be normalized on request.
The per-basis programs decouple; the class PoA is the worst per-basis PoA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BasisPair, Side
from .index_set import TripletSet, enumerate_reduced
from .lp_core import (DEFAULT_TOLERANCES, LinearProgram, LpStatus, SolverFailureError,
                      SolverTolerances, solve)


@dataclass(frozen=True)
class OptimalRule:
    """An optimized generating function for one basis, with its exact PoA."""

    f_opt: np.ndarray  # values F(1..n)
    rho_j: float
    poa_j: float
    n: int
    side: Side
    label: str = ""
    degenerate: bool = False


@dataclass(frozen=True)
class FixedIncentiveResult:
    """Joint solution of the constant-incentive program over a cost class."""

    tau: np.ndarray | None  # one constant incentive per basis; None if not recoverable
    poa: float
    rho_star: float
    nu_star: float
    sigma_star: np.ndarray
    tau_available: bool


def pair_from_rule(c_vals, rule: OptimalRule, label: str | None = None) -> BasisPair:
    """Assemble the basis pair {C, F_opt} for re-characterization or game building."""
    f = np.concatenate([[0.0], rule.f_opt, [0.0]])
    return BasisPair(rule.n, c_vals, f, label if label is not None else rule.label, rule.side)


def _check_value_column(vals, n: int, name: str) -> np.ndarray:
    v = np.asarray(vals, dtype=float)
    if v.shape != (n + 1,):
        raise ValueError(f"{name} must be tabulated for k=0..{n}, got shape {v.shape}")
    if v[0] != 0.0:
        raise ValueError(f"{name}[0] must be 0")
    if np.any(v < 0):
        raise ValueError(f"{name} values must be nonnegative")
    return v


def _rule_lp(values: np.ndarray, n: int, triplets: TripletSet, sign: float) -> LinearProgram:
    """Constraint matrix over (F_1..F_n, rho); sign +1 builds >= rows, -1 flips them."""
    xyz = triplets.as_array()
    num_vars = n + 1
    coeffs = np.zeros((xyz.shape[0], num_vars))
    rhs = np.empty(xyz.shape[0])
    for i, (x, y, z) in enumerate(xyz):
        if 1 <= x <= n:
            coeffs[i, x - 1] += x - z
        if x + 1 <= n:
            coeffs[i, x] -= y - z  # x = n forces y = z, so F(n+1) never contributes
        coeffs[i, n] = -values[x]
        rhs[i] = -values[y]
    objective = np.zeros(num_vars)
    objective[n] = sign
    return LinearProgram(
        num_vars=num_vars,
        objective=objective,
        row_coeffs=sign * coeffs,
        row_rhs=sign * rhs,
        lower=np.full(num_vars, -np.inf),
        upper=np.full(num_vars, np.inf),
    )


def optimize_cost_rule(c_vals, n: int, *, normalize: bool = False, label: str = "",
                       triplet_set: TripletSet | None = None,
                       tol: SolverTolerances = DEFAULT_TOLERANCES) -> OptimalRule:
    """Optimal cost generating function for the resource cost column ``c_vals`` (k=0..n).

    ``normalize`` rescales the returned F so that F(1) = C(1) when C(1) > 0,
    which makes the implied incentive tau = F - c human-readable; the PoA is
    unaffected.
    """
    values = _check_value_column(c_vals, n, "C")
    if not np.any(values > 0):
        return OptimalRule(np.zeros(n), 1.0, 1.0, n, Side.COST_MIN, label, degenerate=True)
    triplets = triplet_set if triplet_set is not None else enumerate_reduced(n)
    sol = solve(_rule_lp(values, n, triplets, +1.0), tol)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(f"rule-optimization LP reported {sol.status.value}")
    f_opt = np.array(sol.values[:n])
    rho = float(sol.values[n])
    if normalize and values[1] > 0 and f_opt[0] > 0:
        f_opt = f_opt * (values[1] / f_opt[0])
    poa = 1.0 / rho if rho > tol.activity else math.inf
    return OptimalRule(f_opt, rho, poa, n, Side.COST_MIN, label)


def optimize_welfare_rule(w_vals, n: int, *, label: str = "",
                          triplet_set: TripletSet | None = None,
                          tol: SolverTolerances = DEFAULT_TOLERANCES) -> OptimalRule:
    """Optimal utility generating function for the welfare column ``w_vals`` (k=0..n)."""
    values = _check_value_column(w_vals, n, "W")
    if np.any(np.diff(values) < 0):
        raise ValueError("welfare values must be nondecreasing")
    if not np.any(values > 0):
        return OptimalRule(np.zeros(n), 1.0, 1.0, n, Side.WELFARE_MAX, label, degenerate=True)
    triplets = triplet_set if triplet_set is not None else enumerate_reduced(n)
    sol = solve(_rule_lp(values, n, triplets, -1.0), tol)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailureError(f"welfare rule-optimization LP reported {sol.status.value}")
    f_opt = np.array(sol.values[:n])
    rho = float(-sol.objective_value)
    return OptimalRule(f_opt, rho, rho, n, Side.WELFARE_MAX, label)


def class_poa_from_rules(rules: list[OptimalRule]) -> float:
    """Class PoA of optimized rules: the worst per-basis PoA.

    For optimized rules this equals the characterization of the assembled
    class (the decoupling property); for arbitrary rules the class value can
    be strictly larger.
    """
    if not rules:
        raise ValueError("need at least one rule")
    n, side = rules[0].n, rules[0].side
    if any(r.n != n or r.side is not side for r in rules):
        raise ValueError("all rules must share n and side")
    return max(r.poa_j for r in rules)


def optimize_fixed_incentive(c_bases, n: int, *, zero_incentives: bool = False,
                             triplet_set: TripletSet | None = None,
                             tol: SolverTolerances = DEFAULT_TOLERANCES) -> FixedIncentiveResult:
    """Optimal load-independent incentives tau^j for congestion columns ``c_bases``.

    ``c_bases`` holds the congestion values c^j(k), k=1..n, one vector per
    basis.  Substituting F^j(k) = c^j(k) + tau^j and sigma^j = nu*tau^j gives
    a joint LP over (nu, rho, sigma^1..sigma^m).  The incentives are
    recovered as tau^j = sigma^j / nu; when the optimal vertex has nu* ~ 0 the
    program is re-solved with nu bounded away from zero, and if that changes
    the optimum the scale-free incentive is reported as unavailable.

    ``zero_incentives`` pins every sigma^j at 0, which reduces the program to
    the plain characterization of the unincentivized congestion class (a
    substitution identity useful for cross-checks).
    """
    cols = []
    for cv in c_bases:
        arr = np.asarray(cv, dtype=float)
        if arr.shape != (n,):
            raise ValueError(f"each congestion vector must have length n={n}")
        if np.any(arr < 0):
            raise ValueError("congestion values must be nonnegative")
        cols.append(np.concatenate([[0.0], arr]))
    if not cols:
        raise ValueError("need at least one congestion vector")
    m = len(cols)
    triplets = triplet_set if triplet_set is not None else enumerate_reduced(n)
    xyz = triplets.as_array()
    X, Y, Z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    num_vars = 2 + m
    blocks, rhs_parts = [], []
    for j, cv in enumerate(cols):
        C = np.arange(n + 1, dtype=float) * cv
        cv_next = np.concatenate([cv, [0.0]])  # c(n+1) never contributes: x = n forces y = z
        block = np.zeros((xyz.shape[0], num_vars))
        block[:, 0] = (X - Z) * cv[X] - (Y - Z) * cv_next[X + 1]
        block[:, 1] = -C[X]
        block[:, 2 + j] = (X - Z) - (Y - Z)
        blocks.append(block)
        rhs_parts.append(-C[Y])
    objective = np.zeros(num_vars)
    objective[1] = 1.0

    def _solve(nu_lower: float):
        lower = np.full(num_vars, -np.inf)
        upper = np.full(num_vars, np.inf)
        lower[0] = nu_lower
        if zero_incentives:
            lower[2:] = 0.0
            upper[2:] = 0.0
        lp = LinearProgram(num_vars=num_vars, objective=objective,
                           row_coeffs=np.concatenate(blocks),
                           row_rhs=np.concatenate(rhs_parts),
                           lower=lower, upper=upper)
        sol = solve(lp, tol)
        if sol.status is not LpStatus.OPTIMAL:
            raise SolverFailureError(f"fixed-incentive LP reported {sol.status.value}")
        return sol

    sol = _solve(0.0)
    nu_star, rho_star = float(sol.values[0]), float(sol.values[1])
    sigma_star = np.array(sol.values[2:])
    poa = 1.0 / rho_star if rho_star > tol.activity else math.inf
    if nu_star >= 1e-7:
        return FixedIncentiveResult(sigma_star / nu_star, poa, rho_star, nu_star,
                                    sigma_star, tau_available=True)
    retry = _solve(1e-6)
    if abs(float(retry.values[1]) - rho_star) <= 10 * tol.feasibility * max(1.0, abs(rho_star)):
        nu2 = float(retry.values[0])
        sigma2 = np.array(retry.values[2:])
        return FixedIncentiveResult(sigma2 / nu2, poa, rho_star, nu2, sigma2,
                                    tau_available=True)
    return FixedIncentiveResult(None, poa, rho_star, nu_star, sigma_star,
                                tau_available=False)
