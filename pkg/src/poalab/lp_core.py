"""Dense linear programs in inequality form and the two solution paths.

Programs are stated in maximize orientation with rows ``coeffs . x >= rhs``
plus per-variable bounds.  :func:`solve` runs a simplex method (vertex
solutions, explicit Unbounded/Infeasible statuses) via SciPy's HiGHS backend;
:func:`solve_two_var_geometric` is an independent implementation for the
two-variable programs that dominate parameter sweeps, computed as the maximum
of the upper envelope of the constraint halfplanes.  The two paths cross-check
each other in the test suite.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, linprog


class SolverFailureError(RuntimeError):
    """Numerical breakdown inside a solve; never a silent wrong answer."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverTolerances:
    feasibility: float = 1e-9
    activity: float = 1e-7


DEFAULT_TOLERANCES = SolverTolerances()


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  s.t.  row_coeffs @ x >= row_rhs, lower <= x <= upper.

    ``row_tags`` carries opaque labels (one per row) used by callers to map
    active rows back to their origin; it never affects the solve.
    """

    num_vars: int
    objective: np.ndarray
    row_coeffs: np.ndarray
    row_rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    row_tags: tuple = ()

    def __post_init__(self) -> None:
        obj = np.asarray(self.objective, dtype=float)
        coeffs = np.asarray(self.row_coeffs, dtype=float).reshape(-1, self.num_vars)
        rhs = np.asarray(self.row_rhs, dtype=float).ravel()
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if obj.shape != (self.num_vars,):
            raise ValueError("objective length must equal num_vars")
        if rhs.shape[0] != coeffs.shape[0]:
            raise ValueError("row_rhs length must match number of rows")
        if lo.shape != (self.num_vars,) or hi.shape != (self.num_vars,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        if self.row_tags and len(self.row_tags) != coeffs.shape[0]:
            raise ValueError("row_tags length must match number of rows")
        for name, arr in (("objective", obj), ("row_coeffs", coeffs),
                          ("row_rhs", rhs), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_rows(self) -> int:
        return self.row_coeffs.shape[0]


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: np.ndarray
    objective_value: float
    active_rows: frozenset[int]


def _row_scales(lp: LinearProgram) -> np.ndarray:
    # residuals are compared at the scale of each row's data, so the activity
    # tolerance keeps meaning when coefficients span many orders of magnitude
    if lp.num_rows == 0:
        return np.empty(0)
    return np.maximum(1.0, np.maximum(np.abs(lp.row_coeffs).max(axis=1), np.abs(lp.row_rhs)))


def active_row_set(lp: LinearProgram, x: np.ndarray, tol: SolverTolerances) -> frozenset[int]:
    if lp.num_rows == 0:
        return frozenset()
    residuals = lp.row_coeffs @ x - lp.row_rhs
    return frozenset(np.flatnonzero(residuals <= tol.activity * _row_scales(lp)).tolist())


def count_active_constraints(lp: LinearProgram, sol: LpSolution,
                             tol: SolverTolerances = DEFAULT_TOLERANCES) -> int:
    """Active rows plus active variable bounds at a solution (vertex check)."""
    count = len(sol.active_rows)
    for i in range(lp.num_vars):
        scale = max(1.0, abs(sol.values[i]))
        if np.isfinite(lp.lower[i]) and sol.values[i] - lp.lower[i] <= tol.activity * scale:
            count += 1
        if np.isfinite(lp.upper[i]) and lp.upper[i] - sol.values[i] <= tol.activity * scale:
            count += 1
    return count


def solve(lp: LinearProgram, tol: SolverTolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Simplex solve returning a vertex solution or an Unbounded/Infeasible status."""
    bounds = [(lp.lower[i] if np.isfinite(lp.lower[i]) else None,
               lp.upper[i] if np.isfinite(lp.upper[i]) else None)
              for i in range(lp.num_vars)]
    kwargs = {}
    if lp.num_rows > 0:
        kwargs["A_ub"] = -lp.row_coeffs
        kwargs["b_ub"] = -lp.row_rhs
    # HiGHS rejects feasibility tolerances below 1e-10
    feas = max(tol.feasibility, 1e-10)
    with warnings.catch_warnings():
        # the iteration cap is a HiGHS pass-through option scipy does not list
        warnings.simplefilter("ignore", OptimizeWarning)
        res = linprog(
            c=-lp.objective,
            bounds=bounds,
            method="highs-ds",
            options={
                "primal_feasibility_tolerance": feas,
                "dual_feasibility_tolerance": feas,
                "simplex_iteration_limit": max(10_000, 50 * (lp.num_vars + lp.num_rows)),
            },
            **kwargs,
        )
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, np.full(lp.num_vars, np.nan), np.nan, frozenset())
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, np.full(lp.num_vars, np.nan), np.inf, frozenset())
    if res.status != 0:
        raise SolverFailureError(f"simplex backend failed: status={res.status} ({res.message})")
    x = np.asarray(res.x, dtype=float)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), active_row_set(lp, x, tol))


def _lines_and_nu_interval(lp: LinearProgram, tol: SolverTolerances):
    """Rewrite rows of a 2-var program as upper halfplanes rho <= B + S*nu."""
    B, S = [], []
    nu_lo, nu_hi = lp.lower[0], lp.upper[0]
    feasible = True
    for i in range(lp.num_rows):
        a, b = lp.row_coeffs[i]
        r = lp.row_rhs[i]
        if b < 0.0:
            B.append(r / b)
            S.append(-a / b)
        elif b > 0.0:
            raise ValueError("geometric path expects upper halfplanes only "
                             "(negative coefficient on the maximized variable)")
        else:
            if a > 0.0:
                nu_lo = max(nu_lo, r / a)
            elif a < 0.0:
                nu_hi = min(nu_hi, r / a)
            elif r > tol.feasibility:
                feasible = False
    if np.isfinite(lp.upper[1]):
        B.append(lp.upper[1])
        S.append(0.0)
    return np.array(B), np.array(S), nu_lo, nu_hi, feasible


def solve_two_var_geometric(lp: LinearProgram,
                            tol: SolverTolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Exact envelope maximization for 2-variable programs maximizing the second variable.

    The feasible set is the intersection of upper halfplanes in the
    (nu, rho) plane; the objective rho is maximized over the concave upper
    envelope g(nu) = min_i (B_i + S_i nu) on the admissible nu interval.  The
    optimum sits either at an interval endpoint or at the crossing of a
    positive-slope and a nonpositive-slope boundary line, which is solved
    exactly once bisection has isolated it.
    """
    if lp.num_vars != 2:
        raise ValueError("geometric path requires exactly two variables")
    if lp.objective[0] != 0.0 or lp.objective[1] <= 0.0:
        raise ValueError("geometric path requires the objective to maximize the second variable")
    if not np.isfinite(lp.lower[0]):
        raise ValueError("geometric path requires a finite lower bound on the first variable")

    B, S, nu_lo, nu_hi, feasible = _lines_and_nu_interval(lp, tol)
    nan = np.full(2, np.nan)
    if not feasible or nu_lo > nu_hi + tol.feasibility * max(1.0, abs(nu_hi)):
        return LpSolution(LpStatus.INFEASIBLE, nan, np.nan, frozenset())
    if B.size == 0:
        return LpSolution(LpStatus.UNBOUNDED, nan, np.inf, frozenset())

    def g(nu: float) -> float:
        return float(np.min(B + S * nu))

    def right_deriv(nu: float) -> float:
        vals = B + S * nu
        m = vals.min()
        return float(S[vals <= m + 1e-9 * max(1.0, abs(m))].min())

    lo = nu_lo
    hi = nu_hi
    if not np.isfinite(hi):
        hi = max(1.0, lo + 1.0)
        for _ in range(600):
            if right_deriv(hi) <= 0.0:
                break
            hi *= 2.0
        else:
            return LpSolution(LpStatus.UNBOUNDED, nan, np.inf, frozenset())

    if right_deriv(lo) <= 0.0:
        nu_star, rho_star = lo, g(lo)
    elif right_deriv(hi) > 0.0:
        nu_star, rho_star = hi, g(hi)
    else:
        blo, bhi = lo, hi
        for _ in range(120):
            mid = 0.5 * (blo + bhi)
            if right_deriv(mid) > 0.0:
                blo = mid
            else:
                bhi = mid
            if bhi - blo <= 1e-15 * max(1.0, abs(bhi)):
                break

        def binding(nu: float, positive: bool) -> int | None:
            vals = B + S * nu
            m = vals.min()
            near = np.flatnonzero(vals <= m + 1e-9 * max(1.0, abs(m)))
            cands = near[S[near] > 0.0] if positive else near[S[near] <= 0.0]
            if cands.size == 0:
                return None
            pick = np.argmax(S[cands]) if positive else np.argmin(S[cands])
            return int(cands[pick])

        candidates = [(lo, g(lo)), (hi, g(hi)), (blo, g(blo)), (bhi, g(bhi))]
        p = binding(blo, positive=True)
        q = binding(bhi, positive=False)
        if p is not None and q is not None and S[p] != S[q]:
            crossing = (B[q] - B[p]) / (S[p] - S[q])
            crossing = min(max(crossing, lo), hi)
            candidates.append((crossing, g(crossing)))
        nu_star, rho_star = max(candidates, key=lambda c: c[1])

    if rho_star < lp.lower[1] - tol.feasibility * max(1.0, abs(rho_star)):
        return LpSolution(LpStatus.INFEASIBLE, nan, np.nan, frozenset())
    x = np.array([nu_star, rho_star])
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x),
                      active_row_set(lp, x, tol))
