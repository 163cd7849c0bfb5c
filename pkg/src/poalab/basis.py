"""Basis function pairs and constructors for the built-in game families.

A class of games is described by a list of :class:`BasisPair`.  Each pair
tabulates a resource value function ``c`` (system cost ``C(k)`` on the cost
side, resource welfare ``W(k)`` on the welfare side) over loads ``k = 0..n``
and a generating function ``f`` (``F(k)``) over ``k = 0..n+1``.  The boundary
zeros ``c[0] = f[0] = f[n+1] = 0`` are stored explicitly so the constraint
builders never branch on index bounds.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .rng import Xoshiro256StarStar


class Side(enum.Enum):
    """Orientation of a game class: minimize system cost or maximize welfare."""

    COST_MIN = "cost"
    WELFARE_MAX = "welfare"


def _as_readonly(values, length: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ValueError(f"{name} must be a vector of length {length}, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BasisPair:
    """One tabulated (resource value, generating function) pair.

    Immutable after construction; instances can be shared freely across
    threads and processes.
    """

    n: int
    c: np.ndarray
    f: np.ndarray
    label: str = ""
    side: Side = Side.COST_MIN

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        object.__setattr__(self, "c", _as_readonly(self.c, self.n + 1, "c"))
        object.__setattr__(self, "f", _as_readonly(self.f, self.n + 2, "f"))
        if self.c[0] != 0.0:
            raise ValueError("c[0] must be 0")
        if self.f[0] != 0.0 or self.f[self.n + 1] != 0.0:
            raise ValueError("f[0] and f[n+1] must be 0")
        if np.any(self.c < 0.0):
            raise ValueError("resource values c[k] must be nonnegative")
        if self.side is Side.WELFARE_MAX and np.any(self.f < 0.0):
            raise ValueError("welfare-side generating values f[k] must be nonnegative")

    def scaled(self, gamma: float, label: str | None = None) -> "BasisPair":
        """Return the pair with both columns multiplied by ``gamma > 0``."""
        if gamma <= 0:
            raise ValueError("scale factor must be positive")
        return BasisPair(self.n, gamma * self.c, gamma * self.f,
                         label if label is not None else self.label, self.side)


def _pad_f(f_vals: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], f_vals, [0.0]])


def _check_cvals(c_vals, n: int) -> np.ndarray:
    cv = np.asarray(c_vals, dtype=float)
    if cv.shape != (n,):
        raise ValueError(f"expected {n} congestion values for k=1..{n}, got shape {cv.shape}")
    if np.any(cv < 0):
        raise ValueError("congestion values must be nonnegative")
    return cv


def from_congestion(c_vals, n: int, label: str = "congestion") -> BasisPair:
    """Classical congestion pair: C(k) = k*c(k), F(k) = c(k).

    Users' costs sum to the system cost here (C(k) = k*F(k)), so smoothness
    and generalized smoothness coincide for classes built from these pairs.
    """
    cv = _check_cvals(c_vals, n)
    k = np.arange(n + 1, dtype=float)
    c = k * np.concatenate([[0.0], cv])
    return BasisPair(n, c, _pad_f(cv), label, Side.COST_MIN)


def from_incentivized(c_vals, tau_vals, n: int, label: str = "incentivized") -> BasisPair:
    """Congestion pair with incentives: C(k) = k*c(k), F(k) = c(k) + tau(k).

    ``tau`` may take either sign (taxes or rebates).
    """
    cv = _check_cvals(c_vals, n)
    tau = np.asarray(tau_vals, dtype=float)
    if tau.shape != cv.shape:
        raise ValueError("tau_vals must have the same length as c_vals")
    k = np.arange(n + 1, dtype=float)
    c = k * np.concatenate([[0.0], cv])
    return BasisPair(n, c, _pad_f(cv + tau), label, Side.COST_MIN)


def marginal_cost_pair(c_vals, n: int, label: str = "marginal-cost") -> BasisPair:
    """Congestion pair under marginal-cost incentives.

    The toll tau(k) = (k-1)*[c(k) - c(k-1)] charges each user its externality,
    giving F(k) = k*c(k) - (k-1)*c(k-1) with c(0) taken as 0.
    """
    cv = _check_cvals(c_vals, n)
    ext = np.concatenate([[0.0], cv])  # c(0) = 0
    k = np.arange(1, n + 1, dtype=float)
    f_vals = k * ext[1:] - (k - 1) * ext[:-1]
    c = np.arange(n + 1, dtype=float) * ext
    return BasisPair(n, c, _pad_f(f_vals), label, Side.COST_MIN)


def polynomial_basis(d: int, n: int) -> list[BasisPair]:
    """Monomial pairs {C(k)=k^j, F(k)=k^(j-1)} for j = 1..d+1.

    Nonnegative combinations of these generate every polynomial congestion
    game of degree at most d.
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    pairs = []
    for j in range(1, d + 2):
        cv = np.arange(1, n + 1, dtype=float) ** (j - 1)
        pairs.append(from_congestion(cv, n, label=f"poly-j{j}"))
    return pairs


def polynomial_marginal_cost_basis(d: int, n: int) -> list[BasisPair]:
    """Monomial congestion functions c(k)=k^j, j=0..d, under marginal-cost tolls."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    pairs = []
    for j in range(d + 1):
        cv = np.arange(1, n + 1, dtype=float) ** j
        pairs.append(marginal_cost_pair(cv, n, label=f"poly-mc-j{j}"))
    return pairs


def bpr_pair(T: float, K: int, n: int, label: str | None = None) -> BasisPair:
    """Bureau of Public Roads latency c(x) = T*[1 + 0.15*(x/K)^4] as a congestion pair."""
    if T < 0:
        raise ValueError("free-flow time T must be nonnegative")
    if K < 1:
        raise ValueError("capacity K must be a positive integer")
    x = np.arange(1, n + 1, dtype=float)
    cv = T * (1.0 + 0.15 * (x / K) ** 4)
    return from_congestion(cv, n, label=label or f"bpr-T{T:g}-K{K}")


def bpr_basis(k_max: int, n: int, T: float = 1.0) -> list[BasisPair]:
    """One BPR pair per capacity K = 1..k_max; within-pair scaling is immaterial to the PoA."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    return [bpr_pair(T, K, n) for K in range(1, k_max + 1)]


def perception_pair(a: float, b: float, sigma: float, gamma: float, n: int,
                    label: str | None = None) -> BasisPair:
    """Perception-parameterized pair for the affine latency c(x) = a*x + b.

    The system perceives load through sigma, users through gamma:
    C(k) = k*c(1 + sigma*(k-1)), F(k) = c(1 + gamma*(k-1)).  With
    sigma = gamma = 1 this is the classical congestion pair for a*k + b.
    """
    if min(a, b, sigma, gamma) < 0:
        raise ValueError("all perception parameters must be nonnegative")
    k = np.arange(1, n + 1, dtype=float)
    c_vals = k * (a * (1.0 + sigma * (k - 1)) + b)
    f_vals = a * (1.0 + gamma * (k - 1)) + b
    c = np.concatenate([[0.0], c_vals])
    return BasisPair(n, c, _pad_f(f_vals),
                     label or f"perception-a{a:g}-b{b:g}-s{sigma:g}-g{gamma:g}",
                     Side.COST_MIN)


def perception_affine_basis(sigma: float, gamma: float, n: int) -> list[BasisPair]:
    """The two pairs generating all affine perception-parameterized games."""
    return [perception_pair(1.0, 0.0, sigma, gamma, n, label=f"perception-a-s{sigma:g}-g{gamma:g}"),
            perception_pair(0.0, 1.0, sigma, gamma, n, label=f"perception-b-s{sigma:g}-g{gamma:g}")]


def marginal_contribution_welfare(w_vals, n: int, label: str = "marginal-contribution",
                                  require_nondecreasing: bool = False) -> BasisPair:
    """Welfare pair with marginal-contribution utilities: F(k) = W(k) - W(k-1).

    Equilibrium-equivalent to the identical-interest design U_i = W, so this
    pair evaluates that design's price of anarchy.  ``w_vals`` is the welfare
    table W(0..n) with W(0) = 0.
    """
    w = np.asarray(w_vals, dtype=float)
    if w.shape != (n + 1,):
        raise ValueError(f"expected welfare values W(0..{n}), got shape {w.shape}")
    if w[0] != 0.0:
        raise ValueError("W(0) must be 0")
    diffs = np.diff(w)
    if require_nondecreasing and np.any(diffs < 0):
        raise ValueError("welfare values must be nondecreasing")
    return BasisPair(n, w, _pad_f(diffs), label, Side.WELFARE_MAX)


def random_concave_welfare(n_vals: int, seed: int) -> np.ndarray:
    """Random nondecreasing concave welfare table W(0..n_vals).

    Draws ``n_vals`` uniforms on [0, 1], sorts them in decreasing order and
    sets W(k) to the sum of the first k; the sorted-sum construction forces
    both monotonicity and concavity.  Deterministic in ``seed``.
    """
    if n_vals < 1:
        raise ValueError("n_vals must be at least 1")
    rng = Xoshiro256StarStar(seed)
    draws = sorted((rng.random() for _ in range(n_vals)), reverse=True)
    return np.concatenate([[0.0], np.cumsum(draws)])


def save_basis_class(pairs: list[BasisPair], path) -> None:
    """Write a basis class as JSON (schema: n, side, pairs[{label, c, f}])."""
    if not pairs:
        raise ValueError("cannot save an empty basis class")
    n = pairs[0].n
    side = pairs[0].side
    if any(p.n != n or p.side is not side for p in pairs):
        raise ValueError("all pairs in a class must share n and side")
    doc = {
        "n": n,
        "side": side.value,
        "pairs": [{"label": p.label, "c": [float(v) for v in p.c],
                   "f": [float(v) for v in p.f]} for p in pairs],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_basis_class(path) -> list[BasisPair]:
    """Load a basis class from the JSON schema written by :func:`save_basis_class`."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        n = int(doc["n"])
        side = Side(doc["side"])
        raw_pairs = doc["pairs"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"malformed basis class document: {exc}") from exc
    if not raw_pairs:
        raise ValueError("basis class document contains no pairs")
    pairs = []
    for entry in raw_pairs:
        pairs.append(BasisPair(n, entry["c"], entry["f"],
                               label=str(entry.get("label", "")), side=side))
    return pairs
