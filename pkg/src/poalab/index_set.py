"""Enumeration of the load-triplet index sets behind the constraint matrices.

A triplet (x, y, z) records, for one resource, the equilibrium load x, the
optimal load y and the overlap z (users selecting the resource in both
allocations).  The admissible set I(n) requires 1 <= x + y - z <= n and
z <= min(x, y); the reduced set IR(n) additionally requires x + y - z = n or
(x - z)(y - z)z = 0 and is sufficient for all the linear programs.  |IR(n)|
grows quadratically in n while |I(n)| is cubic, so the full set is kept for
cross-checks only and capped by default.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

FULL_SET_DEFAULT_CAP = 64


class Triplet(NamedTuple):
    x: int
    y: int
    z: int


@dataclass(frozen=True)
class TripletSet:
    n: int
    triplets: tuple[Triplet, ...]
    reduced: bool

    def __len__(self) -> int:
        return len(self.triplets)

    def as_array(self) -> np.ndarray:
        """Triplets as an (N, 3) integer array in the stored order."""
        return np.array(self.triplets, dtype=np.int64).reshape(-1, 3)


def _enumerate(n: int, reduced: bool) -> TripletSet:
    rows = []
    yy, zz = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    yy = yy.ravel()
    zz = zz.ravel()
    # chunk over x so memory stays O(n^2) for any n
    for x in range(n + 1):
        s = x + yy - zz
        valid = (s >= 1) & (s <= n) & (zz <= np.minimum(x, yy))
        if reduced:
            valid &= (s == n) | ((x - zz) * (yy - zz) * zz == 0)
        rows.append(np.stack([np.full(valid.sum(), x), yy[valid], zz[valid]], axis=1))
    xyz = np.concatenate(rows, axis=0)
    triplets = tuple(Triplet(int(a), int(b), int(c)) for a, b, c in xyz)
    return TripletSet(n=n, triplets=triplets, reduced=reduced)


@functools.lru_cache(maxsize=32)
def enumerate_full(n: int, max_n: int = FULL_SET_DEFAULT_CAP) -> TripletSet:
    """All of I(n), in lexicographic (x, y, z) order.

    Theta(n^3) memory; refuses n beyond ``max_n`` unless the caller raises it.
    Results are cached (the sets are immutable); sweeps re-enumerate nothing.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > max_n:
        raise ValueError(f"full-set enumeration capped at n={max_n} (requested n={n})")
    return _enumerate(n, reduced=False)


@functools.lru_cache(maxsize=64)
def enumerate_reduced(n: int) -> TripletSet:
    """The reduced set IR(n), in lexicographic (x, y, z) order.  Cached."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _enumerate(n, reduced=True)


def write_csv(triplet_set: TripletSet, fh) -> None:
    """Dump a triplet set as CSV rows ``x,y,z`` (header included)."""
    writer = csv.writer(fh)
    writer.writerow(["x", "y", "z"])
    for t in triplet_set.triplets:
        writer.writerow([t.x, t.y, t.z])
