"""Membership matrices, pairwise coincidence counts, and the similarity
criterion L with its exact-OA and weak-strength lower bounds.

L sums squared coincidence counts over all row pairs; it is minimized
exactly when the membership matrix forms an orthogonal array, which is what
the subsampler exploits. Bounds are kept in exact rational arithmetic so
the equality condition is a real iff, not a float comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np


class CriterionError(ValueError):
    pass


def membership(x: np.ndarray, q: int) -> np.ndarray:
    """Cell indices floor(x*q) for scaled coordinates, with 1.0 clamped to q-1.

    Accepts a vector or an (n, p) matrix; every coordinate must lie in [0,1].
    """
    x = np.asarray(x, dtype=float)
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        bad = np.argwhere((x < 0.0) | (x > 1.0))[0]
        raise CriterionError(f"coordinate outside [0,1] at index {tuple(bad)}")
    z = np.floor(x * q).astype(np.int64)
    return np.minimum(z, q - 1)


def delta(z: np.ndarray, z2: np.ndarray) -> int:
    """Number of coordinates where two cell vectors coincide."""
    z = np.asarray(z)
    z2 = np.asarray(z2)
    if z.shape != z2.shape:
        raise CriterionError(f"length mismatch: {z.shape} vs {z2.shape}")
    return int(np.sum(z == z2))


def h_func(a: int, b: int) -> int:
    """floor(a/b)^2 * b + (2*floor(a/b)+1) * (a - floor(a/b)*b)."""
    if a < 0 or b < 1:
        raise CriterionError(f"h requires a >= 0, b >= 1, got ({a}, {b})")
    f = a // b
    return f * f * b + (2 * f + 1) * (a - f * b)


def lower_bound_exact(n: int, p: int, q: int) -> Fraction:
    """n/(2q^2) * [n*p*(p+q-1) - (pq)^2]; requires q^2 | n."""
    if n % (q * q) != 0:
        raise CriterionError(
            f"exact bound needs n divisible by q^2 (n={n}, q^2={q * q}); use lower_bound_weak"
        )
    return Fraction(n, 2 * q * q) * (n * p * (p + q - 1) - (p * q) ** 2)


def lower_bound_weak(n: int, p: int, q: int) -> Fraction:
    """[p(p-1)*h(n,q^2) + p*h(n,q) - n*p^2] / 2, valid for every n."""
    return Fraction(p * (p - 1) * h_func(n, q * q) + p * h_func(n, q) - n * p * p, 2)


@dataclass(frozen=True)
class CriterionValue:
    L: int
    n: int
    p: int
    q: int
    lower_bound: Fraction  # weak-strength bound, valid for every n
    gap: Fraction
    lower_bound_exact: Optional[Fraction] = None  # present when q^2 | n

    def as_dict(self) -> dict:
        return {
            "L": self.L,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "lower_bound_weak": float(self.lower_bound),
            "lower_bound_exact": (
                None if self.lower_bound_exact is None else float(self.lower_bound_exact)
            ),
            "gap": float(self.gap),
        }


def criterion_l_value(cells: np.ndarray, q: int) -> int:
    """L as a plain integer: sum over unordered row pairs of delta^2.

    Computed in O(n p^2) via joint level counts: delta^2 expands to a sum of
    per-column-pair agreement indicators, so summing C(count, 2) over joint
    cells of every ordered column pair (including j == k) gives L.
    """
    cells = np.asarray(cells, dtype=np.int64)
    n, p = cells.shape
    total = 0
    for j in range(p):
        for k in range(p):
            if j == k:
                counts = np.bincount(cells[:, j], minlength=q)
            else:
                counts = np.bincount(cells[:, j] * q + cells[:, k], minlength=q * q)
            total += int(np.sum(counts * (counts - 1) // 2))
    return total


def criterion_l(cells: np.ndarray, q: int) -> CriterionValue:
    cells = np.asarray(cells, dtype=np.int64)
    if cells.ndim != 2 or cells.shape[0] < 1:
        raise CriterionError(f"membership matrix must be 2-D with n >= 1, got {cells.shape}")
    if cells.size and (cells.min() < 0 or cells.max() >= q):
        raise CriterionError(f"cell indices must lie in 0..{q - 1}")
    n, p = cells.shape
    L = criterion_l_value(cells, q)
    weak = lower_bound_weak(n, p, q)
    exact = lower_bound_exact(n, p, q) if n % (q * q) == 0 else None
    return CriterionValue(
        L=L, n=n, p=p, q=q, lower_bound=weak, gap=Fraction(L) - weak, lower_bound_exact=exact
    )


def coincidence_counts(cells: np.ndarray, row: np.ndarray) -> np.ndarray:
    """delta(z_i, row) for every row z_i of a membership matrix (vectorized)."""
    return np.sum(np.asarray(cells) == np.asarray(row)[None, :], axis=1)
