"""Subsample selection: sequential greedy IES, uniform random, and a
simplified LowCon baseline (maximin LHS reference design + nearest neighbor).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .criterion import coincidence_counts, membership
from .data import ScaledView, SeededRng


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class Subsample:
    indices: np.ndarray  # selection order; distinct for ies/rand
    q_used: Optional[int]
    method: str
    rng: SeededRng
    audit_enabled: bool = False

    @property
    def size(self) -> int:
        return self.indices.shape[0]


def ies_select(d: ScaledView, n: int, q: int, rng: SeededRng) -> Subsample:
    """Greedy sequential selection minimizing the coincidence score l.

    The first row is uniform over all N rows; each later pick draws uniformly
    from the argmin set of current l scores among unselected rows, then the
    scores are updated incrementally with the squared coincidence against the
    new row (O(Np) per pick).
    """
    N = d.n_rows
    if not 1 <= n <= N:
        raise SamplerError(f"subsample size n={n} must satisfy 1 <= n <= N={N}")
    if q < 2:
        raise SamplerError(f"resolution q={q} must be >= 2")
    Z = membership(d.scaled, q)
    gen = rng.generator()
    scores = np.zeros(N, dtype=np.int64)
    selected = np.zeros(N, dtype=bool)
    order = np.empty(n, dtype=np.int64)

    first = int(gen.integers(N))
    order[0] = first
    selected[first] = True
    scores += coincidence_counts(Z, Z[first]) ** 2

    big = np.iinfo(np.int64).max
    for k in range(1, n):
        masked = np.where(selected, big, scores)
        lo = masked.min()
        ties = np.flatnonzero(masked == lo)
        pick = int(ties[gen.integers(ties.size)])
        order[k] = pick
        selected[pick] = True
        scores += coincidence_counts(Z, Z[pick]) ** 2
    order.setflags(write=False)
    return Subsample(indices=order, q_used=q, method="ies", rng=rng, audit_enabled=True)


def random_select(N: int, n: int, rng: SeededRng) -> Subsample:
    """Simple random sample without replacement, uniform over subsets."""
    if n > N:
        raise SamplerError(f"subsample size n={n} exceeds N={N}")
    gen = rng.generator()
    idx = gen.choice(N, size=n, replace=False)
    idx.setflags(write=False)
    return Subsample(indices=idx, q_used=None, method="rand", rng=rng)


def maximin_lhs(n: int, p: int, gen: np.random.Generator, budget: int = 1000) -> np.ndarray:
    """Random-search maximin Latin hypercube: among `budget` jittered LHS
    candidates, keep the one with the largest minimum pairwise distance."""
    best = None
    best_score = -np.inf
    for _ in range(budget):
        cand = np.empty((n, p))
        for j in range(p):
            cand[:, j] = (gen.permutation(n) + gen.random(n)) / n
        if n == 1:
            return cand
        dmin = np.inf
        for i in range(n - 1):
            dd = np.sum((cand[i + 1:] - cand[i]) ** 2, axis=1).min()
            if dd < dmin:
                dmin = dd
            if dmin <= best_score:
                break
        if dmin > best_score:
            best_score = dmin
            best = cand
    return best


def lowcon_select(d: ScaledView, n: int, rng: SeededRng, budget: int = 1000) -> Subsample:
    """Simplified LowCon: map each point of a maximin-LHS reference design to
    its Euclidean nearest dataset row. Duplicate indices are permitted."""
    N = d.n_rows
    if n > N:
        raise SamplerError(f"subsample size n={n} exceeds N={N}")
    gen = rng.generator()
    design = maximin_lhs(n, d.n_cols, gen, budget=budget)
    tree = cKDTree(d.scaled)
    _, idx = tree.query(design)
    idx = np.asarray(idx, dtype=np.int64)
    idx.setflags(write=False)
    return Subsample(indices=idx, q_used=None, method="lowcon", rng=rng)


def select(d: ScaledView, n: int, q: int, method: str, rng: SeededRng) -> Subsample:
    if method == "ies":
        return ies_select(d, n, q, rng)
    if method == "rand":
        return random_select(d.n_rows, n, rng)
    if method == "lowcon":
        return lowcon_select(d, n, rng)
    raise SamplerError(f"unknown method {method!r}; expected ies, rand, or lowcon")


def audit_scores(s: Subsample, d: ScaledView) -> bool:
    """Recompute l from scratch at every step and confirm each recorded pick
    was in the argmin set among unselected rows at its selection time."""
    if not s.audit_enabled or s.method != "ies":
        raise SamplerError(f"audit requires an ies selection with audit trail, got {s.method!r}")
    Z = membership(d.scaled, s.q_used)
    N = d.n_rows
    selected = np.zeros(N, dtype=bool)
    selected[s.indices[0]] = True
    for k in range(1, s.size):
        chosen = int(s.indices[k])
        prior = s.indices[:k]
        scores = np.zeros(N, dtype=np.int64)
        for i in prior:
            scores += coincidence_counts(Z, Z[int(i)]) ** 2
        masked = np.where(selected, np.iinfo(np.int64).max, scores)
        if selected[chosen] or masked[chosen] != masked.min():
            return False
        selected[chosen] = True
    return True
