"""Orthogonal arrays over prime-power Galois fields.

Strength-2 arrays with n = lambda*q^2 rows and up to q+1 columns are built
from GF(q) arithmetic; jittering each cell uniformly yields points on
[0,1)^p whose columns are marginally uniform and pairwise independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import SeededRng

# Monic irreducible polynomials, coefficients low degree -> high, leading 1
# included. Fixed per q so constructed arrays are bit-reproducible.
_IRREDUCIBLE: dict[int, tuple[int, tuple[int, ...]]] = {
    4: (2, (1, 1, 1)),          # x^2 + x + 1
    8: (2, (1, 1, 0, 1)),       # x^3 + x + 1
    16: (2, (1, 1, 0, 0, 1)),   # x^4 + x + 1
    32: (2, (1, 0, 1, 0, 0, 1)),  # x^5 + x^2 + 1
    9: (3, (2, 2, 1)),          # x^2 + 2x + 2
    27: (3, (1, 2, 0, 1)),      # x^3 + 2x + 1
    25: (5, (2, 4, 1)),         # x^2 + 4x + 2
}

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31)

SUPPORTED_Q = tuple(sorted(set(_PRIMES) | set(_IRREDUCIBLE)))


class OaError(ValueError):
    pass


def _poly_mul_mod(a: list[int], b: list[int], modulus: tuple[int, ...], p: int) -> list[int]:
    """Multiply coefficient vectors over GF(p)[x] and reduce by the modulus."""
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    k = len(modulus) - 1
    # reduce: x^k = -(modulus minus leading term)
    for deg in range(len(prod) - 1, k - 1, -1):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for j in range(k):
                prod[deg - k + j] = (prod[deg - k + j] - c * modulus[j]) % p
    out = prod[:k]
    out += [0] * (k - len(out))
    return out


def _poly_divides(div: list[int], poly: list[int], p: int) -> bool:
    """True if monic `div` divides `poly` over GF(p)[x]."""
    rem = list(poly)
    dd = len(div) - 1
    while len(rem) - 1 >= dd and any(rem):
        while rem and rem[-1] == 0:
            rem.pop()
        if len(rem) - 1 < dd:
            break
        c = rem[-1]
        shift = len(rem) - 1 - dd
        for j in range(len(div)):
            rem[shift + j] = (rem[shift + j] - c * div[j]) % p
    return not any(rem)


def _check_irreducible(poly: tuple[int, ...], p: int) -> bool:
    k = len(poly) - 1
    if k < 1 or poly[-1] != 1:
        return False
    # exhaustive trial division by all monic polynomials of degree 1..k-1
    for d in range(1, k):
        for code in range(p**d):
            div = [(code // p**i) % p for i in range(d)] + [1]
            if _poly_divides(div, list(poly), p):
                return False
    return True


@dataclass(frozen=True)
class GaloisField:
    """GF(q) with elements encoded as integers 0..q-1 (base-p digit vectors)."""

    q: int
    char: int
    degree: int
    poly: tuple[int, ...]  # irreducible modulus, () for prime fields
    add: np.ndarray  # (q, q)
    mul: np.ndarray  # (q, q)

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return int(np.flatnonzero(self.mul[a] == 1)[0])


def _verify_axioms(add: np.ndarray, mul: np.ndarray, q: int) -> None:
    idx = np.arange(q)
    if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
        raise OaError("field tables not commutative")
    if not np.array_equal(add[0], idx) or not np.array_equal(mul[1], idx):
        raise OaError("identity axioms fail")
    if np.any(mul[0] != 0):
        raise OaError("0 * a != 0")
    # every row of the addition table and every nonzero row of the
    # multiplication table must be a permutation (gives inverses)
    for a in range(q):
        if not np.array_equal(np.sort(add[a]), idx):
            raise OaError(f"addition row {a} not a permutation")
        if a > 0 and not np.array_equal(np.sort(mul[a]), idx):
            raise OaError(f"multiplication row {a} not a permutation")
    # associativity and distributivity, exhaustive over q^3 triples
    a = idx[:, None, None]
    b = idx[None, :, None]
    c = idx[None, None, :]
    if not np.array_equal(add[add[a, b], c], add[a, add[b, c]]):
        raise OaError("addition not associative")
    if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
        raise OaError("multiplication not associative")
    if not np.array_equal(mul[a, add[b, c]], add[mul[a, b], mul[a, c]]):
        raise OaError("distributivity fails")


def gf_new(q: int) -> GaloisField:
    """Build GF(q) for a supported prime power q, with exhaustive axiom audit."""
    if q in _PRIMES:
        idx = np.arange(q)
        add = (idx[:, None] + idx[None, :]) % q
        mul = (idx[:, None] * idx[None, :]) % q
        _verify_axioms(add, mul, q)
        return GaloisField(q=q, char=q, degree=1, poly=(), add=add, mul=mul)
    if q not in _IRREDUCIBLE:
        below = max((s for s in SUPPORTED_Q if s < q), default=None)
        above = min((s for s in SUPPORTED_Q if s > q), default=None)
        raise OaError(
            f"q={q} is not a supported prime power; nearest supported values: "
            f"{below} and {above}"
        )
    p, poly = _IRREDUCIBLE[q]
    k = len(poly) - 1
    if not _check_irreducible(poly, p):
        raise OaError(f"internal: modulus for q={q} is reducible")
    digits = [[(e // p**i) % p for i in range(k)] for e in range(q)]
    add = np.zeros((q, q), dtype=np.int64)
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(a, q):
            s = [(x + y) % p for x, y in zip(digits[a], digits[b])]
            m = _poly_mul_mod(digits[a], digits[b], poly, p)
            add[a, b] = add[b, a] = sum(c * p**i for i, c in enumerate(s))
            mul[a, b] = mul[b, a] = sum(c * p**i for i, c in enumerate(m))
    _verify_axioms(add, mul, q)
    return GaloisField(q=q, char=p, degree=k, poly=poly, add=add, mul=mul)


@dataclass(frozen=True)
class OrthogonalArray:
    levels: np.ndarray  # (n, p) ints in {0..q-1}
    q: int
    claimed_strength: int = 2

    @property
    def n_rows(self) -> int:
        return self.levels.shape[0]

    @property
    def n_cols(self) -> int:
        return self.levels.shape[1]


@dataclass(frozen=True)
class StrengthReport:
    passed: bool
    count: Optional[int] = None  # pairs-per-cell when passed (strength 2)
    violating_columns: Optional[tuple[int, ...]] = None
    violating_levels: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.passed


def construct_oa(q: int, p: int, lam: int = 1) -> OrthogonalArray:
    """OA(lam*q^2, p, q, 2) for prime-power q and p <= q+1.

    Rows are indexed by (a, b) in GF(q)^2, lexicographic; columns are
    [a, a*0+b, a*1+b, ..., a*(q-1)+b], truncated to p and stacked lam times.
    """
    if lam < 1:
        raise OaError(f"lambda must be >= 1, got {lam}")
    if p < 1:
        raise OaError(f"p must be >= 1, got {p}")
    gf = gf_new(q)
    if p > q + 1:
        raise OaError(f"p={p} exceeds q+1={q + 1} columns available for q={q}")
    rows = np.empty((q * q, q + 1), dtype=np.int64)
    r = 0
    for a in range(q):
        for b in range(q):
            rows[r, 0] = a
            for c in range(q):
                rows[r, 1 + c] = gf.add[gf.mul[a, c], b]
            r += 1
    block = rows[:, :p]
    levels = np.vstack([block] * lam)
    levels.setflags(write=False)
    return OrthogonalArray(levels=levels, q=q, claimed_strength=2)


def verify_strength(a: OrthogonalArray | np.ndarray, t: int = 2, q: int | None = None) -> StrengthReport:
    """Exact combinatorial check of strength t=2: every ordered level pair
    occurs exactly n/q^2 times in every column pair."""
    if t != 2:
        raise OaError("only strength t=2 verification is supported")
    if isinstance(a, OrthogonalArray):
        levels, q = a.levels, a.q
    else:
        levels = np.asarray(a)
        if q is None:
            raise OaError("q required when passing a raw matrix")
    n, p = levels.shape
    if n % (q * q) != 0:
        return StrengthReport(passed=False, violating_columns=None, violating_levels=None)
    expect = n // (q * q)
    for j in range(p):
        for k in range(j + 1, p):
            counts = np.bincount(levels[:, j] * q + levels[:, k], minlength=q * q)
            bad = np.flatnonzero(counts != expect)
            if bad.size:
                cell = int(bad[0])
                return StrengthReport(
                    passed=False,
                    violating_columns=(j, k),
                    violating_levels=(cell // q, cell % q),
                )
    return StrengthReport(passed=True, count=expect)


def verify_weak_strength(levels: np.ndarray, t: int, q: int) -> bool:
    """Weak strength t-: occurrence counts of level combinations in any t
    columns differ by at most one (absent combinations count 0)."""
    levels = np.asarray(levels)
    n, p = levels.shape
    if t == 1:
        for j in range(p):
            counts = np.bincount(levels[:, j], minlength=q)
            if counts.max() - counts.min() > 1:
                return False
        return True
    if t == 2:
        for j in range(p):
            for k in range(j + 1, p):
                counts = np.bincount(levels[:, j] * q + levels[:, k], minlength=q * q)
                if counts.max() - counts.min() > 1:
                    return False
        return True
    raise OaError(f"weak strength check supports t in {{1,2}}, got {t}")


@dataclass(frozen=True)
class RandomOaSample:
    points: np.ndarray  # (n, p) in [0, 1)
    source: OrthogonalArray
    rng: SeededRng


def random_oa(a: OrthogonalArray, rng: SeededRng) -> RandomOaSample:
    """Jitter each array cell uniformly: X_ij = (a_ij + U_ij) / q."""
    gen = rng.generator()
    u = gen.random(a.levels.shape)
    pts = (a.levels + u) / a.q
    pts.setflags(write=False)
    return RandomOaSample(points=pts, source=a, rng=rng)
