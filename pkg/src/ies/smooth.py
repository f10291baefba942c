"""Compactly supported kernels, local-linear weights, and smoother matrices.

A smoother matrix row i holds the local-linear weights at the i-th design
point, built from the kernel moment sums at that point; premultiplying by
the centering projector (I - 11^T/n) gives the centered variant used in the
additive-model estimation equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SINGULARITY_EPS = 1e-12


class SmoothError(ValueError):
    pass


def epanechnikov(u: np.ndarray | float) -> np.ndarray | float:
    """0.75 * max(0, 1 - u^2)."""
    u = np.asarray(u, dtype=float)
    return 0.75 * np.maximum(0.0, 1.0 - u * u)


def triangular(u: np.ndarray | float) -> np.ndarray | float:
    u = np.asarray(u, dtype=float)
    return np.maximum(0.0, 1.0 - np.abs(u))


KERNELS: dict[str, Callable] = {
    "epanechnikov": epanechnikov,
    "triangular": triangular,
}


def get_kernel(name: str) -> Callable:
    try:
        return KERNELS[name]
    except KeyError:
        raise SmoothError(f"unknown kernel {name!r}; available: {sorted(KERNELS)}") from None


def kernel_moments(points: np.ndarray, x: float, h: float, t: int, kernel: Callable = epanechnikov) -> float:
    """(1/n) * sum_i (1/h) K((x_i - x)/h) (x_i - x)^t for t in {0, 1, 2}."""
    if h <= 0:
        raise SmoothError(f"bandwidth must be positive, got {h}")
    points = np.asarray(points, dtype=float)
    d = points - x
    w = kernel(d / h) / h
    return float(np.mean(w * d**t))


@dataclass(frozen=True)
class SmootherMatrix:
    entries: np.ndarray  # (n, n)
    bandwidth: float
    column: int = 0
    centered: bool = False

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v


def _local_linear_weights(values: np.ndarray, at: np.ndarray, h: float, kernel: Callable) -> tuple[np.ndarray, np.ndarray]:
    """Weight rows for local-linear fits at each point of `at` over design
    `values`. Returns (weights, denominators); all kernel moments are
    evaluated at the fit point."""
    values = np.asarray(values, dtype=float)
    at = np.asarray(at, dtype=float)
    n = values.shape[0]
    D = values[None, :] - at[:, None]  # (m, n): x_j - x0_i
    K = kernel(D / h)
    nh = n * h
    v0 = K.sum(axis=1) / nh
    v1 = (K * D).sum(axis=1) / nh
    v2 = (K * D * D).sum(axis=1) / nh
    den = v0 * v2 - v1 * v1
    W = K * (v2[:, None] - D * v1[:, None]) / nh
    return W, den


def smoother_matrix(values: np.ndarray, h: float, kernel: Callable = epanechnikov, column: int = 0) -> SmootherMatrix:
    """Local-linear smoother over the design points themselves.

    Raises when the local design determinant V0*V2 - V1^2 falls below the
    singularity guard at any fit point; that signals a bandwidth too small
    for the local data density.
    """
    if h <= 0:
        raise SmoothError(f"bandwidth must be positive, got {h}")
    W, den = _local_linear_weights(values, values, h, kernel)
    bad = np.flatnonzero(den <= SINGULARITY_EPS)
    if bad.size:
        i = int(bad[0])
        raise SmoothError(
            f"near-singular local design at point index {i} (x={np.asarray(values,dtype=float)[i]:.6g}, "
            f"h={h}); increase the bandwidth"
        )
    S = W / den[:, None]
    return SmootherMatrix(entries=S, bandwidth=h, column=column, centered=False)


def center(S: SmootherMatrix) -> SmootherMatrix:
    """(I - 11^T/n) S: removes the column mean of every smoothed vector."""
    E = S.entries - S.entries.mean(axis=0, keepdims=True)
    return SmootherMatrix(entries=E, bandwidth=S.bandwidth, column=S.column, centered=True)


def norm_inf_product(Sa: SmootherMatrix | np.ndarray, Sb: SmootherMatrix | np.ndarray) -> float:
    """Maximum absolute row sum of the matrix product Sa @ Sb."""
    A = Sa.entries if isinstance(Sa, SmootherMatrix) else np.asarray(Sa)
    B = Sb.entries if isinstance(Sb, SmootherMatrix) else np.asarray(Sb)
    if A.shape[1] != B.shape[0]:
        raise SmoothError(f"dimension mismatch: {A.shape} @ {B.shape}")
    return float(np.abs(A @ B).sum(axis=1).max())


def smooth_at(values: np.ndarray, targets: np.ndarray, at: np.ndarray, h: float,
              kernel: Callable = epanechnikov) -> tuple[np.ndarray, np.ndarray]:
    """Local-linear estimates of E[target | value] at query coordinates.

    Returns (estimates, ok) where ok marks queries whose local design was
    nonsingular; callers supply a fallback (nearest neighbor) for the rest.
    """
    at = np.atleast_1d(np.asarray(at, dtype=float))
    W, den = _local_linear_weights(values, at, h, kernel)
    ok = den > SINGULARITY_EPS
    safe = np.where(ok, den, 1.0)
    est = (W @ np.asarray(targets, dtype=float)) / safe
    return est, ok
