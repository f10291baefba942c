"""Additive-model fitting on a subsample by local-linear backfitting.

Each sweep re-smooths the partial residual of one predictor and re-centers
the component for identifiability; the intercept is the response mean. For
two predictors the estimation equation also has a closed-form solution via
the centered smoother matrices, used as a cross-check of the iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .smooth import (
    SmootherMatrix,
    SmoothError,
    center,
    get_kernel,
    norm_inf_product,
    smooth_at,
    smoother_matrix,
)


class BackfitError(ValueError):
    pass


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 200
    tol: float = 1e-6
    kernel: str = "epanechnikov"

    def __post_init__(self):
        if self.tol <= 0:
            raise BackfitError(f"tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise BackfitError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class AdditiveFit:
    mu_hat: float
    components: np.ndarray  # (p, n): m_hat_j at subsample points
    bandwidths: np.ndarray  # (p,)
    x: np.ndarray  # (n, p) training coordinates (scaled)
    y: np.ndarray  # (n,)
    iterations: int
    converged: bool
    final_max_update: float
    kernel: str = "epanechnikov"
    # partial residual and centering shift per component, for off-sample evaluation
    residuals: Optional[np.ndarray] = None  # (p, n)
    centering: Optional[np.ndarray] = None  # (p,)
    smoother_product_norms: Optional[dict] = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def fitted_values(self) -> np.ndarray:
        return self.mu_hat + self.components.sum(axis=0)


def _build_smoothers(x: np.ndarray, h: np.ndarray, kernel_name: str) -> list[SmootherMatrix]:
    kern = get_kernel(kernel_name)
    return [smoother_matrix(x[:, j], float(h[j]), kern, column=j) for j in range(x.shape[1])]


def _finalize(fit_x, y, h, comps, mu, iters, converged, max_upd, cfg,
              smoothers) -> AdditiveFit:
    p, n = comps.shape
    resid = np.empty((p, n))
    shift = np.empty(p)
    for j in range(p):
        others = comps.sum(axis=0) - comps[j]
        resid[j] = y - mu - others
        shift[j] = float((smoothers[j].entries @ resid[j]).mean())
    return AdditiveFit(
        mu_hat=mu,
        components=comps,
        bandwidths=np.asarray(h, dtype=float),
        x=fit_x,
        y=y,
        iterations=iters,
        converged=converged,
        final_max_update=max_upd,
        kernel=cfg.kernel,
        residuals=resid,
        centering=shift,
    )


def backfit(x: np.ndarray, y: np.ndarray, h, cfg: FitConfig = FitConfig(),
            smoothers: Optional[list[SmootherMatrix]] = None) -> AdditiveFit:
    """Iterative backfitting: m_j <- center(S_j (y - mu - sum_{k != j} m_k)).

    Non-convergence within max_iter is reported via the converged flag,
    not raised; a singular smoother (bandwidth too small) does raise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    h = np.broadcast_to(np.asarray(h, dtype=float), (p,))
    if smoothers is None:
        smoothers = _build_smoothers(x, h, cfg.kernel)
    mu = float(y.mean())
    comps = np.zeros((p, n))
    total = np.zeros(n)
    converged = False
    max_upd = np.inf
    iters = 0
    for it in range(1, cfg.max_iter + 1):
        iters = it
        max_upd = 0.0
        for j in range(p):
            r = y - mu - (total - comps[j])
            new = smoothers[j].entries @ r
            new -= new.mean()
            upd = float(np.max(np.abs(new - comps[j]))) if n else 0.0
            if upd > max_upd:
                max_upd = upd
            total += new - comps[j]
            comps[j] = new
        if max_upd < cfg.tol or p == 1:
            converged = True
            break
    return _finalize(x, y, h, comps, mu, iters, converged, max_upd, cfg, smoothers)


def solve_p2(x: np.ndarray, y: np.ndarray, h, cfg: FitConfig = FitConfig()) -> AdditiveFit:
    """Closed-form p=2 solution of the estimation equation:
    m1 = [I - (I - S1* S2*)^-1 (I - S1*)] y, and symmetrically for m2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if p != 2:
        raise BackfitError(f"closed-form solution requires exactly 2 predictors, got {p}")
    h = np.broadcast_to(np.asarray(h, dtype=float), (2,))
    smoothers = _build_smoothers(x, h, cfg.kernel)
    s1 = center(smoothers[0]).entries
    s2 = center(smoothers[1]).entries
    eye = np.eye(n)
    try:
        m1 = y - np.linalg.solve(eye - s1 @ s2, (eye - s1) @ y)
        m2 = y - np.linalg.solve(eye - s2 @ s1, (eye - s2) @ y)
    except np.linalg.LinAlgError:
        raise BackfitError(
            "estimation equation is singular (I - S1* S2* not invertible); "
            "increase the bandwidths"
        ) from None
    mu = float(y.mean())
    comps = np.vstack([m1, m2])
    norms = {"s1s2": norm_inf_product(s1, s2), "s2s1": norm_inf_product(s2, s1)}
    fit = _finalize(x, y, h, comps, mu, 0, True, 0.0, cfg, smoothers)
    fit.smoother_product_norms = norms
    return fit


def evaluate_component(fit: AdditiveFit, j: int, coords: np.ndarray) -> np.ndarray:
    """Component j at arbitrary coordinates.

    Exact subsample coordinates return the stored fitted value; interior
    queries re-smooth the fitted partial residual locally; queries outside
    the subsample's column range (or with a singular local design) fall back
    to the component value at the nearest subsample point.
    """
    coords = np.atleast_1d(np.asarray(coords, dtype=float))
    col = fit.x[:, j]
    lo, hi = col.min(), col.max()
    out = np.empty(coords.shape)

    order = np.argsort(col, kind="stable")
    sorted_col = col[order]
    pos = np.searchsorted(sorted_col, coords)
    pos_c = np.clip(pos, 1, len(col) - 1)
    left = sorted_col[pos_c - 1]
    right = sorted_col[np.clip(pos_c, 0, len(col) - 1)]
    nearest_pos = np.where(np.abs(coords - left) <= np.abs(right - coords), pos_c - 1, pos_c)
    nearest_idx = order[nearest_pos]
    nn_values = fit.components[j][nearest_idx]

    inside = (coords >= lo) & (coords <= hi)
    est = np.copy(nn_values)
    if inside.any():
        sm, ok = smooth_at(col, fit.residuals[j], coords[inside], float(fit.bandwidths[j]),
                           get_kernel(fit.kernel))
        vals = sm - fit.centering[j]
        idx = np.flatnonzero(inside)
        est[idx[ok]] = vals[ok]
    out[:] = est

    # exact knot match wins: interpolation at a subsample point is exact
    exact = coords[:, None] == col[None, :]
    hit_rows, hit_cols = np.nonzero(exact)
    if hit_rows.size:
        first = {}
        for r, c in zip(hit_rows, hit_cols):
            if r not in first:
                first[r] = c
        for r, c in first.items():
            out[r] = fit.components[j][c]
    return out


def predict(fit: AdditiveFit, x_new: np.ndarray) -> np.ndarray:
    """mu_hat + sum_j m_hat_j(x_new[:, j]) with term-wise nearest-neighbor
    extrapolation outside each column's subsample range."""
    x_new = np.asarray(x_new, dtype=float)
    single = x_new.ndim == 1
    pts = np.atleast_2d(x_new)
    if pts.shape[1] != fit.p:
        raise BackfitError(f"query has {pts.shape[1]} coordinates, fit has {fit.p}")
    total = np.full(pts.shape[0], fit.mu_hat)
    for j in range(fit.p):
        total += evaluate_component(fit, j, pts[:, j])
    return float(total[0]) if single else total


def predict_grid(fit: AdditiveFit, axes: list[np.ndarray]) -> np.ndarray:
    """Additive prediction over a tensor grid, one coordinate vector per
    predictor; exploits additivity so each axis is evaluated once."""
    if len(axes) != fit.p:
        raise BackfitError(f"expected {fit.p} axes, got {len(axes)}")
    comps = [evaluate_component(fit, j, np.asarray(ax, dtype=float)) for j, ax in enumerate(axes)]
    total = np.full(tuple(len(a) for a in axes), fit.mu_hat)
    for j, c in enumerate(comps):
        shape = [1] * fit.p
        shape[j] = len(c)
        total = total + c.reshape(shape)
    return total
