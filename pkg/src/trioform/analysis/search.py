"""Grid scan plus Newton polish for zeros of two-equation systems in ``(x, y)``.

A cell of the grid is a candidate when, for both components, zero lies
within the range spanned by the corner values widened by that range (so
tangential zeros without a sign change are still caught). Newton is then
started from every candidate cell centre. A "no zeros" verdict means no
candidate converged inside the search box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cubic import cubic_f_roots
from .isosceles import (
    iso_equilibrium_jacobian,
    iso_equilibrium_residuals,
    iso_moving_jacobian_scaled,
    iso_moving_residuals_scaled,
)

Residual = Callable[[np.ndarray, np.ndarray], np.ndarray]

GRID_STEP = 0.01
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
EDGE_TOL = 1e-9


@dataclass(frozen=True)
class SearchResult:
    cells: int
    candidates: int
    zeros: np.ndarray = field(repr=False)  # shape (k, 2), sorted

    @property
    def zeros_found(self) -> int:
        return len(self.zeros)

    def without(self, point, tol: float = 1e-9) -> np.ndarray:
        """Zeros farther than ``tol`` from ``point``."""
        if not len(self.zeros):
            return self.zeros
        keep = np.max(np.abs(self.zeros - np.asarray(point, dtype=float)), axis=1) > tol
        return self.zeros[keep]


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.ceil((hi - lo) / step - 1e-9))
    return np.linspace(lo, hi, n + 1)


def find_zeros(
    residual: Residual,
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    *,
    step: float = GRID_STEP,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    open_lower: bool = True,
) -> SearchResult:
    """Locate zeros of ``residual`` in the box ``x_range x y_range``.

    Args:
        residual: maps broadcast arrays ``(x, y)`` to an array ``(2, ...)``.
        jacobian: returns ``(j11, j12, j21, j22)`` stacked the same way.
        open_lower: exclude zeros on the lower edges (half-open box).
    """
    xs = _axis(*x_range, step)
    ys = _axis(*y_range, step)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    F = residual(X, Y)
    cand = np.ones((len(xs) - 1, len(ys) - 1), dtype=bool)
    for comp in F:
        corners = np.stack([comp[:-1, :-1], comp[1:, :-1], comp[:-1, 1:], comp[1:, 1:]])
        lo = corners.min(axis=0)
        hi = corners.max(axis=0)
        spread = hi - lo
        cand &= (lo <= spread) & (hi >= -spread)
    ii, jj = np.nonzero(cand)
    x = 0.5 * (xs[ii] + xs[ii + 1])
    y = 0.5 * (ys[jj] + ys[jj + 1])
    converged = np.zeros(len(x), dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            f1, f2 = residual(x, y)
            j11, j12, j21, j22 = jacobian(x, y)
            det = j11 * j22 - j12 * j21
            dx = (j22 * f1 - j12 * f2) / det
            dy = (j11 * f2 - j21 * f1) / det
            x = x - dx
            y = y - dy
            small = np.abs(dx) + np.abs(dy) <= tol * (1.0 + np.abs(x) + np.abs(y))
            converged |= small & np.isfinite(x) & np.isfinite(y)
        f1, f2 = residual(x, y)
    scale = 1.0 + np.abs(x) ** 3 + np.abs(y) ** 3
    ok = converged & (np.hypot(f1, f2) <= 1e-9 * scale)
    xlo, xhi = x_range
    ylo, yhi = y_range
    if open_lower:
        # Strictly inside: the corner of a half-open box is often a degenerate zero.
        ok &= (x - xlo > EDGE_TOL) & (y - ylo > EDGE_TOL)
    else:
        ok &= (x >= xlo) & (y >= ylo)
    ok &= (x <= xhi) & (y <= yhi)
    pts = np.column_stack([x[ok], y[ok]])
    return SearchResult(cells=int(cand.size), candidates=int(len(ii)), zeros=_dedupe(pts))


def _dedupe(pts: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    if not len(pts):
        return pts.reshape(0, 2)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    keep = [pts[0]]
    for q in pts[1:]:
        if np.max(np.abs(q - keep[-1])) > tol and all(np.max(np.abs(q - k)) > tol for k in keep):
            keep.append(q)
    return np.array(keep)


def equilibrium_zeros(
    R_Ad: float,
    theta_star: float,
    x_range: tuple[float, float] = (0.0, 5.0),
    y_range: tuple[float, float] = (0.0, 5.0),
    **kw,
) -> SearchResult:
    """Zeros of the equilibrium system (``(1, 1)`` is always among them)."""
    return find_zeros(
        lambda x, y: iso_equilibrium_residuals(x, y, R_Ad, theta_star),
        lambda x, y: iso_equilibrium_jacobian(x, y, R_Ad, theta_star),
        x_range,
        y_range,
        **kw,
    )


def moving_zeros(
    ell: float,
    R_bd: float,
    R_Ad: float,
    theta_star: float,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    **kw,
) -> SearchResult:
    """Zeros of the moving-configuration system (scaled by ``1/ell^3``)."""
    return find_zeros(
        lambda x, y: iso_moving_residuals_scaled(x, y, ell, R_bd, R_Ad, theta_star),
        lambda x, y: iso_moving_jacobian_scaled(x, y, R_Ad, theta_star),
        x_range,
        y_range,
        **kw,
    )


def moving_region_zeros(
    ell: float, R_bd: float, R_Ad: float, theta_star: float, y_max: float = 5.0, **kw
) -> SearchResult | None:
    """Moving zeros with one scaled distance in ``(r1, r2)`` and the other above ``r1``.

    Both orientations are scanned. Returns ``None`` when ``ell`` is below the
    threshold distance and the region is empty.
    """
    fr = cubic_f_roots(ell, R_bd)
    if fr is None:
        return None
    if fr.r1 == fr.r2:
        return SearchResult(cells=0, candidates=0, zeros=np.empty((0, 2)))
    a = moving_zeros(ell, R_bd, R_Ad, theta_star, (fr.r1, fr.r2), (fr.r1, y_max), **kw)
    b = moving_zeros(ell, R_bd, R_Ad, theta_star, (fr.r1, y_max), (fr.r1, fr.r2), **kw)
    pts = np.concatenate([a.zeros, b.zeros])
    # The open box excludes x = r2 only on its lower side; drop boundary points explicitly.
    if len(pts):
        pts = pts[(pts[:, 0] < fr.r2) | (pts[:, 1] < fr.r2)]
    return SearchResult(
        cells=a.cells + b.cells, candidates=a.candidates + b.candidates, zeros=_dedupe(pts)
    )
