"""Trigonometric solution of reduced cubics ``y^3 + c y + d = 0``.

Only the regime ``c < 0``, ``d > 0`` with nonnegative discriminant is
handled: there the cubic has one negative root and two positive ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NegativeDiscriminant

# Discriminants this small relative to their terms are rounding noise.
_DELTA_RTOL = 1e-12


@dataclass(frozen=True)
class ReducedCubic:
    c: float
    d: float

    @property
    def discriminant(self) -> float:
        return -4.0 * self.c**3 - 27.0 * self.d**2

    def __call__(self, y):
        return y**3 + self.c * y + self.d


@dataclass(frozen=True)
class CubicPositiveRoots:
    """The two positive roots, ``y_p1 <= y_p2``, with the polar data used to get them.

    ``phi_v`` is in radians and lies in ``(pi/2, pi]``.
    """

    y_p1: float
    y_p2: float
    r_v: float
    phi_v: float

    @property
    def phi_v_deg(self) -> float:
        return math.degrees(self.phi_v)


@dataclass(frozen=True)
class FRoots:
    """Scaled roots ``r_i = z_i / ell`` of ``f(z) = z^3 - ell^2 z + R_bd``."""

    r1: float
    r2: float
    phi: float


def _snapped_discriminant(c: float, d: float) -> float:
    t1 = -4.0 * c**3
    t2 = 27.0 * d**2
    delta = t1 - t2
    if abs(delta) <= _DELTA_RTOL * max(abs(t1), t2):
        return 0.0
    return delta


def solve_reduced_cubic_positive(c: float, d: float) -> CubicPositiveRoots:
    """Both positive roots of ``y^3 + c y + d`` for ``c < 0 < d``.

    Raises:
        DomainError: if ``c >= 0`` or ``d <= 0``.
        NegativeDiscriminant: if only one real root exists.
    """
    c = float(c)
    d = float(d)
    if not c < 0:
        raise DomainError(f"need c < 0, got {c}")
    if not d > 0:
        raise DomainError(f"need d > 0, got {d}")
    delta = _snapped_discriminant(c, d)
    if delta < 0:
        raise NegativeDiscriminant(f"discriminant {delta:.6g} < 0: single real root")
    r_v = math.sqrt(-((c / 3.0) ** 3))
    # Two-argument form keeps the angle in (90, 180] degrees; delta = 0 gives exactly pi.
    phi = math.atan2(2.0 * math.sqrt(delta / 108.0), -d)
    rho = 2.0 * math.sqrt(-c / 3.0)  # 2 * cbrt(r_v)
    y1 = rho * math.cos(phi / 3.0 - 2.0 * math.pi / 3.0)
    y2 = rho * math.cos(phi / 3.0)
    return CubicPositiveRoots(y_p1=min(y1, y2), y_p2=max(y1, y2), r_v=r_v, phi_v=phi)


def threshold_distance(R_bd: float) -> float:
    """Leg length ``sqrt(3) * cbrt(R_bd / 2)`` at which ``f`` gains a double root."""
    if not R_bd > 0:
        raise DomainError(f"R_bd must be positive, got {R_bd}")
    return math.sqrt(3.0) * float(np.cbrt(R_bd / 2.0))


def cubic_f_roots(ell: float, R_bd: float) -> FRoots | None:
    """Positive roots of ``z^3 - ell^2 z + R_bd`` scaled by ``1/ell``.

    Returns ``None`` when ``ell`` is below the threshold distance, since
    ``f`` is then positive for all ``z > 0``.
    """
    if not ell > 0:
        raise DomainError(f"ell must be positive, got {ell}")
    if not R_bd > 0:
        raise DomainError(f"R_bd must be positive, got {R_bd}")
    try:
        roots = solve_reduced_cubic_positive(-float(ell) ** 2, R_bd)
    except NegativeDiscriminant:
        return None
    return FRoots(r1=roots.y_p1 / ell, r2=roots.y_p2 / ell, phi=roots.phi_v)
