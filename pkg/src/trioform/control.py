"""Gradient control terms and the closed-loop vector fields.

R1 runs a distance-plus-area law on both of its links. R2 and R3 each run
a bearing law on their link to R1. Everything is expressed in one global
frame; the bearing robots are assumed frame-aligned with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .geometry import COLLISION_EPS, FormationSpec, J, LinkVector, as_configuration, bearing, cross2


@dataclass(frozen=True)
class Gains:
    """Controller gains.

    Attributes:
        K_d: distance gain, 1/(length^2 time).
        K_b: bearing gain, length/time.
        K_A: signed-area gain, 1/(length^2 time).
    """

    K_d: float
    K_b: float
    K_A: float

    def __post_init__(self) -> None:
        for name in ("K_d", "K_b", "K_A"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")

    @classmethod
    def from_ratio(cls, K_d: float, K_b: float, R_Ad: float) -> Gains:
        """Build gains from ``K_d``, ``K_b`` and the area-to-distance ratio."""
        return cls(float(K_d), float(K_b), float(R_Ad) * float(K_d))

    @property
    def R_bd(self) -> float:
        return self.K_b / self.K_d

    @property
    def R_Ad(self) -> float:
        return self.K_A / self.K_d

    @property
    def d_hat(self) -> float:
        """Threshold leg length below which no moving configuration exists."""
        return math.sqrt(3.0) * float(np.cbrt(self.R_bd / 2.0))


def distance_control_term(z_ij: ArrayLike, d_star: float) -> NDArray[np.float64]:
    z = np.asarray(z_ij, dtype=float)
    return (z @ z - d_star**2) * z


def bearing_control_term(g_ij: ArrayLike, g_star: ArrayLike) -> NDArray[np.float64]:
    return np.asarray(g_ij, dtype=float) - np.asarray(g_star, dtype=float)


def area_control_term(z12: ArrayLike, z13: ArrayLike, A_star: float) -> NDArray[np.float64]:
    z12 = np.asarray(z12, dtype=float)
    z13 = np.asarray(z13, dtype=float)
    e_A = 0.5 * cross2(z12, z13) - A_star
    return e_A * (J @ (z13 - z12))


def _r1_velocity(z12, z13, spec: FormationSpec, gains: Gains) -> NDArray[np.float64]:
    return gains.K_d * (
        distance_control_term(z12, spec.d12_star) + distance_control_term(z13, spec.d13_star)
    ) + gains.K_A * area_control_term(z12, z13, spec.A_star)


def team_velocity(
    p: ArrayLike, spec: FormationSpec, gains: Gains, eps: float = COLLISION_EPS
) -> NDArray[np.float64]:
    """Closed-loop velocities of R1, R2, R3 as a ``(3, 2)`` array.

    Raises:
        ZeroLink: if R2 or R3 coincides with R1.
    """
    p = as_configuration(p)
    z12 = p[1] - p[0]
    z13 = p[2] - p[0]
    u12b = bearing_control_term(bearing(z12, eps), spec.g12_star)
    u13b = bearing_control_term(bearing(z13, eps), spec.g13_star)
    return np.stack([_r1_velocity(z12, z13, spec, gains), -gains.K_b * u12b, -gains.K_b * u13b])


def link_velocity(
    z: LinkVector | ArrayLike, spec: FormationSpec, gains: Gains, eps: float = COLLISION_EPS
) -> NDArray[np.float64]:
    """Time derivative of the links ``(z12, z13, z23)`` as a ``(3, 2)`` array."""
    z = np.asarray(z, dtype=float).reshape(3, 2)
    z12, z13 = z[0], z[1]
    u12b = bearing_control_term(bearing(z12, eps), spec.g12_star)
    u13b = bearing_control_term(bearing(z13, eps), spec.g13_star)
    v1 = _r1_velocity(z12, z13, spec, gains)
    return np.stack(
        [
            -(gains.K_b * u12b + v1),
            -(gains.K_b * u13b + v1),
            -gains.K_b * (u13b - u12b),
        ]
    )


def moving_velocity(spec: FormationSpec, gains: Gains) -> NDArray[np.float64]:
    """Common translation velocity ``K_b (g12* + g13*)`` of a moving configuration."""
    return gains.K_b * (spec.g12_star + spec.g13_star)
