"""Planar primitives for the three-robot team.

A team configuration is a ``(3, 2)`` float array whose rows are the
positions of R1, R2 and R3 in the global frame. Links follow the
incidence pattern ``z12 = p2 - p1``, ``z13 = p3 - p1``, ``z23 = p3 - p2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, ZeroLink

#: Links with a norm below this are treated as collisions (length units).
COLLISION_EPS = 1e-9

#: Rotation by -90 degrees; ``x_perp = -J @ x`` is the +90 degree rotation.
J = np.array([[0.0, 1.0], [-1.0, 0.0]])

#: Incidence matrix mapping positions to links (z = (H kron I2) p).
H = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]])


def perp(x: ArrayLike) -> NDArray[np.float64]:
    """Rotate a 2-vector by +90 degrees."""
    x = np.asarray(x, dtype=float)
    return np.array([-x[1], x[0]])


def as_configuration(p: ArrayLike) -> NDArray[np.float64]:
    """Coerce ``p`` to a finite ``(3, 2)`` float array.

    Accepts either a ``(3, 2)`` array or a flat length-6 vector.
    """
    arr = np.asarray(p, dtype=float)
    if arr.shape == (6,):
        arr = arr.reshape(3, 2)
    if arr.shape != (3, 2):
        raise ValueError(f"team configuration must have shape (3, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("team configuration has non-finite entries")
    return arr


class LinkVector(NamedTuple):
    z12: NDArray[np.float64]
    z13: NDArray[np.float64]
    z23: NDArray[np.float64]

    def as_array(self) -> NDArray[np.float64]:
        return np.stack([self.z12, self.z13, self.z23])


class ErrorVector(NamedTuple):
    """Collective error: two squared-distance errors, the area error and two bearing errors."""

    e12d: float
    e13d: float
    eA: float
    e12b: NDArray[np.float64]
    e13b: NDArray[np.float64]

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.e12d, self.e13d, self.eA, *self.e12b, *self.e13b])

    def normalized(self, spec: FormationSpec) -> NDArray[np.float64]:
        """Dimensionless version: distance errors over d*^2, area error over A*."""
        return np.array(
            [
                self.e12d / spec.d12_star**2,
                self.e13d / spec.d13_star**2,
                self.eA / spec.A_star,
                *self.e12b,
                *self.e13b,
            ]
        )


@dataclass(frozen=True)
class FormationSpec:
    """Desired triangle, stored in the frame where ``g12_star`` points along +x.

    Use :meth:`from_angle`, :meth:`isosceles` or :meth:`from_bearings`
    rather than the raw constructor.
    """

    d12_star: float
    d13_star: float
    theta_star: float  # radians, in (0, pi)
    frame_angle: float = 0.0  # angle removed from user-supplied bearings
    g12_star: NDArray[np.float64] = field(init=False, repr=False)
    g13_star: NDArray[np.float64] = field(init=False, repr=False)
    A_star: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.d12_star > 0 and self.d13_star > 0):
            raise DomainError("desired distances must be positive")
        if not (0.0 < self.theta_star < math.pi):
            raise DomainError("theta_star must lie strictly between 0 and 180 degrees")
        th = self.theta_star
        object.__setattr__(self, "g12_star", np.array([1.0, 0.0]))
        object.__setattr__(self, "g13_star", np.array([math.cos(th), math.sin(th)]))
        object.__setattr__(self, "A_star", 0.5 * math.sin(th) * self.d12_star * self.d13_star)

    @classmethod
    def from_angle(cls, d12_star: float, d13_star: float, theta_deg: float) -> FormationSpec:
        return cls(float(d12_star), float(d13_star), math.radians(theta_deg))

    @classmethod
    def isosceles(cls, ell: float, theta_deg: float) -> FormationSpec:
        return cls.from_angle(ell, ell, theta_deg)

    @classmethod
    def from_bearings(
        cls, d12_star: float, d13_star: float, g12: ArrayLike, g13: ArrayLike
    ) -> FormationSpec:
        """Build from arbitrary desired bearings, rotating them so ``g12`` lies on +x."""
        g12 = np.asarray(g12, dtype=float)
        g13 = np.asarray(g13, dtype=float)
        for g in (g12, g13):
            if abs(np.linalg.norm(g) - 1.0) > 1e-12:
                raise DomainError("desired bearings must be unit vectors")
        alpha = math.atan2(g12[1], g12[0])
        theta = math.atan2(g13[1], g13[0]) - alpha
        theta = math.remainder(theta, 2 * math.pi)
        return cls(float(d12_star), float(d13_star), theta, frame_angle=alpha)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta_star)

    @property
    def is_isosceles(self) -> bool:
        return math.isclose(self.d12_star, self.d13_star, rel_tol=1e-12)

    def reference_configuration(self) -> NDArray[np.float64]:
        """The desired triangle with R1 at the origin."""
        return np.stack(
            [np.zeros(2), self.d12_star * self.g12_star, self.d13_star * self.g13_star]
        )


def links(p: ArrayLike) -> LinkVector:
    """Links of ``p``; ``z23`` is formed as ``z13 - z12`` so closure is exact."""
    p = as_configuration(p)
    z12 = p[1] - p[0]
    z13 = p[2] - p[0]
    return LinkVector(z12, z13, z13 - z12)


def bearing(z: ArrayLike, eps: float = COLLISION_EPS) -> NDArray[np.float64]:
    """Unit vector along ``z``; raises :class:`ZeroLink` when ``|z| < eps``."""
    z = np.asarray(z, dtype=float)
    n = math.hypot(z[0], z[1])
    if n < eps:
        raise ZeroLink(f"link norm {n:.3e} below collision threshold {eps:g}")
    return z / n


def cross2(a: ArrayLike, b: ArrayLike) -> float:
    """``a^T J b``, the z-component of the planar cross product."""
    return float(a[0] * b[1] - a[1] * b[0])


def signed_area(p: ArrayLike) -> float:
    """Signed area of the triangle (positive for counter-clockwise R1, R2, R3)."""
    z = links(p)
    return 0.5 * cross2(z.z12, z.z13)


def errors(p: ArrayLike, spec: FormationSpec, eps: float = COLLISION_EPS) -> ErrorVector:
    z = links(p)
    g12 = bearing(z.z12, eps)
    g13 = bearing(z.z13, eps)
    return ErrorVector(
        e12d=float(z.z12 @ z.z12 - spec.d12_star**2),
        e13d=float(z.z13 @ z.z13 - spec.d13_star**2),
        eA=0.5 * cross2(z.z12, z.z13) - spec.A_star,
        e12b=g12 - spec.g12_star,
        e13b=g13 - spec.g13_star,
    )


def error_norm(p: ArrayLike, spec: FormationSpec, eps: float = COLLISION_EPS) -> float:
    """Euclidean norm of the normalized (dimensionless) error vector."""
    return float(np.linalg.norm(errors(p, spec, eps).normalized(spec)))
