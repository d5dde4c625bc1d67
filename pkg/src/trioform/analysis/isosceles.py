"""Equilibrium and moving-configuration equations for isosceles formations.

Actual distances are written ``d12 = x * d12_star`` and ``d13 = y * d13_star``
(``x = y = 1`` is the desired shape). For an equilibrium the bearings sit at
their desired values; for a moving configuration they are flipped, i.e.
``g12 = -g13*`` and ``g13 = -g12*``.

The residual helpers accept numpy arrays and broadcast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..control import Gains
from ..errors import DomainError, NotFeasible, NotIsosceles
from ..geometry import FormationSpec

# Angles within this many degrees of 90 count as right.
RIGHT_ANGLE_TOL_DEG = 1e-9


class Regime(enum.Enum):
    ACUTE = "acute"
    RIGHT = "right"
    OBTUSE = "obtuse"


class Branch(enum.Enum):
    EQUILIBRIUM = "equilibrium"
    MOVING = "moving"


def regime_of(theta_star: float) -> Regime:
    deg = math.degrees(theta_star)
    if abs(deg - 90.0) <= RIGHT_ANGLE_TOL_DEG:
        return Regime.RIGHT
    return Regime.ACUTE if deg < 90.0 else Regime.OBTUSE


@dataclass(frozen=True)
class IsoscelesCase:
    ell: float
    theta_star: float  # radians

    def __post_init__(self) -> None:
        if not self.ell > 0:
            raise DomainError("ell must be positive")
        if not 0.0 < self.theta_star < math.pi:
            raise DomainError("theta_star must lie in (0, pi)")

    @classmethod
    def from_spec(cls, spec: FormationSpec) -> IsoscelesCase:
        if not spec.is_isosceles:
            raise NotIsosceles(
                f"d12_star={spec.d12_star} and d13_star={spec.d13_star} differ"
            )
        return cls(spec.d12_star, spec.theta_star)

    @property
    def regime(self) -> Regime:
        return regime_of(self.theta_star)


class Coefficients(NamedTuple):
    a: float
    b: float
    c: float
    d: float


def coefficients_equilibrium(x: float, y: float, spec: FormationSpec, gains: Gains) -> Coefficients:
    """Coefficients of the R1 force balance with bearings at their desired values."""
    _check_xy(x, y)
    d12 = x * spec.d12_star
    d13 = y * spec.d13_star
    e12d = d12**2 - spec.d12_star**2
    e13d = d13**2 - spec.d13_star**2
    e_A = spec.A_star * (x * y - 1.0)
    R = gains.R_Ad
    return Coefficients(e12d * d12, e13d * d13, -R * e_A * d12, R * e_A * d13)


def coefficients_moving(x: float, y: float, spec: FormationSpec, gains: Gains) -> Coefficients:
    """Coefficients for flipped bearings; the signed area is then ``-xy A*``."""
    _check_xy(x, y)
    d12 = x * spec.d12_star
    d13 = y * spec.d13_star
    e12d = d12**2 - spec.d12_star**2
    e13d = d13**2 - spec.d13_star**2
    e_A = spec.A_star * (-x * y - 1.0)
    R = gains.R_Ad
    return Coefficients(
        e13d * d13 + gains.R_bd, e12d * d12 + gains.R_bd, R * e_A * d13, -R * e_A * d12
    )


def vector_equation_residual(coeffs: Coefficients, theta_star: float) -> np.ndarray:
    """Project ``V = a g12* + b g13* - c g12*^perp - d g13*^perp`` onto ``-g13*^perp`` and ``g12*^perp``.

    Both projections vanish exactly when ``V = 0`` (the two directions are
    independent for ``0 < theta* < pi``).
    """
    a, b, c, d = coeffs
    s, co = math.sin(theta_star), math.cos(theta_star)
    return np.array([a * s + c * co + d, b * s - c - d * co])


def _check_xy(x, y) -> None:
    if np.any(np.asarray(x) <= 0) or np.any(np.asarray(y) <= 0):
        raise DomainError("x and y must be positive")


def _system(x, y, h, co, sgn, beta):
    """Shared form ``x^3 - x + beta - h (xy + sgn)(x cos - y)`` and its mirror."""
    q = x * y + sgn
    f1 = (x * x - 1.0) * x + beta - h * q * (x * co - y)
    f2 = (y * y - 1.0) * y + beta - h * q * (y * co - x)
    return f1, f2


def _system_jacobian(x, y, h, co, sgn):
    q = x * y + sgn
    ax = x * co - y
    ay = y * co - x
    j11 = 3.0 * x * x - 1.0 - h * (y * ax + q * co)
    j12 = -h * (x * ax - q)
    j21 = -h * (y * ay - q)
    j22 = 3.0 * y * y - 1.0 - h * (x * ay + q * co)
    return j11, j12, j21, j22


def iso_equilibrium_residuals(x, y, R_Ad: float, theta_star: float) -> np.ndarray:
    """Equilibrium equations in ``(x, y)``; shape ``(2, *broadcast(x, y).shape)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(_system(x, y, 0.5 * R_Ad, math.cos(theta_star), -1.0, 0.0))


def iso_equilibrium_jacobian(x, y, R_Ad: float, theta_star: float) -> np.ndarray:
    """Jacobian entries ``(j11, j12, j21, j22)`` of :func:`iso_equilibrium_residuals`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(_system_jacobian(x, y, 0.5 * R_Ad, math.cos(theta_star), -1.0))


def iso_moving_residuals(x, y, ell: float, R_bd: float, R_Ad: float, theta_star: float) -> np.ndarray:
    """Moving-configuration equations, in units of length^3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e3 = ell**3
    f1, f2 = _system(x, y, 0.5 * R_Ad, math.cos(theta_star), 1.0, R_bd / e3)
    return np.array([f1 * e3, f2 * e3])


def iso_moving_residuals_scaled(x, y, ell: float, R_bd: float, R_Ad: float, theta_star: float) -> np.ndarray:
    """:func:`iso_moving_residuals` divided by ``ell^3`` (dimensionless)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(_system(x, y, 0.5 * R_Ad, math.cos(theta_star), 1.0, R_bd / ell**3))


def iso_moving_jacobian_scaled(x, y, R_Ad: float, theta_star: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(_system_jacobian(x, y, 0.5 * R_Ad, math.cos(theta_star), 1.0))


def d_param(R_Ad: float, theta_star: float) -> float:
    """The combined gain ``R_Ad (1 + cos theta*) / 2``."""
    return 0.5 * R_Ad * (1.0 + math.cos(theta_star))


def difference_residual(x, y, R_Ad: float, theta_star: float, branch: Branch):
    """Difference of the two component equations, with the common factor ``x - y`` removed."""
    dp = d_param(R_Ad, theta_star)
    sgn = -1.0 if branch is Branch.EQUILIBRIUM else 1.0
    return x * x + y * y + x * y - 1.0 - dp * (x * y + sgn)


def _radicand(x_bar: float, dp: float, branch: Branch) -> float:
    if branch is Branch.EQUILIBRIUM:
        return (dp + 1.0) * (dp - 3.0) * x_bar**2 - 4.0 * (dp - 1.0)
    return (dp + 1.0) * ((dp - 3.0) * x_bar**2 + 4.0)


def branch_roots(x_bar: float, dp: float, branch: Branch) -> tuple[float, float] | None:
    """Roots ``(y_minus, y_plus)`` of the difference equation at fixed ``x_bar``, given ``dp`` directly."""
    if not x_bar > 0:
        raise DomainError(f"x_bar must be positive, got {x_bar}")
    rad = _radicand(x_bar, dp, branch)
    if rad < 0:
        return None
    half = 0.5 * math.sqrt(rad)
    mid = 0.5 * (dp - 1.0) * x_bar
    return mid - half, mid + half


def quadratic_branch_y(
    x_bar: float, R_Ad: float, theta_star: float, branch: Branch
) -> tuple[float, float] | None:
    """Solve the difference equation for ``y`` at fixed ``x_bar``.

    Returns ``(y_minus, y_plus)`` or ``None`` if the roots are complex.
    """
    return branch_roots(x_bar, d_param(R_Ad, theta_star), branch)


class BackSubstitution(NamedTuple):
    k: float
    l: float
    m: float
    n: float

    def evaluate(self, x: float) -> float:
        return ((self.k * x + self.l) * x + self.m) * x + self.n


def back_substitution_coefficients(
    x_bar: float, R_Ad: float, theta_star: float, branch: Branch
) -> BackSubstitution:
    """Cubic-in-``x_bar`` form of the first component equation after eliminating ``y``.

    The equilibrium branch uses ``y = a x - b`` and the moving branch
    ``y = a x + b`` with ``a = (dp - 1)/2`` and ``b`` half the square root
    of the branch radicand. Dividing ``evaluate(x_bar)`` by ``1 + cos theta*``
    recovers the component equation (for the moving branch, without the
    ``R_bd / ell^3`` offset).

    Raises:
        DomainError: if the radicand is negative so ``b`` is undefined.
    """
    return back_substitution_from_d(x_bar, d_param(R_Ad, theta_star), math.cos(theta_star), branch)


def back_substitution_from_d(x_bar: float, dp: float, cos_theta: float, branch: Branch) -> BackSubstitution:
    if not x_bar > 0:
        raise DomainError(f"x_bar must be positive, got {x_bar}")
    rad = _radicand(x_bar, dp, branch)
    if rad < 0:
        raise DomainError(f"radicand {rad:.6g} < 0 at x_bar={x_bar}")
    b = 0.5 * math.sqrt(rad)
    co = cos_theta
    k = 0.5 * (dp - 2.0) * (dp + 1.0) * (dp - (1.0 + co))
    if branch is Branch.EQUILIBRIUM:
        l = -b * dp * (dp - (1.0 + co))
        m = -0.5 * ((3.0 * dp - 2.0 * co) * (dp - 1.0) + 2.0)
    else:
        l = b * dp * (dp - (1.0 + co))
        m = 0.5 * (dp + 1.0) * (3.0 * dp - 2.0 * (1.0 + co))
    return BackSubstitution(k, l, m, b * dp)


def eq18_point(x_bar: float, d_param_: float, theta_star: float) -> tuple[float, float]:
    """The candidate ``(x_bar, y_bar)`` on the equilibrium branch, if admissible.

    Raises:
        NotFeasible: when the radicand is negative or the pair violates
            ``x > 1``, ``0 < y < 1``, ``x cos(theta*) > y`` or ``x y > 1``.
    """
    if not d_param_ > 3.0:
        raise NotFeasible(f"d_param={d_param_} must exceed 3")
    if not x_bar > 1.0:
        raise NotFeasible(f"x_bar={x_bar} must exceed 1")
    roots = branch_roots(x_bar, d_param_, Branch.EQUILIBRIUM)
    if roots is None:
        raise NotFeasible("complex branch")
    y = roots[0]
    co = math.cos(theta_star)
    if not (0.0 < y < 1.0 and x_bar * co - y > 0.0 and x_bar * y > 1.0):
        raise NotFeasible(f"(x, y)=({x_bar}, {y}) violates the sign constraints")
    return x_bar, y


def evaluate_eq18_gap(x_bar: float, d_param_: float, theta_star: float) -> float:
    """First equilibrium equation evaluated on the lower difference-equation branch.

    The gain enters through ``d_param`` (so ``R_Ad / 2 = d_param / (1 + cos)``).
    A positive value means the candidate pair is not an equilibrium.

    Raises:
        NotFeasible: see :func:`eq18_point`.
    """
    x, y = eq18_point(x_bar, d_param_, theta_star)
    co = math.cos(theta_star)
    h = d_param_ / (1.0 + co)
    return (x * x - 1.0) * x - h * (x * y - 1.0) * (x * co - y)
