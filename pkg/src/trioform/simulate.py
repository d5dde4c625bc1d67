"""Trajectory integration and outcome classification.

The closed loop is integrated with classical RK4. The nominal step is
``SimParams.dt``; near stiff configurations (large link errors or short
links) the step is cut to ``stability_factor / L`` where ``L`` bounds the
local Jacobian's spectral radius, which keeps the explicit scheme inside
its stability region. The schedule depends only on the state, so runs stay
bit-for-bit reproducible.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import kernel
from .control import Gains, moving_velocity, team_velocity
from .errors import DomainError, WrongKind
from .geometry import COLLISION_EPS, FormationSpec, as_configuration, bearing, links

TRAJECTORY_HEADER = ("t", "p1x", "p1y", "p2x", "p2y", "p3x", "p3y", "e_norm")


@dataclass(frozen=True)
class SimParams:
    """Integration and classification settings.

    Attributes:
        dt: nominal RK4 step (time).
        t_max: integration horizon (time).
        conv_window: consecutive steps a moving candidate must persist.
        eq_velocity_tol: robot speeds below this count as stationary.
        moving_residual_tol: largest allowed pairwise velocity difference
            for a moving configuration.
        error_tol: error-norm threshold separating desired from undesired.
        stability_factor: cap on ``h * L`` for the step-size limiter.
        moving_drift_rtol: allowed change of the common velocity across the
            window, relative to its magnitude.
        max_steps: hard cap on the number of steps.
        record_stride: keep every n-th step in the trajectory.
        collision_eps: link length treated as a collision.
    """

    dt: float = 1e-3
    t_max: float = 50.0
    conv_window: int = 500
    eq_velocity_tol: float = 1e-8
    moving_residual_tol: float = 1e-6
    error_tol: float = 1e-6
    stability_factor: float = 1.5
    moving_drift_rtol: float = 1e-6
    max_steps: int = 50_000_000
    record_stride: int = 100
    collision_eps: float = COLLISION_EPS

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not self.t_max > self.dt:
            raise DomainError("t_max must exceed dt")
        for name in (
            "eq_velocity_tol",
            "moving_residual_tol",
            "error_tol",
            "stability_factor",
            "moving_drift_rtol",
            "collision_eps",
        ):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("conv_window", "max_steps", "record_stride"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be at least 1")


class OutcomeKind(enum.Enum):
    DESIRED = "DesiredEquilibrium"
    MOVING = "MovingConfiguration"
    COLLISION = "Collision"
    UNDECIDED = "Undecided"

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES[self]


_EXIT_CODES = {
    OutcomeKind.DESIRED: 0,
    OutcomeKind.MOVING: 2,
    OutcomeKind.COLLISION: 3,
    OutcomeKind.UNDECIDED: 4,
}
_FROM_STATUS = {
    kernel.DESIRED: OutcomeKind.DESIRED,
    kernel.MOVING: OutcomeKind.MOVING,
    kernel.COLLISION: OutcomeKind.COLLISION,
    kernel.UNDECIDED: OutcomeKind.UNDECIDED,
}


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    final_config: NDArray[np.float64]
    steady_velocity: NDArray[np.float64]
    final_error_norm: float
    t_end: float
    n_steps: int
    step_retries: int = 0


@dataclass
class Trajectory:
    """Decimated samples: times ``t`` and configurations ``p`` of shape ``(n, 3, 2)``."""

    t: NDArray[np.float64]
    p: NDArray[np.float64]
    e_norm: NDArray[np.float64] = field(repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self, path: str | Path) -> None:
        """Write the samples with ``repr``-exact floats so output is byte-stable."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRAJECTORY_HEADER)
            for ti, pi, ei in zip(self.t, self.p, self.e_norm):
                w.writerow([repr(float(v)) for v in (ti, *pi.ravel(), ei)])


def step_rk4(p: ArrayLike, spec: FormationSpec, gains: Gains, dt: float) -> NDArray[np.float64]:
    """One classical RK4 step of the team dynamics (reference implementation).

    Raises:
        ZeroLink: if any stage evaluates a collision.
    """
    p = as_configuration(p)
    k1 = team_velocity(p, spec, gains)
    k2 = team_velocity(p + 0.5 * dt * k1, spec, gains)
    k3 = team_velocity(p + 0.5 * dt * k2, spec, gains)
    k4 = team_velocity(p + dt * k3, spec, gains)
    return p + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _pack_config(params: SimParams) -> NDArray[np.float64]:
    cfg = np.empty(kernel.N_CFG)
    cfg[kernel.C_DT] = params.dt
    cfg[kernel.C_TMAX] = params.t_max
    cfg[kernel.C_STAB] = params.stability_factor
    cfg[kernel.C_EQV] = params.eq_velocity_tol
    cfg[kernel.C_MOVV] = params.moving_residual_tol
    cfg[kernel.C_ERR] = params.error_tol
    cfg[kernel.C_DRIFT] = params.moving_drift_rtol
    cfg[kernel.C_WIN] = params.conv_window
    cfg[kernel.C_MAXSTEPS] = params.max_steps
    cfg[kernel.C_STRIDE] = params.record_stride
    return cfg


def simulate(
    p0: ArrayLike,
    spec: FormationSpec,
    gains: Gains,
    params: SimParams | None = None,
    *,
    record: bool = True,
) -> tuple[Trajectory, Outcome]:
    """Integrate from ``p0`` and classify the limiting behaviour.

    With ``record=False`` only the first and last samples are kept, which is
    what sweeps use.
    """
    params = params or SimParams()
    p = as_configuration(p0).ravel().copy()
    prm = kernel.pack_problem(spec, gains, params.collision_eps)
    cfg = _pack_config(params)
    if not record:
        cfg[kernel.C_STRIDE] = float(2**62)
    state = np.zeros(kernel.N_STATE)
    state[kernel.S_LASTREC] = -1.0
    rec = np.empty((1024 if record else 4, 8))
    nrec = 0
    while True:
        status, nrec = kernel.integrate(p, prm, cfg, state, rec, nrec)
        if status != kernel.BUFFER_FULL:
            break
        rec = np.concatenate([rec, np.empty_like(rec)])

    kind = _FROM_STATUS[status]
    final = p.reshape(3, 2).copy()
    if kind is OutcomeKind.COLLISION:
        final_err = math.nan
    else:
        final_err = float(state[kernel.S_ENORM])
    outcome = Outcome(
        kind=kind,
        final_config=final,
        steady_velocity=np.array([state[kernel.S_VX], state[kernel.S_VY]]),
        final_error_norm=final_err,
        t_end=float(state[kernel.S_T]),
        n_steps=int(state[kernel.S_N]),
        step_retries=int(state[kernel.S_RETRIES]),
    )
    rec = rec[:nrec]
    traj = Trajectory(t=rec[:, 0].copy(), p=rec[:, 1:7].reshape(-1, 3, 2), e_norm=rec[:, 7].copy())
    return traj, outcome


def verify_moving_velocity(outcome: Outcome, spec: FormationSpec, gains: Gains) -> float:
    """Distance between the observed drift and ``K_b (g12* + g13*)``.

    Raises:
        WrongKind: unless ``outcome`` is a moving configuration.
    """
    if outcome.kind is not OutcomeKind.MOVING:
        raise WrongKind(f"expected a moving configuration, got {outcome.kind.value}")
    return float(np.linalg.norm(outcome.steady_velocity - moving_velocity(spec, gains)))


def is_flipped(p: ArrayLike, spec: FormationSpec, atol: float = 1e-4) -> bool:
    """True when ``g12 ~ -g13*`` and ``g13 ~ -g12*`` (the moving-configuration signature)."""
    z = links(p)
    g12 = bearing(z.z12)
    g13 = bearing(z.z13)
    return bool(
        np.linalg.norm(g12 + spec.g13_star) < atol and np.linalg.norm(g13 + spec.g12_star) < atol
    )


__all__ = [
    "Outcome",
    "OutcomeKind",
    "SimParams",
    "TRAJECTORY_HEADER",
    "Trajectory",
    "is_flipped",
    "simulate",
    "step_rk4",
    "verify_moving_velocity",
]
