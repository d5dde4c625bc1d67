"""Three-robot formation control with distance, bearing and signed-area constraints."""

from __future__ import annotations

from .control import Gains, link_velocity, moving_velocity, team_velocity
from .errors import (
    DomainError,
    FormationError,
    NegativeDiscriminant,
    NotFeasible,
    NotIsosceles,
    WrongKind,
    ZeroLink,
)
from .geometry import FormationSpec, bearing, error_norm, errors, links, signed_area
from .simulate import Outcome, OutcomeKind, SimParams, Trajectory, simulate, step_rk4

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "FormationError",
    "FormationSpec",
    "Gains",
    "NegativeDiscriminant",
    "NotFeasible",
    "NotIsosceles",
    "Outcome",
    "OutcomeKind",
    "SimParams",
    "Trajectory",
    "WrongKind",
    "ZeroLink",
    "bearing",
    "error_norm",
    "errors",
    "link_velocity",
    "links",
    "moving_velocity",
    "signed_area",
    "simulate",
    "step_rk4",
    "team_velocity",
]
