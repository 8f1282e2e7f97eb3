"""Cam clamp: Hertzian normal force, friction hold check and switching."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CommandConflictError, DomainError, ValidationError
from .model import Clamp, ClampingParams, ClampState, Transitioning

# Countdown comparisons tolerate accumulated rounding of repeated dt subtraction.
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class ClampForceResult:
    normal_force: float
    hold_capacity: float
    deformation: float

    def __post_init__(self):
        if self.normal_force < 0 or self.hold_capacity < 0:
            raise ValidationError("normal_force", "forces must be >= 0")


def hertz_force(delta: float, params: ClampingParams) -> ClampForceResult:
    """Normal force of the cam pressed ``delta`` metres into the pad.

    Uses the sphere-on-half-space law F = 4/3 * E * sqrt(R) * delta**1.5 with
    E the effective contact modulus and R the cam radius.
    """
    if not delta >= 0:
        raise DomainError(f"deformation must be >= 0, got {delta!r}")
    force = (4.0 / 3.0) * params.effective_modulus * math.sqrt(params.cam_radius) \
        * delta ** 1.5
    return ClampForceResult(force, params.friction_coefficient * force, delta)


def can_hold(force_result: ClampForceResult, required_tangential_force: float) -> bool:
    if required_tangential_force < 0:
        raise DomainError("required tangential force must be >= 0")
    return force_result.hold_capacity >= required_tangential_force


def step_clamp_state(state: ClampState, command: Clamp | None, dt: float,
                     params: ClampingParams) -> ClampState:
    """Advance the switching state machine by one step of ``dt`` seconds.

    A command on a settled state starts a full-length switch; the step in
    which the command arrives does not count down. A switch in progress
    settles on the step where no more than ``dt`` remains.

    Raises:
        CommandConflictError: ``command`` arrives while a switch is running.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if isinstance(state, Transitioning):
        if command is not None:
            raise CommandConflictError(
                f"command {command.label!r} issued while switching to "
                f"{state.target.label!r} ({state.remaining:.3g} s left)")
        if state.remaining <= dt + _TIME_EPS:
            return state.target
        return Transitioning(state.target, state.remaining - dt)
    if command is None or command is state:
        return state
    return Transitioning(command, params.transition_duration)
