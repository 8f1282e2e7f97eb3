"""Along-span motion from clamp timing.

A platform coupled to the driving loop travels with the cable surface, so
the displacement over a coupling interval is surface speed times its
duration. Planning turns target displacements into clamp commands; because
cooperative members share the exact same commands, they also share the exact
same displacement and their separations cannot change.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CommandConflictError, DomainError, OutOfRangeError
from .model import CableSystemConfig, CafeState, Clamp, ClampingParams, ClampTimeline


@dataclass(frozen=True)
class DriveState:
    surface_speed: float
    running: bool = True

    def __post_init__(self):
        if not self.surface_speed >= 0:
            raise DomainError("surface speed must be >= 0")

    @classmethod
    def from_system(cls, system: CableSystemConfig) -> "DriveState":
        return cls(system.surface_speed)

    @property
    def effective_speed(self) -> float:
        return self.surface_speed if self.running else 0.0


@dataclass(frozen=True)
class MoveSegment:
    """One coupling interval: clamp on at ``t_on``, off at ``t_off``."""

    t_on: float
    t_off: float
    direction: int

    def __post_init__(self):
        if self.direction not in (-1, 0, 1):
            raise DomainError(f"direction must be -1, 0 or +1, got {self.direction!r}")
        if not self.t_off >= self.t_on:
            raise DomainError("clamp-off must not precede clamp-on")

    def command_time(self, transition_duration: float) -> float:
        return self.t_on - transition_duration


@dataclass(frozen=True)
class MotionPlan:
    """Per-platform coupling segments plus the coordination mode.

    ``mode`` is ``"independent"``, ``"cooperative"`` or ``"mixed"``;
    ``groups`` lists the platform ids that move together.
    """

    segments: Mapping[int, tuple[MoveSegment, ...]] = field(default_factory=dict)
    mode: str = "independent"
    groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.mode not in ("independent", "cooperative", "mixed"):
            raise DomainError(f"unknown mode {self.mode!r}")
        for cafe_id, segs in self.segments.items():
            for a, b in zip(segs, segs[1:]):
                if b.t_on < a.t_off:
                    raise CommandConflictError(
                        f"cafe {cafe_id}: segments overlap at t={b.t_on:g} s")
        for group in self.groups:
            first = self.segments.get(group[0], ())
            for member in group[1:]:
                if self.segments.get(member, ()) != first:
                    raise DomainError(f"group {group}: members must share segments")

    def combine(self, other: "MotionPlan") -> "MotionPlan":
        """Concatenate two plans (``other`` after ``self`` in time)."""
        merged = {k: tuple(v) for k, v in self.segments.items()}
        for cafe_id, segs in other.segments.items():
            merged[cafe_id] = merged.get(cafe_id, ()) + tuple(segs)
        groups = tuple(dict.fromkeys(self.groups + other.groups))
        modes = {self.mode, other.mode}
        if not self.segments:
            mode = other.mode
        elif not other.segments:
            mode = self.mode
        else:
            mode = modes.pop() if len(modes) == 1 else "mixed"
        return MotionPlan(merged, mode, groups)

    def to_timeline(self, clamping: ClampingParams) -> ClampTimeline:
        """Clamp commands realising the plan.

        The engage command leads ``t_on`` by the switching time so coupling
        starts exactly at ``t_on``; the release command is issued at
        ``t_off`` because a switching clamp already holds position.
        """
        tau = clamping.transition_duration
        commands = {}
        for cafe_id, segs in self.segments.items():
            cmds = []
            for seg in segs:
                if seg.direction == 0 or seg.t_off == seg.t_on:
                    continue
                t_cmd = seg.command_time(tau)
                if t_cmd < -1e-12:
                    raise CommandConflictError(
                        f"cafe {cafe_id}: clamp-on at {seg.t_on:g} s needs a "
                        f"command before t=0")
                if cmds and t_cmd < cmds[-1][0] + tau - 1e-9:
                    raise CommandConflictError(
                        f"cafe {cafe_id}: command at {t_cmd:g} s overlaps the "
                        f"switch started at {cmds[-1][0]:g} s")
                cmds.append((max(t_cmd, 0.0), Clamp(seg.direction)))
                cmds.append((seg.t_off, Clamp.STATIONARY))
            commands[cafe_id] = cmds
        return ClampTimeline(commands)

    def end_time(self, clamping: ClampingParams) -> float:
        ends = [s.t_off for segs in self.segments.values() for s in segs]
        return max(ends, default=0.0) + clamping.transition_duration


def drive_displacement(t_on: float, t_off: float, drive: DriveState) -> float:
    """Cable travel while clamped between ``t_on`` and ``t_off``."""
    if t_off < t_on:
        raise DomainError(f"clamp-off {t_off!r} precedes clamp-on {t_on!r}")
    return drive.effective_speed * (t_off - t_on)


def advance_position(state: CafeState, direction: int, displacement: float,
                     incline: float, span: float | None = None) -> tuple[float, float]:
    """Rigid-cable position after moving ``displacement`` along the run.

    Returns ``(x, z)`` where ``z`` is the height along the undeflected
    cable; sag is handled separately by the dynamics.
    """
    if direction not in (-1, 0, 1):
        raise DomainError(f"direction must be -1, 0 or +1, got {direction!r}")
    if displacement < 0:
        raise DomainError("displacement must be >= 0")
    x = direction * displacement * math.cos(incline) + state.x
    z = direction * displacement * math.sin(incline) + state.z
    if span is not None and not -1e-12 <= x <= span + 1e-12:
        raise OutOfRangeError(f"cafe {state.id}: x={x:.6g} m outside [0, {span:g}]")
    return x, z


def plan_move(target: float, direction: int, drive: DriveState,
              clamping: ClampingParams, t_command: float = 0.0,
              x0: float | None = None, span: float | None = None,
              incline: float = 0.0) -> MoveSegment:
    """Clamp timing that carries a platform ``target`` metres along the cable."""
    if target < 0:
        raise DomainError("target displacement must be >= 0")
    if not drive.effective_speed > 0:
        raise DomainError("the drive must be running with a positive speed")
    if direction not in (-1, 1):
        raise DomainError("a move needs direction -1 or +1")
    if x0 is not None and span is not None:
        x_end = x0 + direction * target * math.cos(incline)
        if not -1e-12 <= x_end <= span + 1e-12:
            raise OutOfRangeError(
                f"move of {target:g} m from x={x0:g} ends at {x_end:.6g}, "
                f"outside [0, {span:g}]")
    t_on = t_command + clamping.transition_duration
    return MoveSegment(t_on, t_on + target / drive.effective_speed, direction)


def plan_cooperative(group: Sequence[int], displacement: float, direction: int,
                     drive: DriveState, clamping: ClampingParams,
                     positions: Mapping[int, float] | None = None,
                     span: float | None = None, t_command: float = 0.0,
                     prior: MotionPlan | None = None,
                     incline: float = 0.0) -> MotionPlan:
    """Give every member of ``group`` the identical coupling segment."""
    group = tuple(group)
    if not group:
        raise DomainError("cooperative group must not be empty")
    if positions is not None and span is not None:
        for member in group:
            try:
                plan_move(displacement, direction, drive, clamping, t_command,
                          positions[member], span, incline)
            except OutOfRangeError as exc:
                raise OutOfRangeError(f"cafe {member}: {exc}") from None
    seg = plan_move(displacement, direction, drive, clamping, t_command)
    if prior is not None:
        for member in group:
            for other in prior.segments.get(member, ()):
                if other.t_off + clamping.transition_duration > t_command - 1e-12 \
                        and other.t_on - clamping.transition_duration < seg.t_off:
                    raise CommandConflictError(
                        f"cafe {member}: overlaps prior segment "
                        f"[{other.t_on:g}, {other.t_off:g}] s")
    plan = MotionPlan({m: (seg,) for m in group}, "cooperative", (group,))
    return plan if prior is None else prior.combine(plan)


def shuttle_plan(cafe_ids: Sequence[int], distance: float, repeats: int,
                 drive: DriveState, clamping: ClampingParams, pause: float = 0.5,
                 t_start: float = 0.0, cooperative: bool = True) -> MotionPlan:
    """Forward-stop-back-stop cycles repeated ``repeats`` times.

    With ``cooperative`` the platforms share every command; otherwise each
    platform runs the same cycle on its own, one after the other.
    """
    tau = clamping.transition_duration
    duration = distance / drive.effective_speed

    def one(t0):
        segs = []
        t = t0
        for _ in range(repeats):
            for direction in (1, -1):
                seg = plan_move(distance, direction, drive, clamping, t)
                segs.append(seg)
                t = seg.t_off + tau + pause
        return tuple(segs)

    if cooperative:
        segs = one(t_start)
        return MotionPlan({i: segs for i in cafe_ids}, "cooperative", (tuple(cafe_ids),))
    # staggered by half a stroke so the platforms never share a command
    offset = 0.5 * (tau + duration)
    return MotionPlan({i: one(t_start + k * offset) for k, i in enumerate(cafe_ids)},
                      "independent")


@dataclass(frozen=True)
class NoiseModel:
    """Open-loop error injection.

    ``drive_bias_sigma`` is the spread of a per-run fractional speed error of
    the driving loop (error per metre travelled), shared by every coupled
    platform. ``event_sigma`` is the spread of a cable jerk in metres at each
    clamp engage/release event; the jerk displaces every platform coupled to
    the loop at that instant, including the one switching.
    """

    drive_bias_sigma: float = 0.008
    event_sigma: float = 0.001

    def __post_init__(self):
        if self.drive_bias_sigma < 0 or self.event_sigma < 0:
            raise DomainError("noise spreads must be >= 0")


class DriveTracker:
    """Cumulative along-cable displacement of each platform.

    Bookkeeping is per coupling interval (steps counted, then committed on
    release) so platforms that share commands perform identical floating-point
    operations and stay bitwise in step.
    """

    def __init__(self, n: int, step_length: float,
                 noise: NoiseModel | None = None, rng: np.random.Generator | None = None):
        self.n = n
        self.committed = [0.0] * n
        self.nominal = [0.0] * n
        self.count = [0] * n
        self.sign = [0] * n
        self.step_nominal = step_length
        self.noise = noise
        self.rng = rng
        bias = 0.0
        if noise is not None and noise.drive_bias_sigma > 0:
            bias = float(rng.normal(0.0, noise.drive_bias_sigma))
        self.step_actual = step_length * (1.0 + bias)

    def _commit(self, i):
        self.committed[i] += self.sign[i] * (self.count[i] * self.step_actual)
        self.nominal[i] += self.sign[i] * (self.count[i] * self.step_nominal)
        self.count[i] = 0

    def update(self, signs: Sequence[int]) -> None:
        """Apply the coupling signs that hold during the coming step."""
        changed = [i for i in range(self.n) if signs[i] != self.sign[i]]
        if changed and self.noise is not None and self.noise.event_sigma > 0:
            jerk = float(self.rng.normal(0.0, self.noise.event_sigma))
            for i in range(self.n):
                s = signs[i] if signs[i] else self.sign[i]
                if s:
                    self.committed[i] += s * jerk
        for i in changed:
            self._commit(i)
            self.sign[i] = signs[i]

    def advance(self) -> None:
        for i in range(self.n):
            if self.sign[i]:
                self.count[i] += 1

    def displacement(self, i: int) -> float:
        return self.committed[i] + self.sign[i] * (self.count[i] * self.step_actual)

    def nominal_displacement(self, i: int) -> float:
        return self.nominal[i] + self.sign[i] * (self.count[i] * self.step_nominal)

    def displacements(self) -> list[float]:
        step = self.step_actual
        return [c + s * (k * step) for c, s, k in zip(self.committed, self.sign, self.count)]

    def nominal_displacements(self) -> list[float]:
        step = self.step_nominal
        return [c + s * (k * step) for c, s, k in zip(self.nominal, self.sign, self.count)]


def command_step(t: float, dt: float) -> int:
    """Index of the first step at or after time ``t``."""
    return max(0, math.ceil(t / dt - 1e-9))
