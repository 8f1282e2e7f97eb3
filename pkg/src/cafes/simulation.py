"""Fixed-step scenario runner producing CSV traces.

Each step first applies clamp commands, records the current state, then
integrates the vertical dynamics with platforms frozen in ``x`` and finally
moves coupled platforms along the span.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .clamping import hertz_force, step_clamp_state
from .dynamics import (chain_from_positions, rk4_step, solve_equilibrium,
                       tension_and_balance)
from .errors import (DegenerateGeometryError, NumericalInstabilityError,
                     OutOfRangeError)
from .kinematics import DriveState, DriveTracker, NoiseModel, command_step
from .model import G, CafeState, Clamp, ClampTimeline, Scenario, drive_sign


def fmt(value: float) -> str:
    """Nine significant digits, the fixed precision of every CSV."""
    return format(float(value), ".9g")


@dataclass
class SimTrace:
    """Per-step record of a run. Rows are indexed by step, columns by platform
    (in ``cafe_ids`` order) or by cable segment (left to right); tensions are
    per physical cable."""

    dt: float
    cafe_ids: tuple[int, ...]
    time: np.ndarray
    x: np.ndarray
    z: np.ndarray
    z_dot: np.ndarray
    clamp: list[tuple[str, ...]]
    slip: np.ndarray
    tension: np.ndarray
    drive_speed: np.ndarray
    displacement: np.ndarray
    nominal_displacement: np.ndarray

    def header(self) -> list[str]:
        cols = ["time_s"]
        for i in self.cafe_ids:
            cols += [f"x{i}_m", f"z{i}_m", f"zdot{i}_m_s", f"clamp{i}", f"slip{i}"]
        cols += [f"tension{j}_N" for j in range(self.tension.shape[1])]
        cols.append("drive_speed_m_s")
        return cols

    def write_csv(self, stream: TextIO) -> None:
        stream.write(",".join(self.header()) + "\n")
        for k in range(len(self.time)):
            row = [fmt(self.time[k])]
            for j in range(len(self.cafe_ids)):
                row += [fmt(self.x[k, j]), fmt(self.z[k, j]), fmt(self.z_dot[k, j]),
                        self.clamp[k][j], str(int(self.slip[k, j]))]
            row += [fmt(t) for t in self.tension[k]]
            row.append(fmt(self.drive_speed[k]))
            stream.write(",".join(row) + "\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def relative_drift(self, a: int, b: int) -> float:
        """Largest deviation of the a-b separation from its nominal course."""
        ia, ib = self.cafe_ids.index(a), self.cafe_ids.index(b)
        err = self.displacement - self.nominal_displacement
        return float(np.max(np.abs(err[:, ia] - err[:, ib])))

    def transition_time(self, cafe_id: int) -> float:
        j = self.cafe_ids.index(cafe_id)
        return sum(row[j].startswith("to_") for row in self.clamp) * self.dt


@dataclass
class SimSummary:
    final_x: dict[int, float]
    final_error: dict[int, float]
    max_sag: float
    max_speed_z: float
    slip_events: int
    groups: list[tuple[int, ...]] = field(default_factory=list)
    separation_drift: float = 0.0

    def lines(self) -> list[str]:
        out = []
        for i, x in self.final_x.items():
            out.append(f"cafe {i}: final x = {x:.6f} m, "
                       f"open-loop error = {self.final_error[i] * 1e3:+.3f} mm")
        out.append(f"max sag = {self.max_sag * 1e3:.4f} mm")
        out.append(f"max |zdot| = {self.max_speed_z:.6g} m/s")
        out.append(f"slip events = {self.slip_events}")
        for g in self.groups:
            out.append(f"cooperative group {list(g)}: separation drift = "
                       f"{self.separation_drift * 1e3:.6f} mm")
        return out


@dataclass
class SimResult:
    trace: SimTrace
    summary: SimSummary


def cooperative_groups(timeline: ClampTimeline, ids: Sequence[int]) -> list[tuple[int, ...]]:
    """Platforms whose command lists are identical (and non-empty)."""
    by_cmds: dict[tuple, list[int]] = {}
    for i in ids:
        cmds = timeline.for_cafe(i)
        if cmds:
            by_cmds.setdefault(cmds, []).append(i)
    return [tuple(g) for g in by_cmds.values() if len(g) > 1]


def default_duration(scenario: Scenario) -> float:
    events = scenario.timeline.events()
    last = events[-1][0] if events else 0.0
    return last + scenario.clamping.transition_duration + 1.0


def simulate(scenario: Scenario, dt: float = 1e-3, duration: float | None = None,
             noise: NoiseModel | None = None, seed: int | None = None,
             settle: bool = True) -> SimResult:
    """Run ``scenario`` for ``duration`` seconds at a fixed step.

    Platforms start at rest at their static sag when ``settle`` is set,
    otherwise at the configured ``z``.

    Raises:
        NumericalInstabilityError: the dynamics blew up (names the time).
        OutOfRangeError: a platform would reach an anchor or pass a neighbour.
        CommandConflictError: a command arrived during a switch.
    """
    system, clamping, cafes, timeline = scenario
    if duration is None:
        duration = default_duration(scenario)
    n_steps = int(round(duration / dt))
    ids = tuple(c.id for c in cafes)
    n = len(ids)
    drive = DriveState.from_system(system)
    rng = np.random.default_rng(seed) if noise is not None else None
    tracker = DriveTracker(n, drive.effective_speed * dt, noise, rng)
    cos_i = math.cos(system.incline_angle)
    x0 = [c.x for c in cafes]

    pending = [dict() for _ in range(n)]
    for t, cafe_id, cmd in timeline.events():
        pending[ids.index(cafe_id)][command_step(t, dt)] = cmd

    chain = chain_from_positions(system, ids, x0, [c.z for c in cafes])
    order = [ids.index(i) for i in chain.cafe_ids]
    by_id = {c.id: c for c in cafes}
    m = [by_id[i].mass for i in chain.cafe_ids]
    c_damp = [by_id[i].damping for i in chain.cafe_ids]
    if settle and n:
        z = solve_equilibrium(chain, cafes).z.tolist()
    else:
        z = [by_id[i].z for i in chain.cafe_ids]
    v = [by_id[i].z_dot for i in chain.cafe_ids]

    hold = hertz_force(clamping.max_deformation, clamping)
    incline_load = [mass * G * abs(math.sin(system.incline_angle)) for mass in m]
    clamp = [c.clamp for c in cafes]

    rows = n_steps + 1
    out_x, out_z, out_v, out_slip, out_t, out_d, out_dn, labels = ([] for _ in range(8))
    x = list(x0)
    capacity = hold.hold_capacity
    # chain order -> input order
    inverse = [order.index(i) for i in range(n)]

    row_labels: tuple[str, ...] = ()
    for k in range(rows):
        t = k * dt
        changed = k == 0
        for i in range(n):
            cmd = pending[i].get(k)
            if cmd is not None or not isinstance(clamp[i], Clamp):
                clamp[i] = step_clamp_state(clamp[i], cmd, dt, clamping)
                # a countdown step keeps both label and coupling
                changed = changed or cmd is not None or isinstance(clamp[i], Clamp)
        if changed:
            tracker.update([drive_sign(s) for s in clamp])
            row_labels = tuple(s.label for s in clamp)

        tension, balance = tension_and_balance(chain, z)
        out_slip.append([abs(balance[jc]) + incline_load[jc] > capacity for jc in inverse])
        out_z.append([z[jc] for jc in inverse])
        out_v.append([v[jc] for jc in inverse])
        out_x.append(x)
        out_t.append(tension)
        out_d.append(tracker.displacements())
        out_dn.append(tracker.nominal_displacements())
        labels.append(row_labels)
        if k == n_steps:
            break

        if n:
            z, v = rk4_step(chain, z, v, m, m, c_damp, dt)
            if not all(map(math.isfinite, z + v)):
                raise NumericalInstabilityError(
                    f"non-finite state at t={t + dt:.6g} s; use a smaller dt")

        tracker.advance()
        if any(tracker.sign):
            x = [a + cos_i * d for a, d in zip(x0, tracker.displacements())]
            for i in range(n):
                if not -1e-12 <= x[i] <= system.span_length + 1e-12:
                    raise OutOfRangeError(
                        f"cafe {ids[i]} reaches x={x[i]:.6g} m at t={t + dt:.6g} s, "
                        f"outside [0, {system.span_length:g}]")
            try:
                chain = chain.moved([x[i] for i in order])
            except DegenerateGeometryError:
                raise OutOfRangeError(
                    f"platforms collide at t={t + dt:.6g} s") from None

    def table(rows_, width, dtype=float):
        return np.array(rows_, dtype=dtype).reshape(len(rows_), width)

    out_x, out_z, out_v = table(out_x, n), table(out_z, n), table(out_v, n)
    out_slip = table(out_slip, n, bool)
    out_t = table(out_t, len(chain.x) - 1) / chain.cables
    out_d, out_dn = table(out_d, n), table(out_dn, n)
    trace = SimTrace(
        dt=dt, cafe_ids=ids, time=np.arange(rows) * dt, x=out_x, z=out_z,
        z_dot=out_v, clamp=labels, slip=out_slip, tension=out_t,
        drive_speed=np.full(rows, drive.effective_speed),
        displacement=out_d, nominal_displacement=out_dn)
    return SimResult(trace, summarize(trace, cooperative_groups(timeline, ids), cos_i))


def summarize(trace: SimTrace, groups: list[tuple[int, ...]], cos_i: float = 1.0) -> SimSummary:
    ids = trace.cafe_ids
    err = (trace.displacement[-1] - trace.nominal_displacement[-1]) * cos_i
    rising = trace.slip[1:] & ~trace.slip[:-1]
    drift = 0.0
    for g in groups:
        for a, b in zip(g, g[1:]):
            drift = max(drift, trace.relative_drift(a, b) * cos_i)
    return SimSummary(
        final_x={i: float(trace.x[-1, j]) for j, i in enumerate(ids)},
        final_error={i: float(err[j]) for j, i in enumerate(ids)},
        max_sag=float(max(0.0, -trace.z.min())) if trace.z.size else 0.0,
        max_speed_z=float(np.abs(trace.z_dot).max()) if trace.z_dot.size else 0.0,
        slip_events=int(rising.sum() + trace.slip[0].sum()) if trace.slip.size else 0,
        groups=groups,
        separation_drift=drift,
    )


def coupling_schedule(timeline: ClampTimeline, cafes: Sequence[CafeState], clamping,
                      dt: float, n_steps: int) -> list[tuple[int, list[int]]]:
    """Steps at which any platform's drive coupling changes, with the new signs.

    Follows the same state machine as :func:`simulate`, so the kinematics
    of a run can be replayed without integrating the dynamics.
    """
    n = len(cafes)
    changes: dict[int, dict[int, int]] = {}
    for i, cafe in enumerate(cafes):
        state = cafe.clamp
        cmds = [(command_step(t, dt), c) for t, c in timeline.for_cafe(cafe.id)]
        for j, (k, cmd) in enumerate(cmds):
            if k > n_steps:
                break
            before = drive_sign(state)
            state = step_clamp_state(state, cmd, dt, clamping)
            if drive_sign(state) != before:
                changes.setdefault(k, {})[i] = drive_sign(state)
            nxt = cmds[j + 1][0] if j + 1 < len(cmds) else n_steps + 1
            kk = k
            while not isinstance(state, Clamp) and kk + 1 < min(nxt, n_steps + 1):
                kk += 1
                state = step_clamp_state(state, None, dt, clamping)
                if isinstance(state, Clamp) and state.sign != 0:
                    changes.setdefault(kk, {})[i] = state.sign
    schedule = []
    signs = [drive_sign(c.clamp) for c in cafes]
    for k in sorted(changes):
        for i, s in changes[k].items():
            signs[i] = s
        schedule.append((k, list(signs)))
    return schedule


def _replay(cafes, schedule, step, n_steps, noise, rng) -> DriveTracker:
    n = len(cafes)
    tracker = DriveTracker(n, step, noise, rng)
    tracker.update([drive_sign(c.clamp) for c in cafes])
    at = 0
    for k, signs in schedule:
        for i in range(n):
            if tracker.sign[i]:
                tracker.count[i] += k - at
        at = k
        tracker.update(signs)
    for i in range(n):
        if tracker.sign[i]:
            tracker.count[i] += n_steps - at
    return tracker


def replay_many(scenario: Scenario, seeds: Sequence[int | None], dt: float = 1e-3,
                duration: float | None = None,
                noise: NoiseModel | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Final along-cable displacements for many seeds of the same scenario.

    Kinematics only; each row equals what :func:`simulate` reports for that
    seed, which makes large seeded error studies cheap.

    Returns:
        ``(actual, nominal)``: actual has one row per seed and one column per
        platform; nominal (noise-free) has one entry per platform.
    """
    system, clamping, cafes, timeline = scenario
    if duration is None:
        duration = default_duration(scenario)
    n_steps = int(round(duration / dt))
    schedule = coupling_schedule(timeline, cafes, clamping, dt, n_steps)
    step = DriveState.from_system(system).effective_speed * dt
    n = len(cafes)
    actual = np.empty((len(seeds), n))
    tracker = None
    for r, seed in enumerate(seeds):
        rng = np.random.default_rng(seed) if noise is not None else None
        tracker = _replay(cafes, schedule, step, n_steps, noise, rng)
        actual[r] = [tracker.displacement(i) for i in range(n)]
    if tracker is None:
        tracker = _replay(cafes, schedule, step, n_steps, None, None)
    return actual, np.array([tracker.nominal_displacement(i) for i in range(n)])


def replay_displacements(scenario: Scenario, dt: float = 1e-3,
                         duration: float | None = None, noise: NoiseModel | None = None,
                         seed: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Final (actual, nominal) along-cable displacement of every platform."""
    actual, nominal = replay_many(scenario, [seed], dt, duration, noise)
    return actual[0], nominal
