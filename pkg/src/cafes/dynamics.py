"""Vertical spring-mass dynamics of platforms hanging on pretensioned cables.

The cable between two neighbouring nodes (anchor or platform) is a massless
spring that never pushes: its tension is the pretension plus the stiffness
times any positive elongation. Parallel load-bearing cables are lumped into a
single chain whose pretension and axial rigidity are multiplied by the cable
count.

Coordinates: ``x`` is horizontal, ``z`` the vertical deviation of a node from
the straight anchor line (world height is ``x * tan(incline) + z``). Anchor
nodes have ``z = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import (DegenerateGeometryError, DomainError, NonConvergenceError,
                     NumericalInstabilityError, OutOfRangeError)
from .model import G, CableSystemConfig, CafeState

DEFAULT_DT = 1e-3
_LAZY = ("x", "dx", "dy0", "rest_length", "seg_stiffness", "base_height")


@dataclass(frozen=True, eq=False)
class CableChain:
    """Anchors and platforms strung along one lumped cable.

    Attributes:
        x: horizontal node positions, strictly increasing.
        z: node deviation from the anchor line (zero at anchors).
        fixed: True for anchor nodes.
        cafe_ids: platform id of every free node, left to right.
        axial_rigidity: lumped EA in newtons; a segment of rest length L has
            stiffness ``axial_rigidity / L``.
        pretension: lumped pretension in newtons.
        incline: slope of the anchor line in radians.
        cables: number of physical cables lumped into the chain.
    """

    x: np.ndarray
    z: np.ndarray
    fixed: np.ndarray
    cafe_ids: tuple[int, ...]
    axial_rigidity: float
    pretension: float
    incline: float = 0.0
    cables: int = 1

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        z = np.asarray(self.z, dtype=float)
        fixed = np.asarray(self.fixed, dtype=bool)
        if x.ndim != 1 or x.shape != z.shape or x.shape != fixed.shape or len(x) < 2:
            raise DomainError("x, z and fixed must be equal-length 1-d arrays")
        if not (fixed[0] and fixed[-1]):
            raise DomainError("both chain ends must be anchors")
        if np.any(z[fixed] != 0):
            raise DomainError("anchor nodes must have z = 0")
        free = np.flatnonzero(~fixed)
        if len(free) != len(self.cafe_ids):
            raise DomainError("one cafe id per free node required")
        for name, value in (("z", z), ("fixed", fixed), ("free", free)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "_free", free.tolist())
        slot = [-1] * len(x)
        for j, i in enumerate(free.tolist()):
            slot[i] = j
        object.__setattr__(self, "_slot", slot)
        self._set_geometry(x.tolist())

    def _set_geometry(self, xs: list[float]):
        tan_i = math.tan(self.incline)
        dx = [b - a for a, b in zip(xs, xs[1:])]
        for j, d in enumerate(dx):
            if not d > 1e-9:
                raise DegenerateGeometryError(
                    f"nodes at x={xs[j]:.9g} and x={xs[j + 1]:.9g} coincide or cross")
        dy0 = [d * tan_i for d in dx]
        rest = [math.hypot(d, e) for d, e in zip(dx, dy0)]
        d = self.__dict__
        for name in _LAZY:
            d.pop(name, None)
        d["_xs"] = xs
        # plain lists for the scalar force kernel
        d["_geom"] = (dx, dy0, rest, [self.axial_rigidity / r for r in rest])

    def __getattr__(self, name):
        # array views of the geometry, built on first use after a move
        if name not in _LAZY or "_geom" not in self.__dict__:
            raise AttributeError(name)
        dx, dy0, rest, stiff = self._geom
        values = {"x": self._xs, "dx": dx, "dy0": dy0, "rest_length": rest,
                  "seg_stiffness": stiff,
                  "base_height": [v * math.tan(self.incline) for v in self._xs]}
        for key, value in values.items():
            arr = np.array(value, dtype=float)
            arr.setflags(write=False)
            self.__dict__[key] = arr
        return self.__dict__[name]

    def moved(self, x_free) -> "CableChain":
        """Same topology with platforms at new horizontal positions.

        Raises:
            DegenerateGeometryError: platforms would touch or cross.
        """
        xs = list(self._xs)
        for j, i in enumerate(self._free):
            xs[i] = float(x_free[j])
        new = object.__new__(CableChain)
        new.__dict__.update(self.__dict__)
        new._set_geometry(xs)
        return new

    @property
    def n_free(self) -> int:
        return len(self._free)

    def with_z(self, z_free) -> "CableChain":
        return replace(self, z=self._full(z_free))

    def node_of(self, cafe_id: int) -> int:
        return self._free[self.cafe_ids.index(cafe_id)]

    def heights(self, z_free=None) -> np.ndarray:
        z = self.z if z_free is None else self._full(z_free)
        return self.base_height + z

    def _full(self, z_free) -> np.ndarray:
        z = np.zeros_like(self.x)
        z[self.free] = z_free
        return z

    def sub_spans(self) -> list[tuple[int, int]]:
        """Node index ranges between consecutive anchors.

        Anchors pin ``z``, so each range is mechanically independent.
        """
        anchors = np.flatnonzero(self.fixed)
        return [(int(a), int(b)) for a, b in zip(anchors, anchors[1:])]


def build_chain(system: CableSystemConfig, cafes: Sequence[CafeState]) -> CableChain:
    """Lumped chain for ``cafes`` at their current positions on ``system``."""
    return chain_from_positions(system, [c.id for c in cafes], [c.x for c in cafes],
                                [c.z for c in cafes])


def chain_from_positions(system: CableSystemConfig, ids: Sequence[int],
                         xs: Sequence[float], zs: Sequence[float] | None = None) -> CableChain:
    nodes = [(x, True, None, 0.0) for x in system.anchor_positions()]
    zs = [0.0] * len(ids) if zs is None else zs
    for cafe_id, x, z in zip(ids, xs, zs):
        if not -1e-12 <= x <= system.span_length + 1e-12:
            raise OutOfRangeError(f"cafe {cafe_id}: x={x:.6g} m outside the span")
        nodes.append((float(x), False, cafe_id, float(z)))
    nodes.sort(key=lambda n: (n[0], n[1]))
    return CableChain(
        x=np.array([n[0] for n in nodes]),
        z=np.array([n[3] for n in nodes]),
        fixed=np.array([n[1] for n in nodes]),
        cafe_ids=tuple(n[2] for n in nodes if not n[1]),
        axial_rigidity=system.axial_rigidity * system.total_cables,
        pretension=system.pretension * system.total_cables,
        incline=system.incline_angle,
        cables=system.total_cables,
    )


def _segments(chain: CableChain, z_free):
    """Per-segment rise, length, elongation and tension (plain lists).

    This is the only place the cable law lives: tension is the pretension
    plus stiffness times elongation, and a shortened segment goes slack
    rather than pushing.
    """
    dx, dy0, rest, stiff = chain._geom
    t_pre = abs(chain.pretension)
    n_seg = len(dx)
    z = [0.0] * (n_seg + 1)
    for j, i in enumerate(chain._free):
        z[i] = z_free[j]
    rise, length, elong, tension = [], [], [], []
    for s in range(n_seg):
        dz = z[s + 1] - z[s]
        dy = dy0[s] + dz
        ln = math.hypot(dx[s], dy)
        # L - L' without cancellation: L^2 - L'^2 = dz * (dy + dy0)
        e = dz * (dy + dy0[s]) / (ln + rest[s])
        rise.append(dy)
        length.append(ln)
        elong.append(e)
        tension.append(t_pre + stiff[s] * e if e > 0.0 else t_pre)
    return rise, length, elong, tension


def _cable_forces(chain: CableChain, z_free) -> list[float]:
    """Net upward cable force on each free node.

    Same law as ``_segments``, fused into one pass because this is the inner
    loop of every integrator.
    """
    dx, dy0, rest, stiff = chain._geom
    t_pre = abs(chain.pretension)
    slot = chain._slot
    f = []
    z_prev = 0.0
    for s in range(len(dx)):
        j = slot[s + 1]
        z_next = 0.0 if j < 0 else z_free[j]
        dz = z_next - z_prev
        dy = dy0[s] + dz
        ln = math.hypot(dx[s], dy)
        e = dz * (dy + dy0[s]) / (ln + rest[s])
        f.append((t_pre + stiff[s] * e if e > 0.0 else t_pre) * dy / ln)
        z_prev = z_next
    return [f[i] - f[i - 1] for i in chain._free]


def tension_and_balance(chain: CableChain, z_free):
    """Segment tensions and per-platform horizontal residuals."""
    _, length, _, tension = _segments(chain, z_free)
    dx = chain._geom[0]
    h = [t * d / ln for t, d, ln in zip(tension, dx, length)]
    return tension, [h[i - 1] - h[i] for i in chain._free]


@dataclass(frozen=True)
class SegmentForces:
    """Tensions and angles for one chain geometry.

    ``tension`` holds one magnitude per segment (lumped, i.e. summed over
    all cables). Per-platform arrays follow ``cafe_ids``. ``tension_left`` and
    ``tension_right`` carry the sign convention that marks a segment negative
    when the platform sits above that neighbour; ``vertical`` is the net
    upward cable force.
    """

    cafe_ids: tuple[int, ...]
    tension: np.ndarray
    theta_left: np.ndarray
    theta_right: np.ndarray
    tension_left: np.ndarray
    tension_right: np.ndarray
    vertical: np.ndarray
    horizontal_residual: np.ndarray
    cables: int = 1

    def index(self, cafe_id: int) -> int:
        return self.cafe_ids.index(cafe_id)

    @property
    def tension_per_cable(self) -> np.ndarray:
        return self.tension / self.cables


def segment_forces(chain: CableChain, z_free=None) -> SegmentForces:
    """Forces at the chain's own geometry, or with free nodes at ``z_free``."""
    if z_free is None:
        z_free = chain.z[chain.free]
    y = chain.heights(z_free)
    rise, length, _, tension = _segments(chain, list(z_free))
    tension, length = np.array(tension), np.array(length)
    i = chain.free
    dy_l, dy_r = y[i - 1] - y[i], y[i + 1] - y[i]
    theta_l = np.arctan2(dy_l, chain.dx[i - 1])
    theta_r = np.arctan2(dy_r, chain.dx[i])
    t_l, t_r = tension[i - 1], tension[i]
    return SegmentForces(
        cafe_ids=chain.cafe_ids,
        tension=tension,
        theta_left=theta_l,
        theta_right=theta_r,
        tension_left=np.where(y[i] > y[i - 1], -t_l, t_l),
        tension_right=np.where(y[i] > y[i + 1], -t_r, t_r),
        vertical=np.array(_cable_forces(chain, list(z_free))),
        horizontal_residual=t_l * np.cos(theta_l) - t_r * np.cos(theta_r),
        cables=chain.cables,
    )


def _check_cafe_node(chain: CableChain, i: int):
    if not 0 < i < len(chain.x) - 1 or chain.fixed[i]:
        raise DomainError(f"node {i} is not a platform node")


def segment_angles(chain: CableChain, i: int) -> tuple[float, float]:
    """Angles of the left and right segments at platform node ``i``.

    Each angle is positive when that neighbour is higher than the platform.
    """
    _check_cafe_node(chain, i)
    y = chain.heights()
    x = chain.x
    return (math.atan2(y[i - 1] - y[i], x[i] - x[i - 1]),
            math.atan2(y[i + 1] - y[i], x[i + 1] - x[i]))


def segment_tensions(chain: CableChain, i: int) -> tuple[float, float]:
    """Signed left/right tensions at platform node ``i``.

    Magnitude is ``k * max(0, L - L') + |T_pre|``; a side is negated when the
    platform is above that neighbour.
    """
    _check_cafe_node(chain, i)
    y = chain.heights()
    _, _, _, tension = _segments(chain, chain.z[chain.free].tolist())
    t_l, t_r = tension[i - 1], tension[i]
    if y[i] > y[i - 1]:
        t_l = -t_l
    if y[i] > y[i + 1]:
        t_r = -t_r
    return t_l, t_r


def vertical_acceleration(state: CafeState, forces: SegmentForces, g: float = G) -> float:
    if not state.mass > 0:
        raise DomainError(f"cafe {state.id}: a massless platform has no acceleration")
    up = forces.vertical[forces.index(state.id)]
    return (up - state.mass * g - state.damping * state.z_dot) / state.mass


def rk4_step(chain: CableChain, z, v, load, inertia, damping, dt: float,
             g: float = G) -> tuple[list[float], list[float]]:
    """One classical Runge-Kutta step of the free-node (z, z') system.

    ``load`` is the gravitating mass, ``inertia`` the mass resisting
    acceleration (they differ only for fictitious relaxation masses).
    Sequences in, lists out, ordered like ``chain.cafe_ids``.
    """
    dx, dy0, rest, stiff = chain._geom
    t_pre = abs(chain.pretension)
    slot, free = chain._slot, chain._free
    segs = range(len(dx))
    nodes = range(len(z))
    weight = [m * g for m in load]
    inv = [1.0 / m for m in inertia]
    f = [0.0] * len(dx)

    def accel(zz, vv):
        # the cable law of _segments, inlined: this is the hottest loop
        z_prev = 0.0
        for s in segs:
            j = slot[s + 1]
            z_next = 0.0 if j < 0 else zz[j]
            dz = z_next - z_prev
            d0 = dy0[s]
            dy = d0 + dz
            ln = math.hypot(dx[s], dy)
            e = dz * (dy + d0) / (ln + rest[s])
            f[s] = (t_pre + stiff[s] * e if e > 0.0 else t_pre) * dy / ln
            z_prev = z_next
        return [(f[free[i]] - f[free[i] - 1] - weight[i] - damping[i] * vv[i]) * inv[i]
                for i in nodes]

    h = 0.5 * dt
    a1 = accel(z, v)
    z2 = [z[i] + h * v[i] for i in nodes]
    v2 = [v[i] + h * a1[i] for i in nodes]
    a2 = accel(z2, v2)
    z3 = [z[i] + h * v2[i] for i in nodes]
    v3 = [v[i] + h * a2[i] for i in nodes]
    a3 = accel(z3, v3)
    z4 = [z[i] + dt * v3[i] for i in nodes]
    v4 = [v[i] + dt * a3[i] for i in nodes]
    a4 = accel(z4, v4)
    c = dt / 6.0
    return ([z[i] + c * (v[i] + 2 * v2[i] + 2 * v3[i] + v4[i]) for i in nodes],
            [v[i] + c * (a1[i] + 2 * a2[i] + 2 * a3[i] + a4[i]) for i in nodes])


def _finite(values) -> bool:
    return all(math.isfinite(u) for u in values)


def _ordered(chain: CableChain, states: Sequence[CafeState]) -> list[CafeState]:
    by_id = {s.id: s for s in states}
    missing = set(chain.cafe_ids) - set(by_id)
    if missing:
        raise DomainError(f"no state for cafe ids {sorted(missing)}")
    return [by_id[i] for i in chain.cafe_ids]


def step_dynamics(chain: CableChain, states: Sequence[CafeState], dt: float = DEFAULT_DT,
                  g: float = G) -> tuple[list[CafeState], SegmentForces]:
    """Advance every platform's (z, z') by one RK4 step with ``x`` frozen.

    Returns the updated states in chain order and the forces at the new
    geometry.

    Raises:
        NumericalInstabilityError: the step produced a non-finite state.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    ordered = _ordered(chain, states)
    if not ordered:
        return [], segment_forces(chain)
    m = [s.mass for s in ordered]
    if min(m) <= 0:
        raise DomainError("step_dynamics needs positive masses")
    z, v = rk4_step(chain, [s.z for s in ordered], [s.z_dot for s in ordered],
                    m, m, [s.damping for s in ordered], dt, g)
    if not (_finite(z) and _finite(v)):
        raise NumericalInstabilityError(
            f"non-finite state after a {dt:g} s step; use a smaller dt")
    new_states = [replace(s, z=zz, z_dot=vv) for s, zz, vv in zip(ordered, z, v)]
    return new_states, segment_forces(chain, z)


def potential_energy(chain: CableChain, z_free, masses, g: float = G) -> float:
    """Gravitational plus cable energy, relative to the straight cable.

    A constant-tension spring stores ``T_pre * (L - L')``; the elastic part
    stores ``k/2 * max(0, L - L')**2``.
    """
    _, _, elong, _ = _segments(chain, list(z_free))
    stiff = chain._geom[3]
    t_pre = abs(chain.pretension)
    cable = math.fsum(t_pre * e + (0.5 * k * e * e if e > 0 else 0.0)
                      for e, k in zip(elong, stiff))
    return cable + g * math.fsum(m * zz for m, zz in zip(masses, z_free))


def total_energy(chain: CableChain, states: Sequence[CafeState], g: float = G) -> float:
    ordered = _ordered(chain, states)
    m = [s.mass for s in ordered]
    kinetic = math.fsum(0.5 * s.mass * s.z_dot ** 2 for s in ordered)
    return potential_energy(chain, [s.z for s in ordered], m, g) + kinetic


def tangent_stiffness(chain: CableChain, z_free, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the restoring cable force."""
    z_free = np.asarray(z_free, dtype=float)
    n = len(z_free)
    k = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        k[:, j] = -(np.array(_cable_forces(chain, z_free + e))
                    - np.array(_cable_forces(chain, z_free - e))) / (2 * h)
    return 0.5 * (k + k.T)


def modal_range(chain: CableChain, z_free, inertia) -> tuple[float, float]:
    """Lowest and highest linearised natural frequencies (rad/s)."""
    k = tangent_stiffness(chain, z_free)
    s = 1.0 / np.sqrt(np.asarray(inertia, dtype=float))
    lam = np.clip(np.linalg.eigvalsh(k * s[:, None] * s[None, :]), 0.0, None)
    return float(np.sqrt(lam[0])), float(np.sqrt(lam[-1]))


def _force_density_guess(chain: CableChain, load: np.ndarray, z0: np.ndarray,
                         g: float, iters: int = 60) -> np.ndarray:
    """Starting shape from repeated linear solves with frozen tension/length.

    With each segment's ``T / L`` held fixed, vertical balance is linear in
    the node heights. Re-evaluating ``T / L`` and solving again converges
    quickly for taut cables. Returns ``z0`` unchanged if the iteration fails.
    """
    n = len(chain.x)
    free = chain.free
    fixed = np.flatnonzero(chain.fixed)
    idx = np.arange(n - 1)
    y_fixed = chain.base_height[fixed]
    z = z0.copy()
    for _ in range(iters):
        _, length, _, tension = _segments(chain, z.tolist())
        w = np.array(tension) / np.array(length)
        if not np.all(w > 0):
            return z0
        a = np.zeros((n, n))
        a[idx, idx] -= w
        a[idx + 1, idx + 1] -= w
        a[idx, idx + 1] += w
        a[idx + 1, idx] += w
        rhs = load * g - a[np.ix_(free, fixed)] @ y_fixed
        try:
            y_free = np.linalg.solve(a[np.ix_(free, free)], rhs)
        except np.linalg.LinAlgError:
            return z0
        z_new = y_free - chain.base_height[free]
        if not np.all(np.isfinite(z_new)):
            return z0
        done = np.max(np.abs(z_new - z)) < 1e-14
        z = z_new
        if done:
            break
    return z


@dataclass(frozen=True)
class Equilibrium:
    chain: CableChain
    z: np.ndarray
    forces: SegmentForces
    residual: float
    steps: int

    def sag(self) -> dict[int, float]:
        return dict(zip(self.chain.cafe_ids, (float(v) for v in self.z)))


def solve_equilibrium(chain: CableChain, states: Sequence[CafeState],
                      dt: float | None = None, max_steps: int = 200_000,
                      force_tol: float = 1e-6, velocity_tol: float = 1e-8,
                      g: float = G) -> Equilibrium:
    """Static shape of the chain by dynamic relaxation.

    The platforms are integrated with RK4 under damping sized to critically
    damp the softest mode until every velocity is below ``velocity_tol`` and
    every vertical force residual below ``force_tol``. Massless platforms get
    a fictitious inertia; the equilibrium does not depend on inertia.

    ``dt`` defaults to the smaller of 1 ms and half the inverse of the
    stiffest natural frequency.

    Raises:
        NonConvergenceError: ``max_steps`` exhausted or the integration blew up;
            carries the last finite force residual.
    """
    ordered = _ordered(chain, states)
    if not ordered:
        return Equilibrium(chain, np.zeros(0), segment_forces(chain), 0.0, 0)
    load = np.array([s.mass for s in ordered])
    positive = load[load > 0]
    inertia = np.where(load > 0, load, positive.mean() if len(positive) else 1.0)
    weight = (load * g).tolist()

    def residual_of(zz):
        f = _cable_forces(chain, zz)
        return max(abs(a - b) for a, b in zip(f, weight))

    z_arr = _force_density_guess(chain, load, np.array([s.z for s in ordered]), g)
    omega_lo, omega_hi = modal_range(chain, z_arr, inertia)
    if dt is None:
        dt = min(DEFAULT_DT, 0.5 / omega_hi) if omega_hi > 0 else DEFAULT_DT
    damping = (2.0 * inertia * max(omega_lo, 1e-3)).tolist()
    load_l, inertia_l = load.tolist(), inertia.tolist()
    z, v = z_arr.tolist(), [0.0] * len(ordered)
    residual = residual_of(z)

    for step in range(1, max_steps + 1):
        z_new, v_new = rk4_step(chain, z, v, load_l, inertia_l, damping, dt, g)
        if not (_finite(z_new) and _finite(v_new)) or max(map(abs, z_new)) > 1e6:
            raise NonConvergenceError(
                f"relaxation diverged at step {step} with dt={dt:g} s", residual)
        z, v = z_new, v_new
        if max(map(abs, v)) < velocity_tol:
            residual = residual_of(z)
            if residual < force_tol:
                z_out = np.array(z)
                eq_chain = chain.with_z(z_out)
                return Equilibrium(eq_chain, z_out, segment_forces(eq_chain),
                                   residual, step)
        if step % 2000 == 0:
            residual = residual_of(z)
            omega_lo, _ = modal_range(chain, z, inertia)
            damping = (2.0 * inertia * max(omega_lo, 1e-3)).tolist()
    raise NonConvergenceError(
        f"no equilibrium within {max_steps} relaxation steps", residual_of(z))


def sag_compensation(z_equilibrium) -> np.ndarray:
    """Offset an arm must add to reach the anchor line."""
    return -np.asarray(z_equilibrium, dtype=float)
