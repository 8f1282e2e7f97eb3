import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafes.dynamics import (CableChain, build_chain, chain_from_positions, modal_range,
                            potential_energy, sag_compensation, segment_angles,
                            segment_forces, segment_tensions, solve_equilibrium,
                            step_dynamics, total_energy, vertical_acceleration)
from cafes.errors import (DegenerateGeometryError, DomainError, NonConvergenceError,
                          OutOfRangeError)
from cafes.model import KGF, CableSystemConfig, CafeState

from oracles import G, brute_force_minimum, chain_energy, midspan_sag

RIG = CableSystemConfig(1.5, 18148.5, 60 * KGF, load_bearing_cables=3, cables_per_set=2)
EA = RIG.stiffness * RIG.span_length * RIG.total_cables
T0 = RIG.pretension * RIG.total_cables


def cafes_at(*xs, mass=1.4, **kw):
    return [CafeState(i, mass, x, **kw) for i, x in enumerate(xs)]


class TestChain:
    def test_layout(self):
        chain = build_chain(RIG, cafes_at(0.8, 0.7))
        assert list(chain.x) == [0.0, 0.7, 0.8, 1.5]
        assert chain.cafe_ids == (1, 0)
        assert list(chain.rest_length) == pytest.approx([0.7, 0.1, 0.7])

    def test_lumped_cables(self):
        chain = build_chain(RIG, cafes_at(0.75))
        assert chain.pretension == pytest.approx(T0)
        assert chain.axial_rigidity == pytest.approx(EA)
        assert chain.cables == 6

    def test_intermediate_anchors(self):
        cfg = CableSystemConfig(12.0, 1e4, 500.0, anchor_spacing=5.0)
        chain = build_chain(cfg, cafes_at(2.0, 7.0))
        assert list(chain.fixed) == [True, False, True, False, True, True]
        assert chain.sub_spans() == [(0, 2), (2, 4), (4, 5)]

    def test_coincident_platforms(self):
        with pytest.raises(DegenerateGeometryError):
            build_chain(RIG, cafes_at(0.7, 0.7))

    def test_platform_off_span(self):
        with pytest.raises(OutOfRangeError):
            build_chain(RIG, cafes_at(1.6))

    def test_anchor_must_not_sag(self):
        with pytest.raises(DomainError):
            CableChain(x=[0.0, 1.0], z=[0.0, -0.1], fixed=[True, True], cafe_ids=(),
                       axial_rigidity=1e4, pretension=100.0)

    def test_moved_keeps_topology(self):
        chain = build_chain(RIG, cafes_at(0.7, 0.8))
        moved = chain.moved([0.9, 1.0])
        assert list(moved.x) == [0.0, 0.9, 1.0, 1.5]
        assert list(chain.x) == [0.0, 0.7, 0.8, 1.5]
        assert list(moved.seg_stiffness) == pytest.approx([EA / 0.9, EA / 0.1, EA / 0.5])

    def test_moved_rejects_crossing(self):
        chain = build_chain(RIG, cafes_at(0.7, 0.8))
        with pytest.raises(DegenerateGeometryError):
            chain.moved([0.9, 0.85])


class TestForces:
    def test_straight_cable_carries_pretension_only(self):
        f = segment_forces(build_chain(RIG, cafes_at(0.5, 1.0)))
        assert list(f.tension) == pytest.approx([T0] * 3)
        assert list(f.vertical) == pytest.approx([0.0, 0.0])

    def test_sagged_node_is_pulled_up(self):
        chain = build_chain(RIG, cafes_at(0.75))
        f = segment_forces(chain, [-0.002])
        assert f.vertical[0] > 0
        assert all(f.tension > T0)
        assert f.theta_left[0] > 0 and f.theta_right[0] > 0

    def test_vertical_force_matches_geometry(self):
        chain = build_chain(RIG, cafes_at(0.75))
        f = segment_forces(chain, [-0.002])
        length = math.hypot(0.75, 0.002)
        tension = T0 + EA / 0.75 * (length - 0.75)
        assert f.vertical[0] == pytest.approx(2 * tension * 0.002 / length, rel=1e-9)

    def test_shortened_segment_goes_slack_not_compressive(self):
        chain = build_chain(CableSystemConfig(1.0, 1e4, 0.0), cafes_at(0.5))
        f = segment_forces(chain, [0.0])
        assert list(f.tension) == [0.0, 0.0]

    def test_sign_rule(self):
        chain = build_chain(RIG, cafes_at(0.6, 0.9))
        with_z = chain.with_z([0.001, -0.002])
        t_l, t_r = segment_tensions(with_z, with_z.node_of(0))
        assert t_l < 0 and t_r < 0  # above both neighbours
        t_l, t_r = segment_tensions(with_z, with_z.node_of(1))
        assert t_l > 0 and t_r > 0

    def test_angles_point_to_neighbours(self):
        chain = build_chain(RIG, cafes_at(0.5)).with_z([-0.01])
        left, right = segment_angles(chain, 1)
        assert left == pytest.approx(math.atan2(0.01, 0.5))
        assert right == pytest.approx(math.atan2(0.01, 1.0))

    def test_anchor_is_not_a_platform(self):
        with pytest.raises(DomainError):
            segment_angles(build_chain(RIG, cafes_at(0.5)), 0)

    def test_incline_horizontal_residual_vanishes_when_straight(self):
        cfg = replace(RIG, incline_angle=math.radians(10))
        f = segment_forces(build_chain(cfg, cafes_at(0.4, 1.1)))
        assert np.allclose(f.horizontal_residual, 0.0, atol=1e-9)
        assert np.allclose(f.vertical, 0.0, atol=1e-9)

    def test_acceleration_of_straight_cable_is_gravity(self):
        chain = build_chain(RIG, cafes_at(0.75))
        f = segment_forces(chain)
        assert vertical_acceleration(cafes_at(0.75)[0], f) == pytest.approx(-G)

    def test_massless_has_no_acceleration(self):
        f = segment_forces(build_chain(RIG, cafes_at(0.75)))
        with pytest.raises(DomainError):
            vertical_acceleration(CafeState(0, 0.0, 0.75), f)


class TestEquilibrium:
    def test_midspan_oracle(self):
        cafes = cafes_at(0.75)
        eq = solve_equilibrium(build_chain(RIG, cafes), cafes)
        assert -eq.z[0] == pytest.approx(midspan_sag(1.5, 1.4, EA, T0), abs=1e-9)

    def test_rig_sag(self):
        cafes = cafes_at(0.70, 0.80)
        eq = solve_equilibrium(build_chain(RIG, cafes), cafes)
        assert eq.sag()[0] == pytest.approx(-2.7213e-3, abs=1e-6)
        assert eq.sag()[0] == pytest.approx(eq.sag()[1], abs=1e-12)
        assert eq.residual < 1e-6
        assert np.all(sag_compensation(eq.z) > 0)

    def test_no_platforms(self):
        eq = solve_equilibrium(build_chain(RIG, []), [])
        assert eq.sag() == {} and eq.steps == 0

    def test_massless_probe_stays_on_line(self):
        cafes = [CafeState(0, 0.0, 0.75)]
        eq = solve_equilibrium(build_chain(RIG, cafes), cafes)
        assert eq.z[0] == pytest.approx(0.0, abs=1e-12)

    def test_anchor_decouples_sub_spans(self):
        cfg = CableSystemConfig(10.0, 1e4, 300.0, anchor_spacing=5.0)
        alone = cafes_at(2.5)
        both = [CafeState(0, 1.4, 2.5), CafeState(1, 5.0, 7.5)]
        z_alone = solve_equilibrium(build_chain(cfg, alone), alone).sag()[0]
        z_both = solve_equilibrium(build_chain(cfg, both), both).sag()[0]
        assert z_both == pytest.approx(z_alone, abs=1e-12)

    def test_forced_large_step_fails(self):
        cfg = CableSystemConfig(1.5, 1e12, 60 * KGF)
        cafes = cafes_at(0.7, 0.8)
        with pytest.raises(NonConvergenceError) as err:
            solve_equilibrium(build_chain(cfg, cafes), cafes, dt=0.1)
        assert math.isfinite(err.value.residual)

    def test_step_cap(self):
        cafes = cafes_at(0.3, 1.1, z=-0.05)
        with pytest.raises(NonConvergenceError):
            solve_equilibrium(build_chain(RIG, cafes), cafes, max_steps=1,
                              force_tol=0.0)

    def test_missing_state(self):
        chain = build_chain(RIG, cafes_at(0.5))
        with pytest.raises(DomainError):
            solve_equilibrium(chain, [CafeState(7, 1.0, 0.5)])

    @settings(max_examples=50, deadline=None)
    @given(data=st.data())
    def test_matches_energy_oracle(self, data):
        n = data.draw(st.integers(1, 3))
        span = data.draw(st.floats(1.0, 20.0))
        fractions = sorted(data.draw(st.lists(st.floats(0.05, 0.95), min_size=n,
                                              max_size=n)))
        if any(b - a < 0.05 for a, b in zip(fractions, fractions[1:])):
            fractions = [(j + 1) / (n + 1) for j in range(n)]
        masses = data.draw(st.lists(st.floats(0.5, 5.0), min_size=n, max_size=n))
        cfg = CableSystemConfig(span, data.draw(st.floats(5e3, 4e4)),
                                data.draw(st.floats(20.0, 200.0)) * KGF,
                                incline_angle=math.radians(data.draw(st.floats(-10, 10))))
        xs = [f * span for f in fractions]
        cafes = [CafeState(i, m, x) for i, (m, x) in enumerate(zip(masses, xs))]
        eq = solve_equilibrium(build_chain(cfg, cafes), cafes)
        nodes, anchored = [0.0] + xs + [span], [True] + [False] * n + [True]
        ea = cfg.stiffness * span * cfg.total_cables
        t_pre = cfg.pretension * cfg.total_cables

        def energy(z):
            return chain_energy(nodes, anchored, z, masses, ea, t_pre, cfg.incline_angle)

        assert np.max(np.abs(np.array(brute_force_minimum(energy, n)) - eq.z)) < 1e-4

    def test_potential_energy_matches_oracle(self):
        chain = build_chain(RIG, cafes_at(0.4, 0.9))
        z = [-0.003, -0.001]
        ref = chain_energy([0.0, 0.4, 0.9, 1.5], [True, False, False, True], z,
                           [1.4, 1.4], EA, T0)
        assert potential_energy(chain, z, [1.4, 1.4]) == pytest.approx(ref, rel=1e-9)


class TestDynamics:
    def test_rest_at_equilibrium(self):
        cafes = cafes_at(0.7, 0.8)
        chain = build_chain(RIG, cafes)
        eq = solve_equilibrium(chain, cafes)
        states = [replace(c, z=float(z)) for c, z in zip(cafes, eq.z)]
        for _ in range(100):
            states, _ = step_dynamics(chain, states)
        assert max(abs(s.z_dot) for s in states) < 1e-9

    def test_damping_dissipates(self):
        cafes = cafes_at(0.75, z=-0.01)
        chain = build_chain(RIG, cafes)
        e0 = total_energy(chain, cafes)
        states = cafes
        for _ in range(500):
            states, _ = step_dynamics(chain, states)
        assert total_energy(chain, states) < e0

    def test_period_matches_linearisation(self):
        cafes = cafes_at(0.75, damping=0.0)
        chain = build_chain(RIG, cafes)
        z_eq = solve_equilibrium(chain, cafes).z[0]
        _, omega = modal_range(chain, [z_eq], [1.4])
        states = [replace(cafes[0], z=z_eq - 1e-6)]
        crossings, prev, dt = [], states[0].z - z_eq, 1e-4
        for k in range(20000):
            states, _ = step_dynamics(chain, states, dt)
            cur = states[0].z - z_eq
            if prev < 0 <= cur:
                crossings.append(k * dt)
            prev = cur
        period = np.mean(np.diff(crossings))
        assert period == pytest.approx(2 * math.pi / omega, rel=1e-3)

    def test_bad_dt(self):
        cafes = cafes_at(0.75)
        with pytest.raises(DomainError):
            step_dynamics(build_chain(RIG, cafes), cafes, dt=0.0)

    def test_massless_state_rejected(self):
        cafes = [CafeState(0, 0.0, 0.75)]
        with pytest.raises(DomainError):
            step_dynamics(build_chain(RIG, cafes), cafes)


def test_chain_from_positions_defaults_to_straight():
    chain = chain_from_positions(RIG, [5, 6], [0.2, 0.4])
    assert list(chain.z) == [0.0] * 4
    assert chain.node_of(6) == 2
