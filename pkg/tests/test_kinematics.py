"""Kinematics oracles: independent trig evaluation, FK/IK round trips,
Jacobian vs. finite differences."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exogait.geometry import JointAngles, LegGeometry, PlanarPoint
from exogait.kinematics import (
    SingularJacobian,
    UnreachableTarget,
    flat_foot_ankle,
    foot_pitch,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    jacobian_determinant,
    joint_velocities_from_cartesian,
    near_singular,
)

GEOM = LegGeometry(thigh_length=0.44, shank_length=0.43)


def oracle_fk(geom, hip, knee):
    """Independent two-link evaluation via complex rotations: each link is a
    downward unit vector rotated forward by its world angle (x + iz plane,
    counterclockwise rotation moves the hanging link toward +x)."""
    down = -1j
    thigh = geom.thigh_length * down * cmath.exp(1j * hip)
    shank = geom.shank_length * down * cmath.exp(1j * (hip - knee))
    ankle = thigh + shank
    return ankle.real, ankle.imag


class TestForwardKinematics:
    def test_straight_leg_hangs_down(self):
        p = forward_kinematics(GEOM, JointAngles(0.0, 0.0, 0.0))
        assert p.x == pytest.approx(0.0, abs=1e-15)
        assert p.z == pytest.approx(-0.87, abs=1e-15)

    def test_horizontal_straight_leg(self):
        p = forward_kinematics(GEOM, JointAngles(math.radians(90), 0.0, 0.0))
        assert p.x == pytest.approx(0.87, abs=1e-12)
        assert p.z == pytest.approx(0.0, abs=1e-12)

    def test_bent_pose_against_oracle(self):
        q = JointAngles(math.radians(30), math.radians(60), 0.0)
        p = forward_kinematics(GEOM, q)
        ox, oz = oracle_fk(GEOM, q.hip, q.knee)
        assert p.x == pytest.approx(ox, abs=1e-12)
        assert p.z == pytest.approx(oz, abs=1e-12)
        # Frozen values from the oracle, evaluated ahead of the build.
        assert p.x == pytest.approx(0.005, abs=1e-12)
        assert p.z == pytest.approx(-0.7534421012924616, abs=1e-12)

    def test_random_poses_against_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            hip = rng.uniform(-1.0, 1.4)
            knee = rng.uniform(0.0, 2.2)
            p = forward_kinematics(GEOM, JointAngles(hip, knee, 0.0))
            ox, oz = oracle_fk(GEOM, hip, knee)
            assert abs(p.x - ox) < 1e-12
            assert abs(p.z - oz) < 1e-12

    @given(
        hip=st.floats(-1.0, 1.4),
        knee=st.floats(0.0, 2.2),
        d_hip=st.floats(-0.01, 0.01),
        d_knee=st.floats(-0.01, 0.01),
    )
    @settings(max_examples=300, deadline=None)
    def test_lipschitz_continuity(self, hip, knee, d_hip, d_knee):
        p1 = forward_kinematics(GEOM, JointAngles(hip, knee, 0.0))
        p2 = forward_kinematics(GEOM, JointAngles(hip + d_hip, knee + d_knee, 0.0))
        moved = math.hypot(p2.x - p1.x, p2.z - p1.z)
        bound = GEOM.max_reach * (abs(d_hip) + abs(d_knee)) + 1e-12
        assert moved <= bound


class TestInverseKinematics:
    def test_full_extension(self):
        q = inverse_kinematics(GEOM, PlanarPoint(0.0, -0.87))
        assert q.hip == pytest.approx(0.0, abs=1e-7)
        assert q.knee == pytest.approx(0.0, abs=1e-7)

    def test_beyond_reach_rejected(self):
        with pytest.raises(UnreachableTarget):
            inverse_kinematics(GEOM, PlanarPoint(0.0, -0.88))

    def test_inside_inner_circle_rejected(self):
        with pytest.raises(UnreachableTarget):
            inverse_kinematics(GEOM, PlanarPoint(0.0, -0.005))

    def test_flat_step_midpoint_round_trip(self):
        target = PlanarPoint(0.06, -0.77)
        q = inverse_kinematics(GEOM, target)
        p = forward_kinematics(GEOM, q)
        assert math.hypot(p.x - target.x, p.z - target.z) < 1e-9

    def test_round_trip_annulus(self):
        rng = np.random.default_rng(11)
        count = 0
        while count < 1000:
            r = rng.uniform(GEOM.min_reach + 0.002, GEOM.max_reach - 0.002)
            ang = rng.uniform(-math.pi, math.pi)
            target = PlanarPoint(r * math.sin(ang), -r * math.cos(ang))
            q = inverse_kinematics(GEOM, target)
            p = forward_kinematics(GEOM, q)
            assert math.hypot(p.x - target.x, p.z - target.z) < 1e-9
            assert q.knee >= 0.0
            count += 1

    def test_ankle_passthrough(self):
        q = inverse_kinematics(GEOM, PlanarPoint(0.06, -0.77), ankle=0.25)
        assert q.ankle == 0.25


class TestJacobian:
    def test_determinant_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            q = JointAngles(rng.uniform(-1, 1.4), rng.uniform(0, 2.2), 0.0)
            det = jacobian_determinant(GEOM, q)
            assert det == pytest.approx(
                GEOM.thigh_length * GEOM.shank_length * math.sin(q.knee), abs=1e-14
            )

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        h = 1e-7
        checked = 0
        while checked < 1000:
            q = JointAngles(rng.uniform(-1.0, 1.4), rng.uniform(0.1, 2.2), 0.0)
            (j11, j12), (j21, j22) = jacobian(GEOM, q)
            p_hp = forward_kinematics(GEOM, JointAngles(q.hip + h, q.knee, 0))
            p_hm = forward_kinematics(GEOM, JointAngles(q.hip - h, q.knee, 0))
            p_kp = forward_kinematics(GEOM, JointAngles(q.hip, q.knee + h, 0))
            p_km = forward_kinematics(GEOM, JointAngles(q.hip, q.knee - h, 0))
            fd = (
                ((p_hp.x - p_hm.x) / (2 * h), (p_kp.x - p_km.x) / (2 * h)),
                ((p_hp.z - p_hm.z) / (2 * h), (p_kp.z - p_km.z) / (2 * h)),
            )
            for a, b in zip((j11, j12, j21, j22), (fd[0][0], fd[0][1], fd[1][0], fd[1][1])):
                assert abs(a - b) <= 1e-6 * max(1.0, abs(b))
            checked += 1


class TestJointVelocities:
    def test_zero_maps_to_zero(self):
        q = JointAngles(math.radians(20), math.radians(40), 0.0)
        rates = joint_velocities_from_cartesian(GEOM, q, PlanarPoint(0, 0, 0.0, 0.0))
        assert rates == (0.0, 0.0)

    def test_finite_difference_oracle(self):
        # Move the joints along the returned rates for a tiny time and check
        # the ankle moved with the requested Cartesian velocity.
        q = JointAngles(math.radians(30), math.radians(60), 0.0)
        v = PlanarPoint(0, 0, 0.1, 0.0)
        hip_rate, knee_rate = joint_velocities_from_cartesian(GEOM, q, v)
        eps = 1e-6
        p0 = forward_kinematics(GEOM, JointAngles(q.hip - eps * hip_rate, q.knee - eps * knee_rate, 0))
        p1 = forward_kinematics(GEOM, JointAngles(q.hip + eps * hip_rate, q.knee + eps * knee_rate, 0))
        vx = (p1.x - p0.x) / (2 * eps)
        vz = (p1.z - p0.z) / (2 * eps)
        assert vx == pytest.approx(0.1, abs=1e-7)
        assert vz == pytest.approx(0.0, abs=1e-7)

    def test_consistency_with_jacobian(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            q = JointAngles(rng.uniform(-1, 1.4), rng.uniform(0.15, 2.2), 0.0)
            v = PlanarPoint(0, 0, rng.uniform(-1, 1), rng.uniform(-1, 1))
            hip_rate, knee_rate = joint_velocities_from_cartesian(GEOM, q, v)
            (j11, j12), (j21, j22) = jacobian(GEOM, q)
            assert j11 * hip_rate + j12 * knee_rate == pytest.approx(v.vx, abs=1e-9)
            assert j21 * hip_rate + j22 * knee_rate == pytest.approx(v.vz, abs=1e-9)

    def test_singular_at_straight_knee(self):
        q = JointAngles(1e-4, 1e-5, 0.0)
        assert near_singular(q)
        with pytest.raises(SingularJacobian):
            joint_velocities_from_cartesian(GEOM, q, PlanarPoint(0, 0, 0.1, 0.0))


class TestFootHelpers:
    def test_flat_foot_zero_at_standing(self):
        assert flat_foot_ankle(0.0, 0.0) == 0.0
        assert foot_pitch(JointAngles(0.0, 0.0, 0.0)) == 0.0

    def test_flat_foot_consistency(self):
        hip, knee = math.radians(-20), math.radians(15)
        ankle = flat_foot_ankle(hip, knee)
        assert foot_pitch(JointAngles(hip, knee, ankle)) == pytest.approx(0.0, abs=1e-15)
