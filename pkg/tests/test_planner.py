"""Step planning: waypoints, boundary postures, phase trajectories,
behavior dispatch, and the stair-descent reversal property."""

import math

import numpy as np
import pytest

from exogait.behaviors import Behavior
from exogait.geometry import JointLimits, LegGeometry, PlanarPoint
from exogait.kinematics import forward_kinematics
from exogait.parameters import builtin_presets
from exogait.planner import (
    DegenerateStep,
    StepContext,
    boundary_pose,
    compute_waypoints,
    plan_step,
    toe_position,
)

GEOM = LegGeometry()
AH = GEOM.ankle_height
PRESETS = builtin_presets()
FLAT = PRESETS["flat"].params
STAIRS = PRESETS["stairs"].params
SLOPES = PRESETS["slopes"].params
STONES = PRESETS["stepping_stones"].params
CAP = JointLimits().velocity_cap


def standing_context(side="right", x=0.0, z=AH):
    return StepContext(side, PlanarPoint(x, z), PlanarPoint(x, z))


def steady_flat_context():
    return StepContext("left", PlanarPoint(0.0, AH), PlanarPoint(0.4, AH))


def steady_stairs_context():
    return StepContext("left", PlanarPoint(0.0, AH), PlanarPoint(0.29, AH + 0.18))


def sample_channel(chain, dt=0.002):
    n = math.ceil(chain.duration / dt)
    ts = [min(chain.duration, i * dt) for i in range(n + 1)]
    vals = [chain.evaluate(t) for t in ts]
    return ts, [v[0] for v in vals], [v[1] for v in vals]


class TestComputeWaypoints:
    def test_flat_ground_numbers(self):
        wps = compute_waypoints(FLAT, PlanarPoint(0.0, 0.0), PlanarPoint(0.4, 0.0))
        assert (wps[0].x, wps[0].z) == (0.0, 0.0)
        assert (wps[1].x, wps[1].z) == pytest.approx((0.06, 0.1))
        assert (wps[2].x, wps[2].z) == pytest.approx((0.34, 0.1))
        assert (wps[3].x, wps[3].z) == pytest.approx((0.4, 0.0))

    def test_stairs_numbers(self):
        wps = compute_waypoints(STAIRS, PlanarPoint(0.0, 0.0), PlanarPoint(0.29, 0.18))
        assert (wps[1].x, wps[1].z) == pytest.approx((0.058, 0.33))
        assert (wps[2].x, wps[2].z) == pytest.approx((0.232, 0.33))
        assert (wps[3].x, wps[3].z) == pytest.approx((0.29, 0.18))

    def test_midpoint_velocities(self):
        wps = compute_waypoints(FLAT, PlanarPoint(0.0, 0.0), PlanarPoint(0.8, 0.0))
        assert wps[1].vx == pytest.approx(0.8 / FLAT.swing_time)
        assert wps[1].vz == 0.0
        assert wps[2].vx == wps[1].vx
        assert (wps[0].vx, wps[0].vz, wps[3].vx, wps[3].vz) == (0, 0, 0, 0)

    def test_degenerate_step(self):
        with pytest.raises(DegenerateStep):
            compute_waypoints(FLAT, PlanarPoint(0.1, 0.2), PlanarPoint(0.1, 0.2))


class TestBoundaryPose:
    def test_flat_hip_over_leading_trailing_straight(self):
        pose = boundary_pose(
            Behavior.flat_walk(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.4, AH)
        )
        assert pose.hip.x == pytest.approx(0.4)
        assert pose.trailing.knee == pytest.approx(0.0, abs=1e-7)
        # Trailing leg stretched exactly to reach: hip height fixed by geometry.
        reach = GEOM.max_reach
        assert pose.hip.z == pytest.approx(AH + math.sqrt(reach**2 - 0.4**2))

    def test_stairs_hip_midway(self):
        pose = boundary_pose(
            Behavior.stairs_up(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.29, AH + 0.18)
        )
        assert pose.hip.x == pytest.approx(0.145)

    def test_ramp_up_hip_near_trailing(self):
        pose = boundary_pose(
            Behavior.ramp_up(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.31, AH + 0.05)
        )
        assert pose.hip.x == pytest.approx(0.05)

    def test_ramp_down_hip_over_trailing(self):
        pose = boundary_pose(
            Behavior.ramp_down(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.31, AH - 0.05)
        )
        assert pose.hip.x == pytest.approx(0.0)

    def test_flat_feet_together_is_standing(self):
        pose = boundary_pose(
            Behavior.flat_walk(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.0, AH)
        )
        assert pose.trailing.hip == pytest.approx(0.0, abs=1e-7)
        assert pose.trailing.knee == pytest.approx(0.0, abs=1e-7)
        assert pose.hip.z == pytest.approx(AH + GEOM.max_reach)

    def test_flat_foot_ankles(self):
        pose = boundary_pose(
            Behavior.flat_walk(), GEOM, PlanarPoint(0.0, AH), PlanarPoint(0.4, AH)
        )
        for q in (pose.trailing, pose.leading):
            assert q.ankle == pytest.approx(q.knee - q.hip)

    def test_toe_position_flat_and_pitched(self):
        ankle = PlanarPoint(0.0, AH)
        flat_toe = toe_position(GEOM, ankle, 0.0)
        assert flat_toe.x == pytest.approx(GEOM.foot_forward_length)
        assert flat_toe.z == pytest.approx(0.0, abs=1e-12)  # toe tip on the ground
        pitched = toe_position(GEOM, ankle, math.radians(-30.0))
        assert pitched.z < flat_toe.z  # plantar flexion drives the toe down


@pytest.fixture(scope="module")
def flat_plan():
    return plan_step(Behavior.flat_walk(), FLAT, GEOM, steady_flat_context())


class TestFlatStepPlan:
    @pytest.fixture
    def plan(self, flat_plan):
        return flat_plan

    def test_durations(self, plan):
        assert plan.transfer_duration == 0.4
        assert plan.swing_duration == 1.0
        assert plan.swing.duration == pytest.approx(1.0)
        assert plan.transfer.duration == pytest.approx(0.4)
        assert plan.stance.duration == pytest.approx(1.4)

    def test_hip_advances_step_length(self, plan):
        h0 = plan.hip_path.position(0.0)
        h1 = plan.hip_path.position(plan.step_duration)
        assert h1.x - h0.x == pytest.approx(FLAT.step_length, abs=1e-9)

    def test_waypoints_hit_at_scheduled_times(self, plan):
        for wp, t in zip(plan.waypoints, plan.waypoint_times):
            foot = plan.foot_position("swing", t)
            assert math.hypot(foot.x - wp.x, foot.z - wp.z) < 1e-6

    def test_swing_endpoint_velocities_zero(self, plan):
        for name in ("hip", "knee", "ankle"):
            chain = plan.swing.channels[name]
            assert chain.start()[1] == pytest.approx(0.0, abs=1e-12)
            assert chain.end()[1] == pytest.approx(0.0, abs=1e-12)

    def test_swing_phase_hip_single_peak(self, plan):
        _, _, vels = sample_channel(plan.swing.channels["hip"])
        signs = [1 if v > 1e-6 else (-1 if v < -1e-6 else 0) for v in vels]
        changes, last = 0, 0
        for s in signs:
            if s != 0:
                if last and s != last:
                    changes += 1
                last = s
        assert changes == 1

    def test_swing_clearance_and_apex(self, plan):
        dt = 0.002
        min_clear = math.inf
        for i in range(int(plan.swing_duration / dt) + 1):
            t = plan.transfer_duration + min(plan.swing_duration, i * dt)
            foot = plan.foot_position("swing", t)
            clear = (foot.z - AH) - plan.terrain_height(foot.x)
            min_clear = min(min_clear, clear)
        assert min_clear >= -1e-9
        # Designed apex accuracy: clearance at the two midpoint waypoints.
        for idx in (1, 2):
            foot = plan.foot_position("swing", plan.waypoint_times[idx])
            clear = (foot.z - AH) - plan.terrain_height(foot.x)
            assert abs(clear - FLAT.swing_height) <= 0.05 * FLAT.swing_height

    def test_middle_segment_keeps_swing_height(self, plan):
        t2, t3 = plan.waypoint_times[1], plan.waypoint_times[2]
        for t in np.linspace(t2, t3, 50):
            foot = plan.foot_position("swing", t)
            assert foot.z - AH >= FLAT.swing_height - 1e-3

    def test_stance_knee_straightens_monotonically(self, plan):
        _, pos, _ = sample_channel(plan.stance_leg_channels["knee"])
        assert all(b - a <= 1e-9 for a, b in zip(pos, pos[1:]))
        assert math.degrees(pos[-1]) < 1.0

    def test_stance_hip_monotone_decreasing(self, plan):
        _, pos, _ = sample_channel(plan.stance_leg_channels["hip"])
        assert all(b - a <= 1e-9 for a, b in zip(pos, pos[1:]))

    def test_velocity_cap_respected(self, plan):
        for channels in (plan.swing_leg_channels, plan.stance_leg_channels):
            for chain in channels.values():
                _, _, vels = sample_channel(chain)
                assert max(abs(v) for v in vels) <= CAP

    def test_joint_ranges_respected(self, plan):
        limits = JointLimits()
        ranges = {
            "hip": limits.hip_range,
            "knee": limits.knee_range,
            "ankle": limits.ankle_range,
        }
        for channels in (plan.swing_leg_channels, plan.stance_leg_channels):
            for name, chain in channels.items():
                lo, hi = ranges[name]
                _, pos, _ = sample_channel(chain)
                assert all(lo - 1e-9 <= p <= hi + 1e-9 for p in pos)

    def test_command_continuity(self, plan):
        dt = 0.002
        for channels in (plan.swing_leg_channels, plan.stance_leg_channels):
            for chain in channels.values():
                _, pos, _ = sample_channel(chain, dt)
                assert all(abs(b - a) <= CAP * dt for a, b in zip(pos, pos[1:]))

    def test_first_step_from_standing(self):
        plan = plan_step(Behavior.flat_walk(), FLAT, GEOM, standing_context())
        assert plan.swing_foot_goal.x == pytest.approx(0.4)
        h0, h1 = plan.hip_path.position(0.0), plan.hip_path.position(1.4)
        assert h1.x - h0.x == pytest.approx(0.4, abs=1e-9)


class TestTransferPlan:
    def test_toe_off_profile(self):
        plan = plan_step(Behavior.flat_walk(), FLAT, GEOM, steady_flat_context())
        ankle = plan.transfer.channels["trailing_ankle"]
        tau_f = FLAT.fast_toeoff_duration
        # Main quintic lands on -toe_off_angle, the fast impulse deepens it.
        p_main = ankle.evaluate(FLAT.transfer_time - tau_f)[0]
        assert p_main == pytest.approx(-FLAT.toe_off_angle, abs=1e-12)
        p_end = ankle.evaluate(FLAT.transfer_time)[0]
        assert p_end == pytest.approx(-(FLAT.toe_off_angle + FLAT.fast_toeoff_extra), abs=1e-12)

    def test_zero_toe_off_angle_leaves_fast_impulse(self):
        from dataclasses import replace

        params = replace(FLAT, toe_off_angle=0.0)
        plan = plan_step(Behavior.flat_walk(), params, GEOM, steady_flat_context())
        ankle = plan.transfer.channels["trailing_ankle"]
        start = ankle.start()[0]
        before_impulse = ankle.evaluate(params.transfer_time - params.fast_toeoff_duration)[0]
        assert before_impulse == pytest.approx(0.0, abs=1e-12)
        end = ankle.end()[0]
        assert end == pytest.approx(-params.fast_toeoff_extra, abs=1e-12)
        assert start != pytest.approx(end)

    def test_leading_hip_pivot_consistency(self):
        plan = plan_step(Behavior.flat_walk(), FLAT, GEOM, steady_flat_context())
        hip_chain = plan.transfer.channels["leading_hip"]
        # Rigid pivot: hip frame displacement matches the hip-angle change.
        theta0 = hip_chain.start()[0]
        theta1 = hip_chain.end()[0]
        psi = theta0 - theta1
        assert psi > 0.0
        h0 = plan.hip_path.position(0.0)
        h1 = plan.hip_path.position(plan.transfer_duration)
        r = math.hypot(h0.x - plan.stance_foot.x, h0.z - plan.stance_foot.z)
        phi0 = math.atan2(h0.x - plan.stance_foot.x, h0.z - plan.stance_foot.z)
        assert h1.x - plan.stance_foot.x == pytest.approx(r * math.sin(phi0 + psi), abs=1e-9)
        assert h1.z - plan.stance_foot.z == pytest.approx(r * math.cos(phi0 + psi), abs=1e-9)

    def test_toe_off_exceeding_ankle_range_rejected(self):
        from dataclasses import replace

        from exogait.geometry import JointLimitExceeded

        params = replace(FLAT, toe_off_angle=math.radians(50.0))
        with pytest.raises(JointLimitExceeded):
            plan_step(Behavior.flat_walk(), params, GEOM, steady_flat_context())

    def test_trailing_foot_never_penetrates(self):
        # Ankle joint stays at/above plant height through transfer, within
        # the knot-interpolation error of the lift curve (a few microns).
        plan = plan_step(Behavior.flat_walk(), FLAT, GEOM, steady_flat_context())
        for t in np.linspace(0.0, plan.transfer_duration, 100):
            foot = plan.foot_position("swing", t)
            assert foot.z >= AH - 1e-5


class TestBehaviorDispatch:
    def test_stairs_step_timing(self):
        plan = plan_step(Behavior.stairs_up(), STAIRS, GEOM, steady_stairs_context())
        assert plan.step_duration == pytest.approx(1.1 + 1.6)

    def test_stairs_transfer_ends_over_leading_ankle(self):
        plan = plan_step(Behavior.stairs_up(), STAIRS, GEOM, steady_stairs_context())
        hip = plan.hip_path.position(plan.transfer_duration)
        assert hip.x == pytest.approx(plan.stance_foot.x, abs=1e-9)

    def test_stairs_hip_rises_during_transfer(self):
        plan = plan_step(Behavior.stairs_up(), STAIRS, GEOM, steady_stairs_context())
        z0 = plan.hip_path.position(0.0).z
        z1 = plan.hip_path.position(plan.transfer_duration).z
        assert z1 > z0

    def test_stones_length_threaded(self):
        b = Behavior.stepping_stones(0.5)
        plan = plan_step(b, STONES, GEOM, standing_context())
        assert plan.params.step_length == 0.5
        assert plan.swing_foot_goal.x == pytest.approx(0.5)

    def test_stones_out_of_range_rejected(self):
        with pytest.raises(Exception):
            Behavior.stepping_stones(0.7)
        with pytest.raises(Exception):
            Behavior.stepping_stones(0.34)

    def test_stones_boundary_lengths_accepted(self):
        for length in (0.35, 0.69):
            b = Behavior.stepping_stones(length)
            ctx = StepContext("left", PlanarPoint(0.0, AH), PlanarPoint(length, AH))
            plan = plan_step(b, STONES, GEOM, ctx)
            assert plan.swing_foot_goal.x == pytest.approx(2 * length)

    def test_ramp_down_omits_fast_impulse(self):
        ctx = StepContext("left", PlanarPoint(0.0, AH), PlanarPoint(0.31, AH - 0.05))
        plan = plan_step(Behavior.ramp_down(), SLOPES, GEOM, ctx)
        ankle = plan.transfer.channels["trailing_ankle"]
        assert len(ankle.segments) == 1
        assert ankle.end()[0] == pytest.approx(-SLOPES.toe_off_angle, abs=1e-12)

    def test_ramp_up_keeps_fast_impulse(self):
        ctx = StepContext("left", PlanarPoint(0.0, AH), PlanarPoint(0.31, AH + 0.05))
        plan = plan_step(Behavior.ramp_up(), SLOPES, GEOM, ctx)
        assert len(plan.transfer.channels["trailing_ankle"].segments) == 2

    def test_stand_plans_nothing(self):
        from exogait.planner import PlanningError

        with pytest.raises(PlanningError):
            plan_step(Behavior.stand(), FLAT, GEOM, standing_context())

    def test_parameter_change_only_affects_next_plan(self):
        from dataclasses import replace

        ctx = steady_flat_context()
        p_a = plan_step(Behavior.flat_walk(), FLAT, GEOM, ctx)
        tweaked = replace(FLAT, swing_height=0.12)
        p_b = plan_step(Behavior.flat_walk(), tweaked, GEOM, ctx)
        p_a2 = plan_step(Behavior.flat_walk(), FLAT, GEOM, ctx)
        assert p_b.waypoints[1].z != p_a.waypoints[1].z
        assert p_a2.waypoints == p_a.waypoints  # pure function of inputs


class TestStairsDescent:
    def test_descent_equals_reversed_ascent_without_toe_off(self):
        from exogait.planner import _plan_forward_step

        descent = plan_step(
            Behavior.stairs_down(),
            STAIRS,
            GEOM,
            StepContext("right", PlanarPoint(0.29, AH + 0.18), PlanarPoint(0.0, AH)),
        )
        ascent = _plan_forward_step(
            Behavior.stairs_up(),
            Behavior.stairs_up().resolve_params(STAIRS).validated(),
            GEOM,
            StepContext("right", PlanarPoint(-0.29, AH - 0.18), PlanarPoint(0.0, AH)),
            JointLimits(),
            0.05,
            goal=PlanarPoint(0.29, AH + 0.18),
            include_toe_off=False,
        )
        duration = descent.step_duration
        worst = 0.0
        for i in range(int(duration / 0.002) + 1):
            t = min(duration, i * 0.002)
            for channels_d, channels_a in (
                (descent.swing_leg_channels, ascent.swing_leg_channels),
                (descent.stance_leg_channels, ascent.stance_leg_channels),
            ):
                for name in ("hip", "knee", "ankle"):
                    d = channels_d[name].evaluate(t)[0]
                    a = channels_a[name].evaluate(duration - t)[0]
                    worst = max(worst, abs(d - a))
        assert worst < 1e-9

    def test_descent_phase_order_and_no_toe_off(self):
        descent = plan_step(
            Behavior.stairs_down(),
            STAIRS,
            GEOM,
            StepContext("right", PlanarPoint(0.29, AH + 0.18), PlanarPoint(0.0, AH)),
        )
        assert descent.phase_order == ("swing", "transfer")
        ankle = descent.transfer.channels["trailing_ankle"]
        _, pos, _ = sample_channel(ankle)
        assert max(pos) - min(pos) < 1e-12  # held, no toe-off segment

    def test_descent_goal_descends_one_tread(self):
        descent = plan_step(
            Behavior.stairs_down(),
            STAIRS,
            GEOM,
            StepContext("right", PlanarPoint(0.29, AH + 0.18), PlanarPoint(0.0, AH)),
        )
        assert descent.swing_foot_goal.x == pytest.approx(-0.29)
        assert descent.swing_foot_goal.z == pytest.approx(AH - 0.18)


class TestApexComparison:
    def test_stairs_swing_knee_peak_exceeds_flat(self):
        flat_plan = plan_step(Behavior.flat_walk(), FLAT, GEOM, steady_flat_context())
        stairs_plan = plan_step(Behavior.stairs_up(), STAIRS, GEOM, steady_stairs_context())
        _, flat_knee, _ = sample_channel(flat_plan.swing_leg_channels["knee"])
        _, stairs_knee, _ = sample_channel(stairs_plan.swing_leg_channels["knee"])
        assert max(stairs_knee) > max(flat_knee)
