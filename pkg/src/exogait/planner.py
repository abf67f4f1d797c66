"""Per-step trajectory planning for all walking behaviors.

A step runs transfer (double support, toe-off) then swing (single support).
The planner works in world coordinates (x forward, z up, ankle-joint
positions) and converts swing waypoints to joint space with inverse
kinematics, exactly once per step, at plan time.  Sampling a plan is cheap
polynomial evaluation, so the engine can tick at control rate.

Step anatomy for a forward behavior:

* At each step boundary the hip sits at a behavior-specific horizontal
  offset between the planted ankles, at the greatest height both legs can
  still reach, which leaves the binding leg straight.
* Transfer rotates the body rigidly about the leading ankle (leading knee
  held) while the trailing ankle plantar flexes into toe-off, finishing
  with a short fast extra plantar-flexion impulse.  The trailing foot rolls
  onto its toe: its hip/knee channels follow the toe-pinned closed chain,
  so the heel rises instead of the foot dragging through the ground.
* Swing straightens and pivots the stance leg (which carries the hip frame
  forward) while the free leg tracks the Cartesian waypoint plan, converted
  to hip/knee minimum-jerk segments with Jacobian-mapped knot velocities.

Stair descent is walked backwards and is planned literally as the time
reversal of the matching ascent step with the toe-off segments left out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .behaviors import Behavior, BehaviorKind
from .geometry import JointAngles, JointLimits, LegGeometry, PlanarPoint
from .kinematics import (
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    joint_velocities_from_cartesian,
)
from .minjerk import JointTrajectory, QuinticSegment, SegmentChain, fit_segment, hold_segment
from .parameters import GaitParameters

#: Horizontal gap kept between the hips and the trailing foot's vertical on
#: ramp ascent ("slightly in front of the trailing foot"), meters.
RAMP_STAGGER = 0.05

#: Minimum share of the swing time any of the three waypoint segments may
#: get; pure distance-proportional allocation can squeeze the short outer
#: segments enough to brush the actuator speed limit.
MIN_SEGMENT_FRACTION = 0.2

#: Cap on the body lean reached while pivoting about the leading ankle.
MAX_PIVOT_LEAN = math.radians(45.0)

#: Knots used to trace the trailing leg's lift during transfer (the pointing
#: curve is not polynomial; denser knots shrink interpolation error).
_TRANSFER_KNOTS = 16


class PlanningError(ValueError):
    """The requested step cannot be realized by the leg geometry."""


class DegenerateStep(PlanningError):
    """Swing start and goal coincide."""


class UnreachableWaypoint(PlanningError):
    """A swing waypoint lies outside the leg workspace."""

    def __init__(self, index: int, point: PlanarPoint, reason: str):
        super().__init__(
            f"waypoint {index} at ({point.x:.3f}, {point.z:.3f}) unreachable: {reason}"
        )
        self.index = index


def compute_waypoints(
    params: GaitParameters, start: PlanarPoint, goal: PlanarPoint
) -> tuple[PlanarPoint, PlanarPoint, PlanarPoint, PlanarPoint]:
    """The four swing waypoints with their Cartesian velocities.

    The two midpoints sit at ``pct_back`` / ``100 - pct_front`` percent of
    the horizontal span, lifted ``swing_height`` above the higher endpoint;
    they carry the span-average horizontal velocity and zero vertical
    velocity.  Endpoints keep zero velocity.
    """
    if start.distance_to(goal) == 0.0:
        raise DegenerateStep(f"swing start and goal coincide at ({start.x:.3f}, {start.z:.3f})")
    span_x = goal.x - start.x
    apex_z = max(start.z, goal.z) + params.swing_height
    vx_mid = span_x / params.swing_time
    wp1 = PlanarPoint(start.x, start.z, 0.0, 0.0)
    wp2 = PlanarPoint(start.x + span_x * params.pct_back / 100.0, apex_z, vx_mid, 0.0)
    wp3 = PlanarPoint(start.x + span_x * (1.0 - params.pct_front / 100.0), apex_z, vx_mid, 0.0)
    wp4 = PlanarPoint(goal.x, goal.z, 0.0, 0.0)
    return (wp1, wp2, wp3, wp4)


@dataclass(frozen=True)
class BoundaryPose:
    """Whole-body pose at a step boundary (both feet planted, at rest)."""

    hip: PlanarPoint
    trailing: JointAngles
    leading: JointAngles


def boundary_pose(
    behavior: Behavior,
    geom: LegGeometry,
    trailing_ankle: PlanarPoint,
    leading_ankle: PlanarPoint,
    ramp_stagger: float = RAMP_STAGGER,
) -> BoundaryPose:
    """Stance posture between steps for the given behavior.

    Horizontal hip placement: over the leading ankle for flat walking and
    stepping stones, midway between the feet on stairs, just ahead of the
    trailing foot on ramp ascent, over the trailing foot on ramp descent.
    The hip height is the largest both legs can reach.  Ankle angles are
    flat-foot consistent.
    """
    sep = leading_ankle.x - trailing_ankle.x
    if sep < -1e-12:
        raise PlanningError("leading ankle must not be behind the trailing ankle")
    sep = max(sep, 0.0)
    kind = behavior.kind
    if kind in (BehaviorKind.FLAT_WALK, BehaviorKind.STEPPING_STONES, BehaviorKind.STAND):
        setback = 0.0
    elif kind in (BehaviorKind.STAIRS_UP, BehaviorKind.STAIRS_DOWN):
        setback = sep / 2.0
    elif kind is BehaviorKind.RAMP_UP:
        setback = min(max(sep - ramp_stagger, 0.0), sep)
    elif kind is BehaviorKind.RAMP_DOWN:
        setback = sep
    else:
        raise AssertionError(f"unhandled behavior {kind}")
    hip_x = leading_ankle.x - setback

    reach = geom.max_reach
    heights = []
    for ankle in (trailing_ankle, leading_ankle):
        dx = hip_x - ankle.x
        if abs(dx) > reach:
            raise PlanningError(
                f"hip at x={hip_x:.3f} is {abs(dx):.3f} m from the ankle at x={ankle.x:.3f}; "
                f"beyond the {reach:.3f} m leg reach (step too long for this geometry)"
            )
        heights.append(ankle.z + math.sqrt(reach * reach - dx * dx))
    hip_z = min(heights)
    hip = PlanarPoint(hip_x, hip_z)

    def planted(ankle: PlanarPoint) -> JointAngles:
        q = inverse_kinematics(geom, PlanarPoint(ankle.x - hip.x, ankle.z - hip.z))
        return JointAngles(hip=q.hip, knee=q.knee, ankle=q.knee - q.hip)

    return BoundaryPose(hip=hip, trailing=planted(trailing_ankle), leading=planted(leading_ankle))


def toe_position(geom: LegGeometry, ankle: PlanarPoint, pitch: float) -> PlanarPoint:
    """World toe-tip position for an ankle at the given foot pitch."""
    f, ah = geom.foot_forward_length, geom.ankle_height
    return PlanarPoint(
        ankle.x + f * math.cos(pitch) + ah * math.sin(pitch),
        ankle.z + f * math.sin(pitch) - ah * math.cos(pitch),
    )


def _pivot_angle_for_advance(r: float, phi0: float, advance: float) -> float:
    """Forward rotation about the leading ankle producing ``advance`` m of
    hip travel, capped at MAX_PIVOT_LEAN of final body lean."""
    if advance <= 0.0:
        return 0.0
    s_target = math.sin(phi0) + advance / r
    s_target = min(s_target, math.sin(MAX_PIVOT_LEAN))
    phi1 = math.asin(min(1.0, s_target))
    return max(phi1 - phi0, 0.0)


def _segment_shares(distances: list[float], floor: float) -> list[float]:
    total = sum(distances)
    if total <= 0.0:
        raise PlanningError("zero-length waypoint polyline")
    shares = [max(d / total, floor) for d in distances]
    norm = sum(shares)
    return [s / norm for s in shares]


def _difference_chain(a: SegmentChain, b: SegmentChain) -> SegmentChain:
    """Channel computing a(t) - b(t); segment durations must line up."""
    segs = []
    for sa, sb in zip(a.segments, b.segments):
        if abs(sa.duration - sb.duration) > 1e-12:
            raise ValueError("segment durations disagree")
        coeffs = tuple(ca - cb for ca, cb in zip(sa.coefficients, sb.coefficients))
        segs.append(QuinticSegment(coeffs, sa.duration))
    return SegmentChain(tuple(segs))


def _knot_chain(values: list[float], step: float) -> SegmentChain:
    """Quintic chain through evenly spaced knots, central-difference knot
    velocities, at rest at both ends."""
    n = len(values)
    vels = [0.0] * n
    for i in range(1, n - 1):
        vels[i] = (values[i + 1] - values[i - 1]) / (2.0 * step)
    segs = tuple(
        fit_segment(values[i], vels[i], values[i + 1], vels[i + 1], step) for i in range(n - 1)
    )
    return SegmentChain(segs)


@dataclass(frozen=True)
class HipPath:
    """Hip-frame trajectory over one step.

    Transfer: rigid rotation of radius ``pivot_radius`` about the leading
    ankle.  Swing: anchored to the planted stance ankle through the stance
    leg's forward kinematics.
    """

    geom: LegGeometry
    transfer_duration: float
    swing_duration: float
    pivot_center: PlanarPoint
    pivot_radius: float
    pivot_phi0: float
    pivot_chain: SegmentChain
    stance_ankle: PlanarPoint
    stance_hip_chain: SegmentChain
    stance_knee_chain: SegmentChain
    time_reversed: bool = False

    @property
    def duration(self) -> float:
        return self.transfer_duration + self.swing_duration

    def _forward_eval(self, t: float) -> tuple[PlanarPoint, tuple[float, float]]:
        if t <= self.transfer_duration:
            psi, dpsi, _ = self.pivot_chain.evaluate(t)
            phi = self.pivot_phi0 + psi
            x = self.pivot_center.x + self.pivot_radius * math.sin(phi)
            z = self.pivot_center.z + self.pivot_radius * math.cos(phi)
            vx = self.pivot_radius * math.cos(phi) * dpsi
            vz = -self.pivot_radius * math.sin(phi) * dpsi
            return PlanarPoint(x, z), (vx, vz)
        ts = min(t - self.transfer_duration, self.swing_duration)
        hip_angle, hip_rate, _ = self.stance_hip_chain.evaluate(ts)
        knee_angle, knee_rate, _ = self.stance_knee_chain.evaluate(ts)
        q = JointAngles(hip_angle, knee_angle)
        fk = forward_kinematics(self.geom, q)
        (j11, j12), (j21, j22) = jacobian(self.geom, q)
        vx = -(j11 * hip_rate + j12 * knee_rate)
        vz = -(j21 * hip_rate + j22 * knee_rate)
        return PlanarPoint(self.stance_ankle.x - fk.x, self.stance_ankle.z - fk.z), (vx, vz)

    def position(self, t: float) -> PlanarPoint:
        t = min(max(t, 0.0), self.duration)
        if self.time_reversed:
            return self._forward_eval(self.duration - t)[0]
        return self._forward_eval(t)[0]

    def velocity(self, t: float) -> tuple[float, float]:
        t = min(max(t, 0.0), self.duration)
        if self.time_reversed:
            _, (vx, vz) = self._forward_eval(self.duration - t)
            return (-vx, -vz)
        return self._forward_eval(t)[1]

    def reversed(self) -> "HipPath":
        return replace(self, time_reversed=not self.time_reversed)


@dataclass(frozen=True)
class StepContext:
    """Engine-side facts the planner needs: where the feet are and which
    one swings next.  Ankle-joint world positions, both planted."""

    swing_side: str  # "left" | "right"
    swing_foot: PlanarPoint
    stance_foot: PlanarPoint

    def __post_init__(self) -> None:
        if self.swing_side not in ("left", "right"):
            raise ValueError(f"swing_side must be 'left' or 'right', got {self.swing_side!r}")


@dataclass(frozen=True)
class StepPlan:
    """Fully assembled joint trajectories for one step.

    ``swing``/``stance``/``transfer`` are the semantic views (swing spans
    the swing phase, transfer the transfer phase, stance the whole step);
    ``swing_leg_channels``/``stance_leg_channels`` are the engine-ready
    full-step channels per physical leg.  ``phase_order`` is
    ("transfer", "swing") for forward behaviors and flipped for backward
    stair descent.
    """

    behavior: Behavior
    params: GaitParameters
    geom: LegGeometry
    swing_side: str
    transfer_duration: float
    swing_duration: float
    phase_order: tuple[str, str]
    swing: JointTrajectory
    stance: JointTrajectory
    transfer: JointTrajectory
    swing_leg_channels: dict[str, SegmentChain]
    stance_leg_channels: dict[str, SegmentChain]
    hip_path: HipPath
    waypoints: tuple[PlanarPoint, PlanarPoint, PlanarPoint, PlanarPoint]
    waypoint_times: tuple[float, float, float, float]
    start_pose: BoundaryPose
    end_pose: BoundaryPose
    swing_foot_start: PlanarPoint
    swing_foot_goal: PlanarPoint
    stance_foot: PlanarPoint

    @property
    def step_duration(self) -> float:
        return self.transfer_duration + self.swing_duration

    def phase_at(self, t: float) -> tuple[str, float, float]:
        """(phase name, time into phase, phase duration) at step time t.

        The switch instant itself belongs to the first phase, with a small
        tolerance so tick-accumulated times land on the intended side.
        """
        first, second = self.phase_order
        d_first = self.transfer_duration if first == "transfer" else self.swing_duration
        if t <= d_first + 1e-9:
            return (first, min(t, d_first), d_first)
        d_second = self.step_duration - d_first
        return (second, min(t - d_first, d_second), d_second)

    def joints_at(self, t: float) -> dict[str, tuple[JointAngles, tuple[float, float, float]]]:
        """Commanded angles and rates for both leg roles at step time t."""
        t = min(max(t, 0.0), self.step_duration)
        out = {}
        for role, channels in (
            ("swing", self.swing_leg_channels),
            ("stance", self.stance_leg_channels),
        ):
            vals = {name: chain.evaluate(t) for name, chain in channels.items()}
            angles = JointAngles(vals["hip"][0], vals["knee"][0], vals["ankle"][0])
            rates = (vals["hip"][1], vals["knee"][1], vals["ankle"][1])
            out[role] = (angles, rates)
        return out

    def foot_position(self, role: str, t: float) -> PlanarPoint:
        """World ankle position of the given role's foot at step time t."""
        angles, _ = self.joints_at(t)[role]
        hip = self.hip_path.position(t)
        fk = forward_kinematics(self.geom, angles)
        return PlanarPoint(hip.x + fk.x, hip.z + fk.z)

    def terrain_height(self, x: float) -> float:
        """Ground (sole-level) height under x for this step's local terrain."""
        ah = self.geom.ankle_height
        marks = sorted(
            {
                (self.swing_foot_start.x, self.swing_foot_start.z - ah),
                (self.stance_foot.x, self.stance_foot.z - ah),
                (self.swing_foot_goal.x, self.swing_foot_goal.z - ah),
            }
        )
        if self.behavior.kind in (BehaviorKind.RAMP_UP, BehaviorKind.RAMP_DOWN):
            slope = self.params.step_rise / self.params.step_length
            x0, z0 = marks[len(marks) // 2]
            return z0 + slope * (x - x0)
        level = marks[0][1]
        for (xa, _), (xb, zb) in zip(marks, marks[1:]):
            if x >= (xa + xb) / 2.0:
                level = zb
        return level

    def reversed(self) -> "StepPlan":
        """The same step played backwards (stair-descent construction)."""
        d = self.step_duration
        rev_waypoints = tuple(
            PlanarPoint(p.x, p.z, -p.vx, -p.vz) for p in reversed(self.waypoints)
        )
        rev_times = tuple(d - t for t in reversed(self.waypoint_times))
        return replace(
            self,
            phase_order=(self.phase_order[1], self.phase_order[0]),
            swing=self.swing.reversed(),
            stance=self.stance.reversed(),
            transfer=self.transfer.reversed(),
            swing_leg_channels={k: c.reversed() for k, c in self.swing_leg_channels.items()},
            stance_leg_channels={k: c.reversed() for k, c in self.stance_leg_channels.items()},
            hip_path=self.hip_path.reversed(),
            waypoints=rev_waypoints,
            waypoint_times=rev_times,
            start_pose=self.end_pose,
            end_pose=self.start_pose,
            swing_foot_start=self.swing_foot_goal,
            swing_foot_goal=self.swing_foot_start,
        )


@dataclass(frozen=True)
class _TransferBuild:
    trajectory: JointTrajectory  # trailing_ankle + leading_hip view
    pivot_chain: SegmentChain
    pivot_angle: float
    trailing_hip_chain: SegmentChain
    trailing_knee_chain: SegmentChain
    trailing_end: JointAngles  # hip/knee at transfer end, ankle = commanded


def plan_step(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits | None = None,
    ramp_stagger: float = RAMP_STAGGER,
    current_pose: BoundaryPose | None = None,
) -> StepPlan:
    """A complete StepPlan for the behavior, starting from ``context``.

    ``current_pose`` lets the step begin from the posture actually being
    held (it differs from the behavior's canonical boundary posture right
    after a behavior change); the step still ends at the canonical posture,
    so walking converges to the behavior's cycle after one step.
    """
    limits = limits or JointLimits()
    if behavior.kind is BehaviorKind.STAND:
        raise PlanningError("stand behavior plans no steps")
    params = behavior.resolve_params(params).validated()

    if behavior.kind is BehaviorKind.STAIRS_DOWN:
        return _plan_stairs_descent(
            behavior, params, geom, context, limits, ramp_stagger, current_pose
        )
    return _plan_forward_step(
        behavior, params, geom, context, limits, ramp_stagger,
        goal=None, include_toe_off=True, start_pose=current_pose,
    )


def plan_swing(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits | None = None,
) -> JointTrajectory:
    """Swing-phase joint trajectory of a full step plan (convenience view)."""
    return plan_step(behavior, params, geom, context, limits).swing


def plan_stance(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits | None = None,
) -> JointTrajectory:
    """Stance-leg joint trajectory of a full step plan (convenience view)."""
    return plan_step(behavior, params, geom, context, limits).stance


def plan_transfer(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits | None = None,
) -> JointTrajectory:
    """Transfer-phase trajectory (trailing ankle + leading hip channels)."""
    return plan_step(behavior, params, geom, context, limits).transfer


def _plan_stairs_descent(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits,
    ramp_stagger: float,
    current_pose: BoundaryPose | None,
) -> StepPlan:
    # Descending backwards replays the matching ascent step in reverse,
    # without toe-off.  The equivalent ascent ends exactly at the current
    # stance: its swing starts where our moving foot is about to land.
    moving, other = context.swing_foot, context.stance_foot
    landing = PlanarPoint(other.x - params.step_length, other.z - params.step_rise)
    ascent_context = StepContext(
        swing_side=context.swing_side, swing_foot=landing, stance_foot=other
    )
    ascent = _plan_forward_step(
        Behavior.stairs_up(), params, geom, ascent_context, limits, ramp_stagger,
        goal=moving, include_toe_off=False, end_pose=current_pose,
    )
    return replace(ascent.reversed(), behavior=behavior)


def _plan_forward_step(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    context: StepContext,
    limits: JointLimits,
    ramp_stagger: float,
    goal: PlanarPoint | None,
    include_toe_off: bool,
    start_pose: BoundaryPose | None = None,
    end_pose: BoundaryPose | None = None,
) -> StepPlan:
    trailing = context.swing_foot
    leading = context.stance_foot
    if trailing.x > leading.x + 1e-9:
        raise PlanningError(
            f"swing foot at x={trailing.x:.3f} is ahead of the stance foot at "
            f"x={leading.x:.3f}; forward behaviors swing the rear foot"
        )
    if goal is None:
        goal = PlanarPoint(leading.x + params.step_length, leading.z + params.step_rise)

    t_t, t_s = params.transfer_time, params.swing_time
    pose0 = start_pose or boundary_pose(behavior, geom, trailing, leading, ramp_stagger)
    pose1 = end_pose or boundary_pose(behavior, geom, leading, goal, ramp_stagger)

    # Hip advance allotted to the transfer pivot: stairs go exactly over the
    # leading ankle before stepping up; other behaviors split the step's
    # advance in proportion to phase duration.
    total_advance = pose1.hip.x - pose0.hip.x
    if behavior.kind is BehaviorKind.STAIRS_UP:
        transfer_advance = leading.x - pose0.hip.x
    else:
        transfer_advance = max(total_advance, 0.0) * params.transfer_fraction

    tb = _build_transfer(
        behavior, params, geom, pose0, leading, trailing, transfer_advance, limits,
        include_toe_off,
    )

    stance_traj, stance_full = _build_stance_channels(
        params, pose0, pose1, tb.pivot_angle, tb.trajectory.channels["leading_hip"]
    )

    hip_path = HipPath(
        geom=geom,
        transfer_duration=t_t,
        swing_duration=t_s,
        pivot_center=leading,
        pivot_radius=math.hypot(pose0.hip.x - leading.x, pose0.hip.z - leading.z),
        pivot_phi0=math.atan2(pose0.hip.x - leading.x, pose0.hip.z - leading.z),
        pivot_chain=tb.pivot_chain,
        stance_ankle=leading,
        stance_hip_chain=SegmentChain((stance_full["hip"].segments[-1],)),
        stance_knee_chain=SegmentChain((stance_full["knee"].segments[-1],)),
    )

    swing_traj, waypoints, waypoint_times = _build_swing_channels(
        params, geom, pose0, pose1, hip_path, trailing, goal, tb
    )

    # Engine-ready full-step channels per physical leg.
    swing_leg = {
        "hip": SegmentChain(tb.trailing_hip_chain.segments + swing_traj.channels["hip"].segments),
        "knee": SegmentChain(tb.trailing_knee_chain.segments + swing_traj.channels["knee"].segments),
        "ankle": SegmentChain(
            tb.trajectory.channels["trailing_ankle"].segments
            + swing_traj.channels["ankle"].segments
        ),
    }
    stance_leg = dict(stance_full)

    _validate_plan_limits(limits, swing_leg, stance_leg)

    return StepPlan(
        behavior=behavior,
        params=params,
        geom=geom,
        swing_side=context.swing_side,
        transfer_duration=t_t,
        swing_duration=t_s,
        phase_order=("transfer", "swing"),
        swing=swing_traj,
        stance=stance_traj,
        transfer=tb.trajectory,
        swing_leg_channels=swing_leg,
        stance_leg_channels=stance_leg,
        hip_path=hip_path,
        waypoints=waypoints,
        waypoint_times=waypoint_times,
        start_pose=pose0,
        end_pose=pose1,
        swing_foot_start=trailing,
        swing_foot_goal=goal,
        stance_foot=leading,
    )


def _build_transfer(
    behavior: Behavior,
    params: GaitParameters,
    geom: LegGeometry,
    pose0: BoundaryPose,
    leading: PlanarPoint,
    trailing: PlanarPoint,
    advance: float,
    limits: JointLimits,
    include_toe_off: bool,
) -> _TransferBuild:
    """Transfer-phase channels.

    The trailing ankle runs its toe-off quintic to ``-toe_off_angle`` over
    the transfer, finishing with the fast extra plantar-flexion impulse over
    the last ``fast_toeoff_duration`` (omitted on ramp descent; the whole
    toe-off is omitted for reversed stair plans).  The leading hip follows
    the rigid-body pivot about the leading ankle that advances the hip by
    ``advance``; the trailing hip/knee follow the toe-pinned roll.
    """
    t_t = params.transfer_time

    dx = pose0.hip.x - leading.x
    dz = pose0.hip.z - leading.z
    radius = math.hypot(dx, dz)
    phi0 = math.atan2(dx, dz)
    psi = _pivot_angle_for_advance(radius, phi0, advance)
    pivot_chain = SegmentChain((fit_segment(0.0, 0.0, psi, 0.0, t_t),))

    trailing_flat = pose0.trailing.ankle
    if include_toe_off:
        toe_target = -params.toe_off_angle
        if behavior.kind is BehaviorKind.RAMP_DOWN:
            limits.check(JointAngles(pose0.trailing.hip, pose0.trailing.knee, toe_target))
            ankle_chain = SegmentChain((fit_segment(trailing_flat, 0.0, toe_target, 0.0, t_t),))
        else:
            tau_f = params.fast_toeoff_duration
            deep = toe_target - params.fast_toeoff_extra
            limits.check(JointAngles(pose0.trailing.hip, pose0.trailing.knee, deep))
            ankle_chain = SegmentChain(
                (
                    fit_segment(trailing_flat, 0.0, toe_target, 0.0, t_t - tau_f),
                    fit_segment(toe_target, 0.0, deep, 0.0, tau_f),
                )
            )
    else:
        ankle_chain = SegmentChain((hold_segment(trailing_flat, t_t),))

    leading_hip_chain = SegmentChain(
        (fit_segment(pose0.leading.hip, 0.0, pose0.leading.hip - psi, 0.0, t_t),)
    )

    trailing_hip_chain, trailing_knee_chain = _trace_trailing_lift(
        geom, pose0, leading, trailing, radius, phi0, pivot_chain, t_t
    )

    traj = JointTrajectory(
        {"trailing_ankle": ankle_chain, "leading_hip": leading_hip_chain}
    )
    end_hip = trailing_hip_chain.end()[0]
    end_knee = trailing_knee_chain.end()[0]
    end_ankle = ankle_chain.end()[0]
    return _TransferBuild(
        trajectory=traj,
        pivot_chain=pivot_chain,
        pivot_angle=psi,
        trailing_hip_chain=trailing_hip_chain,
        trailing_knee_chain=trailing_knee_chain,
        trailing_end=JointAngles(end_hip, end_knee, end_ankle),
    )


def _trace_trailing_lift(
    geom: LegGeometry,
    pose0: BoundaryPose,
    leading: PlanarPoint,
    trailing: PlanarPoint,
    radius: float,
    phi0: float,
    pivot_chain: SegmentChain,
    t_t: float,
) -> tuple[SegmentChain, SegmentChain]:
    """Trailing hip/knee chains for the transfer pivot.

    The knee is held (the free ankle carries the toe-off) and the hip joint
    keeps the leg aimed at the planted ankle position while the body pivots
    away, so the ankle lifts along the leg's own line by exactly the reach
    shortfall: the heel rises instead of the foot dragging.  The hip angle
    is the pointing angle minus the frozen bent-leg offset, traced at evenly
    spaced knots and chained as quintics.
    """
    knee = pose0.trailing.knee
    fk0 = forward_kinematics(geom, JointAngles(0.0, knee))
    # Direction of the bent leg at hip angle zero, measured from straight
    # down (forward positive); rotating the hip rotates this rigidly.
    offset = math.atan2(fk0.x, -fk0.z)
    eff_len = math.hypot(fk0.x, fk0.z)

    step = t_t / _TRANSFER_KNOTS
    hips = [pose0.trailing.hip]
    for i in range(1, _TRANSFER_KNOTS + 1):
        t = i * step
        psi_t = pivot_chain.evaluate(t)[0]
        phi = phi0 + psi_t
        hip = PlanarPoint(
            leading.x + radius * math.sin(phi), leading.z + radius * math.cos(phi)
        )
        dx = trailing.x - hip.x
        dz = trailing.z - hip.z
        reach_needed = math.hypot(dx, dz)
        if reach_needed < eff_len - 1e-6:
            raise PlanningError(
                "transfer pivot moves the hip toward the trailing foot; "
                "cannot keep the trailing leg extended"
            )
        hips.append(math.atan2(dx, -dz) - offset)

    knee_chain = SegmentChain((hold_segment(knee, t_t),))
    return _knot_chain(hips, step), knee_chain


def _build_stance_channels(
    params: GaitParameters,
    pose0: BoundaryPose,
    pose1: BoundaryPose,
    psi: float,
    transfer_leading_hip: SegmentChain,
) -> tuple[JointTrajectory, dict[str, SegmentChain]]:
    """Stance-leg channels over the full step.

    During transfer the leg pivots rigidly (knee held, hip following the
    pivot); during swing single quintics straighten the knee and carry the
    hip frame to the next boundary pose, ending at rest.  The ankle keeps
    the sole flat on the ground throughout.
    """
    t_t, t_s = params.transfer_time, params.swing_time
    hip1 = pose0.leading.hip - psi
    knee0 = pose0.leading.knee

    hip_chain = SegmentChain(
        transfer_leading_hip.segments + (fit_segment(hip1, 0.0, pose1.trailing.hip, 0.0, t_s),)
    )
    knee_chain = SegmentChain(
        (hold_segment(knee0, t_t), fit_segment(knee0, 0.0, pose1.trailing.knee, 0.0, t_s))
    )
    ankle_chain = _difference_chain(knee_chain, hip_chain)

    full = {"hip": hip_chain, "knee": knee_chain, "ankle": ankle_chain}
    traj = JointTrajectory(dict(full))
    return traj, full


def _build_swing_channels(
    params: GaitParameters,
    geom: LegGeometry,
    pose0: BoundaryPose,
    pose1: BoundaryPose,
    hip_path: HipPath,
    trailing: PlanarPoint,
    goal: PlanarPoint,
    tb: _TransferBuild,
) -> tuple[JointTrajectory, tuple[PlanarPoint, ...], tuple[float, ...]]:
    """Swing-phase hip/knee chains through the IK-converted waypoints plus
    the ankle recovery profile.

    The waypoint plan anchors at the planted start (the foot is there when
    the step begins, before toe-off lifts it); the chain's first knot is the
    toe-off-lifted pose the transfer hands over.  Waypoint times are
    absolute step times: the start anchor at t=0, the rest during swing.
    """
    t_t, t_s = params.transfer_time, params.swing_time

    wps = compute_waypoints(params, trailing, goal)
    distances = [wps[i].distance_to(wps[i + 1]) for i in range(3)]
    shares = _segment_shares(distances, MIN_SEGMENT_FRACTION)
    seg_times = [s * t_s for s in shares]
    knot_local = (0.0, seg_times[0], seg_times[0] + seg_times[1], t_s)

    # Hip/knee boundary conditions at lifted start, both midpoints, landing.
    joint_bc: list[tuple[float, float, float, float]] = [
        (tb.trailing_end.hip, tb.trailing_end.knee, 0.0, 0.0)
    ]
    for idx in (1, 2):
        t_abs = t_t + knot_local[idx]
        hip_pos = hip_path.position(t_abs)
        hip_vel = hip_path.velocity(t_abs)
        wp = wps[idx]
        rel = PlanarPoint(wp.x - hip_pos.x, wp.z - hip_pos.z)
        try:
            q = inverse_kinematics(geom, rel)
        except Exception as exc:
            raise UnreachableWaypoint(idx, wp, str(exc)) from exc
        rel_v = PlanarPoint(0.0, 0.0, wp.vx - hip_vel[0], wp.vz - hip_vel[1])
        hip_rate, knee_rate = joint_velocities_from_cartesian(geom, q, rel_v)
        joint_bc.append((q.hip, q.knee, hip_rate, knee_rate))
    joint_bc.append((pose1.leading.hip, pose1.leading.knee, 0.0, 0.0))

    hip_segments = []
    knee_segments = []
    for i in range(3):
        h0, k0, wh0, wk0 = joint_bc[i]
        h1, k1, wh1, wk1 = joint_bc[i + 1]
        hip_segments.append(fit_segment(h0, wh0, h1, wh1, seg_times[i]))
        knee_segments.append(fit_segment(k0, wk0, k1, wk1, seg_times[i]))

    ankle_chain = SegmentChain(
        (fit_segment(tb.trailing_end.ankle, 0.0, pose1.leading.ankle, 0.0, t_s),)
    )

    traj = JointTrajectory(
        {
            "hip": SegmentChain(tuple(hip_segments)),
            "knee": SegmentChain(tuple(knee_segments)),
            "ankle": ankle_chain,
        }
    )
    waypoint_times = (0.0, t_t + knot_local[1], t_t + knot_local[2], t_t + t_s)
    return traj, wps, waypoint_times


def _validate_plan_limits(
    limits: JointLimits,
    swing_leg: dict[str, SegmentChain],
    stance_leg: dict[str, SegmentChain],
    check_dt: float = 0.005,
) -> None:
    cap = limits.velocity_cap
    ranges = {"hip": limits.hip_range, "knee": limits.knee_range, "ankle": limits.ankle_range}
    for role, channels in (("swing", swing_leg), ("stance", stance_leg)):
        for name, chain_ in channels.items():
            lo, hi = ranges[name]
            n = max(2, math.ceil(chain_.duration / check_dt) + 1)
            for i in range(n):
                t = min(chain_.duration, i * check_dt)
                p, v, _ = chain_.evaluate(t)
                if not (lo - 1e-9 <= p <= hi + 1e-9):
                    raise PlanningError(
                        f"{role} {name} angle {p:.4f} rad at t={t:.3f} outside "
                        f"[{lo:.4f}, {hi:.4f}]"
                    )
                if abs(v) > cap + 1e-9:
                    raise PlanningError(
                        f"{role} {name} velocity {v:.3f} rad/s at t={t:.3f} "
                        f"exceeds the {cap:.1f} rad/s cap"
                    )
