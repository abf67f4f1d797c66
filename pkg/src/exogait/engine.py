"""Trigger-driven step state machine clocked at a fixed control period.

Standing -> Transfer -> Swing -> (Standing | next Transfer), with stair
descent running its phases in the reverse order because those steps are
reverse-played ascent steps.  Every step is triggered separately; a trigger
is accepted while Standing or inside the re-trigger window at the end of
the current step, which latches the next step so walking is continuous.

The engine owns all mutable state; ``tick()`` is the only mutator during
operation and returns an immutable snapshot plus the joint commands for
both legs, so observers on other threads can consume snapshots freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .behaviors import BACKWARD_KINDS, FORWARD_KINDS, Behavior, BehaviorKind, PRESET_FOR_BEHAVIOR
from .geometry import (
    JointAngles,
    JointLimits,
    JointState,
    JointVelocities,
    LegGeometry,
    PlanarPoint,
)
from .parameters import GaitParameters, ParameterStore
from .planner import BoundaryPose, StepContext, StepPlan, plan_step

#: A new step may be triggered this long before the current one ends.
TRIGGER_WINDOW = 0.25

#: Default control period, seconds.
DEFAULT_DT = 0.002


class Phase(Enum):
    STANDING = "standing"
    TRANSFER = "transfer"
    SWING = "swing"


class BehaviorChangeWhileMoving(RuntimeError):
    """Behavior selection is only legal while standing."""


class IncompatibleBehaviorTransition(RuntimeError):
    """Switching between forward and backward behaviors needs an explicit
    reorientation acknowledgment (the pilot physically turns around)."""


def trigger_accepted(phase: Phase, in_final_phase: bool, remaining_step_time: float) -> bool:
    """The trigger-window predicate.

    Accepted while standing, or during the step's final phase once the
    remaining step time is within TRIGGER_WINDOW.
    """
    if phase is Phase.STANDING:
        return True
    return in_final_phase and remaining_step_time <= TRIGGER_WINDOW


@dataclass(frozen=True)
class LegSnapshot:
    joints: JointState
    foot_x: float
    foot_z: float


@dataclass(frozen=True)
class EngineState:
    """Immutable view of the machine state after a tick."""

    t: float
    phase: Phase
    phase_elapsed: float
    phase_duration: float | None
    support_side: str  # "left" | "right" | "double"
    swing_side: str | None
    behavior: Behavior
    params_name: str
    pending_trigger: bool
    step_count: int
    hip_x: float
    hip_z: float
    left: LegSnapshot
    right: LegSnapshot
    remaining_step_time: float | None
    in_trigger_window: bool
    facing: str  # "forward" | "backward"


class StepEngine:
    """Owns the gait state; single logical mutator, snapshot observers."""

    def __init__(
        self,
        geom: LegGeometry | None = None,
        limits: JointLimits | None = None,
        store: ParameterStore | None = None,
        dt: float = DEFAULT_DT,
        first_swing_side: str = "right",
    ):
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        if first_swing_side not in ("left", "right"):
            raise ValueError("first_swing_side must be 'left' or 'right'")
        self.geom = geom or LegGeometry()
        self.limits = limits or JointLimits()
        self.store = store or ParameterStore()
        self.dt = dt

        self._t = 0.0
        self._phase = Phase.STANDING
        self._standing_elapsed = 0.0
        self._step_elapsed = 0.0
        self._plan: StepPlan | None = None
        self._pending = False
        self._behavior = Behavior.stand()
        self._params_override: str | GaitParameters | None = None
        self._facing = "forward"
        self._step_count = 0
        self._last_swing_side = "left" if first_swing_side == "right" else "right"

        ah = self.geom.ankle_height
        standing = JointAngles(0.0, 0.0, 0.0)
        self._feet = {
            "left": PlanarPoint(0.0, ah),
            "right": PlanarPoint(0.0, ah),
        }
        self._held = {"left": standing, "right": standing}
        self._hip = PlanarPoint(0.0, ah + self.geom.max_reach)

    # ------------------------------------------------------------------ api

    @property
    def behavior(self) -> Behavior:
        return self._behavior

    def active_params(self) -> tuple[str, GaitParameters]:
        """(name, parameters) the next step will plan with."""
        if isinstance(self._params_override, GaitParameters):
            return ("custom", self._params_override)
        if isinstance(self._params_override, str):
            ps = self.store.get(self._params_override)
            return (ps.name, ps.params)
        ps = self.store.get(PRESET_FOR_BEHAVIOR[self._behavior.kind])
        return (ps.name, ps.params)

    def set_parameters(self, params: str | GaitParameters | None) -> None:
        """Select a named set (or explicit values) for upcoming steps;
        ``None`` returns to the behavior's own preset.  Takes effect at the
        next planned step, so values can change online mid-walk."""
        if isinstance(params, str):
            self.store.get(params)  # validate the name eagerly
        elif isinstance(params, GaitParameters):
            params.validated()
        elif params is not None:
            raise TypeError("params must be a set name, GaitParameters, or None")
        self._params_override = params

    def select_behavior(self, behavior: Behavior) -> None:
        """Switch behaviors; only legal while standing, and crossing between
        forward and backward behaviors needs acknowledge_reorientation()."""
        if self._phase is not Phase.STANDING:
            raise BehaviorChangeWhileMoving(
                f"cannot change behavior during {self._phase.value}; wait for standing"
            )
        kind = behavior.kind
        if kind in FORWARD_KINDS and self._facing != "forward":
            raise IncompatibleBehaviorTransition(
                "facing backward (stair descent); acknowledge_reorientation() first"
            )
        if kind in BACKWARD_KINDS and self._facing != "backward":
            raise IncompatibleBehaviorTransition(
                "stair descent is walked backwards; acknowledge_reorientation() first"
            )
        self._behavior = behavior

    def acknowledge_reorientation(self) -> None:
        """Record that the pilot has physically turned around (standing
        only); flips which walking direction is legal."""
        if self._phase is not Phase.STANDING:
            raise BehaviorChangeWhileMoving("reorientation only while standing")
        self._facing = "backward" if self._facing == "forward" else "forward"

    def clear_pending(self) -> None:
        """Drop a latched trigger (used when planning the step failed)."""
        self._pending = False

    def trigger(self) -> bool:
        """Request the next step; returns acceptance.  Accepted triggers
        latch and start the step on the tick after the current one ends."""
        if self._behavior.kind is BehaviorKind.STAND:
            return False
        accepted = trigger_accepted(
            self._phase, self._in_final_phase(), self._remaining_step_time()
        )
        if accepted:
            self._pending = True
        return accepted

    def tick(self) -> tuple[EngineState, dict[str, JointState]]:
        """Advance one control period; returns (state snapshot, commands)."""
        self._t += self.dt
        if self._phase is Phase.STANDING:
            if self._pending:
                self._begin_step()
            else:
                self._standing_elapsed += self.dt

        if self._plan is not None:
            self._step_elapsed += self.dt
            if self._step_elapsed >= self._plan.step_duration - 1e-9:
                commands = self._commands_at(self._plan.step_duration)
                self._finish_step()
                if self._pending:
                    self._begin_step()
                return self.state(), commands
            phase_name, _, _ = self._plan.phase_at(self._step_elapsed)
            self._phase = Phase.TRANSFER if phase_name == "transfer" else Phase.SWING
            commands = self._commands_at(self._step_elapsed)
        else:
            commands = self._hold_commands()

        return self.state(), commands

    def state(self) -> EngineState:
        plan = self._plan
        if plan is not None:
            phase_name, phase_elapsed, phase_duration = plan.phase_at(self._step_elapsed)
            phase = Phase.TRANSFER if phase_name == "transfer" else Phase.SWING
            remaining = plan.step_duration - self._step_elapsed
            hip = plan.hip_path.position(self._step_elapsed)
            joints = plan.joints_at(self._step_elapsed)
            swing = plan.swing_side
            stance = "left" if swing == "right" else "right"
            legs = {}
            for side in ("left", "right"):
                role = "swing" if side == swing else "stance"
                angles, rates = joints[role]
                foot = plan.foot_position(role, self._step_elapsed)
                legs[side] = LegSnapshot(
                    JointState(angles, JointVelocities(*rates)), foot.x, foot.z
                )
            support = stance if phase is Phase.SWING else "double"
            in_window = trigger_accepted(phase, self._in_final_phase(), remaining)
            params_name, _ = self.active_params()
            return EngineState(
                t=self._t,
                phase=phase,
                phase_elapsed=phase_elapsed,
                phase_duration=phase_duration,
                support_side=support,
                swing_side=swing,
                behavior=plan.behavior,
                params_name=params_name,
                pending_trigger=self._pending,
                step_count=self._step_count,
                hip_x=hip.x,
                hip_z=hip.z,
                left=legs["left"],
                right=legs["right"],
                remaining_step_time=remaining,
                in_trigger_window=in_window,
                facing=self._facing,
            )

        legs = {}
        for side in ("left", "right"):
            foot = self._feet[side]
            legs[side] = LegSnapshot(
                JointState(self._held[side], JointVelocities()), foot.x, foot.z
            )
        params_name, _ = self.active_params()
        return EngineState(
            t=self._t,
            phase=Phase.STANDING,
            phase_elapsed=self._standing_elapsed,
            phase_duration=None,
            support_side="double",
            swing_side=None,
            behavior=self._behavior,
            params_name=params_name,
            pending_trigger=self._pending,
            step_count=self._step_count,
            hip_x=self._hip.x,
            hip_z=self._hip.z,
            left=legs["left"],
            right=legs["right"],
            remaining_step_time=None,
            in_trigger_window=trigger_accepted(Phase.STANDING, False, math.inf),
            facing=self._facing,
        )

    # ------------------------------------------------------------ internals

    def _in_final_phase(self) -> bool:
        if self._plan is None:
            return False
        phase_name, _, _ = self._plan.phase_at(self._step_elapsed)
        return phase_name == self._plan.phase_order[1]

    def _remaining_step_time(self) -> float:
        if self._plan is None:
            return math.inf
        return self._plan.step_duration - self._step_elapsed

    def _pick_swing_side(self) -> str:
        feet = self._feet
        dx = feet["left"].x - feet["right"].x
        if abs(dx) < 1e-9:
            return "left" if self._last_swing_side == "right" else "right"
        rear = "left" if dx < 0 else "right"
        if self._behavior.kind in BACKWARD_KINDS:
            return "left" if rear == "right" else "right"
        return rear

    def _current_pose(self, swing_side: str) -> BoundaryPose:
        stance_side = "left" if swing_side == "right" else "right"
        return BoundaryPose(
            hip=self._hip,
            trailing=self._held[swing_side],
            leading=self._held[stance_side],
        )

    def _begin_step(self) -> None:
        swing_side = self._pick_swing_side()
        stance_side = "left" if swing_side == "right" else "right"
        context = StepContext(
            swing_side=swing_side,
            swing_foot=self._feet[swing_side],
            stance_foot=self._feet[stance_side],
        )
        _, params = self.active_params()
        self._plan = plan_step(
            self._behavior,
            params,
            self.geom,
            context,
            limits=self.limits,
            current_pose=self._current_pose(swing_side),
        )
        self._pending = False
        self._step_elapsed = 0.0
        self._phase = Phase.TRANSFER if self._plan.phase_order[0] == "transfer" else Phase.SWING

    def _finish_step(self) -> None:
        plan = self._plan
        assert plan is not None
        swing_side = plan.swing_side
        stance_side = "left" if swing_side == "right" else "right"
        self._feet[swing_side] = PlanarPoint(plan.swing_foot_goal.x, plan.swing_foot_goal.z)
        end = plan.end_pose
        # After the step the just-landed leg is the new leading leg and the
        # old stance leg is the new trailing leg.
        self._held = {swing_side: end.leading, stance_side: end.trailing}
        self._hip = end.hip
        self._step_count += 1
        self._last_swing_side = swing_side
        self._plan = None
        self._step_elapsed = 0.0
        self._standing_elapsed = 0.0
        self._phase = Phase.STANDING

    def _commands_at(self, t: float) -> dict[str, JointState]:
        plan = self._plan
        if plan is None:
            return self._hold_commands()
        joints = plan.joints_at(t)
        swing_side = plan.swing_side
        stance_side = "left" if swing_side == "right" else "right"
        out = {}
        for side, role in ((swing_side, "swing"), (stance_side, "stance")):
            angles, rates = joints[role]
            out[side] = JointState(angles, JointVelocities(*rates))
        return out

    def _hold_commands(self) -> dict[str, JointState]:
        return {
            side: JointState(self._held[side], JointVelocities())
            for side in ("left", "right")
        }

    def foot_world(self, side: str) -> PlanarPoint:
        """Planted ankle position of a foot (valid while standing)."""
        return self._feet[side]

    def hip_world(self) -> PlanarPoint:
        if self._plan is not None:
            return self._plan.hip_path.position(self._step_elapsed)
        return self._hip
