"""Sagittal-plane exoskeleton gait trajectory engine.

Plans per-step joint trajectories from Cartesian swing waypoints (inverse
kinematics + minimum-jerk segments) with a powered toe-off transfer phase,
runs them through a trigger-driven step state machine, exports traces, and
serves a live pilot console over TCP.
"""

from .behaviors import Behavior, BehaviorKind
from .engine import EngineState, StepEngine
from .geometry import (
    JointAngles,
    JointLimits,
    JointState,
    JointVelocities,
    LegGeometry,
    PlanarPoint,
)
from .parameters import GaitParameters, ParameterSet, ParameterStore, builtin_presets
from .planner import StepContext, StepPlan, compute_waypoints, plan_step

__all__ = [
    "Behavior",
    "BehaviorKind",
    "EngineState",
    "GaitParameters",
    "JointAngles",
    "JointLimits",
    "JointState",
    "JointVelocities",
    "LegGeometry",
    "ParameterSet",
    "ParameterStore",
    "PlanarPoint",
    "StepContext",
    "StepEngine",
    "StepPlan",
    "builtin_presets",
    "compute_waypoints",
    "plan_step",
]

__version__ = "0.1.0"
