"""Domain types for the planar (sagittal) leg model.

Conventions used throughout the package:

* x is forward, z is up.
* hip angle: positive = flexion (thigh forward of vertical).
* knee angle: positive = flexion, 0 = straight; never negative.
* ankle angle: positive = dorsiflexion (shin toward toes), negative =
  plantar flexion (toe-off direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LegGeometry:
    """Link lengths of one leg, in meters.

    ``foot_forward_length`` is ankle-joint to toe tip, ``ankle_height`` is
    the ankle joint above the sole.
    """

    thigh_length: float = 0.44
    shank_length: float = 0.43
    foot_forward_length: float = 0.18
    ankle_height: float = 0.08

    def __post_init__(self) -> None:
        for name in ("thigh_length", "shank_length", "foot_forward_length", "ankle_height"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def max_reach(self) -> float:
        """Maximum ankle distance from the hip (straight leg)."""
        return self.thigh_length + self.shank_length

    @property
    def min_reach(self) -> float:
        """Minimum ankle distance from the hip (fully folded knee)."""
        return abs(self.thigh_length - self.shank_length)


@dataclass(frozen=True)
class JointAngles:
    """Hip/knee/ankle angles of one leg, radians."""

    hip: float
    knee: float
    ankle: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.hip, self.knee, self.ankle)


@dataclass(frozen=True)
class JointVelocities:
    """Hip/knee/ankle angular velocities, rad/s."""

    hip: float = 0.0
    knee: float = 0.0
    ankle: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.hip, self.knee, self.ankle)


@dataclass(frozen=True)
class JointState:
    """Angles plus angular velocities for one leg."""

    angles: JointAngles
    velocities: JointVelocities = JointVelocities()


@dataclass(frozen=True)
class PlanarPoint:
    """A point (and optional velocity) in the sagittal plane, meters and m/s."""

    x: float
    z: float
    vx: float = 0.0
    vz: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x", "z", "vx", "vz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"PlanarPoint.{name} must be finite")

    def position(self) -> tuple[float, float]:
        return (self.x, self.z)

    def distance_to(self, other: "PlanarPoint") -> float:
        return math.hypot(other.x - self.x, other.z - self.z)


#: Default per-joint range-of-motion windows, radians.  Each window spans
#: 130 degrees; the knee window additionally forbids hyperextension.  The
#: hip window reaches -60 deg so maximum-length stepping-stone strides can
#: stretch the trailing leg.
DEFAULT_HIP_RANGE = (math.radians(-60.0), math.radians(70.0))
DEFAULT_KNEE_RANGE = (0.0, math.radians(130.0))
#: Dorsiflexion-biased: long stepping-stone strides crouch deeply, pitching
#: the stance shank far over the planted foot.
DEFAULT_ANKLE_RANGE = (math.radians(-55.0), math.radians(75.0))

#: Actuator no-load speed used as the default joint velocity cap, rad/s.
DEFAULT_VELOCITY_CAP = 9.0


@dataclass(frozen=True)
class JointLimits:
    """Range-of-motion windows and a shared angular velocity cap."""

    hip_range: tuple[float, float] = DEFAULT_HIP_RANGE
    knee_range: tuple[float, float] = DEFAULT_KNEE_RANGE
    ankle_range: tuple[float, float] = DEFAULT_ANKLE_RANGE
    velocity_cap: float = DEFAULT_VELOCITY_CAP

    def violations(self, q: JointAngles) -> list[str]:
        """Names of joints outside their windows, empty when valid."""
        out = []
        for name, value, (lo, hi) in (
            ("hip", q.hip, self.hip_range),
            ("knee", q.knee, self.knee_range),
            ("ankle", q.ankle, self.ankle_range),
        ):
            if not (lo <= value <= hi):
                out.append(f"{name} angle {value:.4f} rad outside [{lo:.4f}, {hi:.4f}]")
        return out

    def check(self, q: JointAngles) -> None:
        problems = self.violations(q)
        if problems:
            raise JointLimitExceeded("; ".join(problems))


class JointLimitExceeded(ValueError):
    """A commanded or planned angle violates the configured joint windows."""
