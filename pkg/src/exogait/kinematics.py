"""Forward/inverse kinematics for the planar two-link leg.

The hip frame is the reference: the hip joint sits at the origin and the
ankle position is reported relative to it.  The ankle joint itself does not
affect the two-link chain; it is commanded separately by the gait planner.
"""

from __future__ import annotations

import math

from .geometry import JointAngles, LegGeometry, PlanarPoint

#: Knee flexion below which the leg is treated as straight for velocity
#: mapping purposes (Jacobian near-degenerate).
EPS_KNEE = math.radians(1.0)

#: Jacobian determinant magnitude below which velocity mapping refuses to run.
EPS_DET = 1e-8

#: Relative slack when clamping law-of-cosines arguments at full extension.
_REACH_SLACK = 1e-9


class UnreachableTarget(ValueError):
    """IK target lies outside the leg's reachable annulus."""


class SingularJacobian(ValueError):
    """Velocity mapping requested at a (near-)straight knee configuration."""


def forward_kinematics(geom: LegGeometry, q: JointAngles) -> PlanarPoint:
    """Ankle position in the hip frame for the given joint angles."""
    a, b = geom.thigh_length, geom.shank_length
    x = a * math.sin(q.hip) + b * math.sin(q.hip - q.knee)
    z = -a * math.cos(q.hip) - b * math.cos(q.hip - q.knee)
    return PlanarPoint(x, z)


def jacobian(geom: LegGeometry, q: JointAngles) -> tuple[tuple[float, float], tuple[float, float]]:
    """2x2 Jacobian of the ankle position w.r.t. (hip, knee)."""
    a, b = geom.thigh_length, geom.shank_length
    s1, c1 = math.sin(q.hip), math.cos(q.hip)
    s12, c12 = math.sin(q.hip - q.knee), math.cos(q.hip - q.knee)
    return (
        (a * c1 + b * c12, -b * c12),
        (a * s1 + b * s12, -b * s12),
    )


def jacobian_determinant(geom: LegGeometry, q: JointAngles) -> float:
    # Analytically det J = thigh * shank * sin(knee); computed from entries
    # so tests can cross-check the closed form.
    (j11, j12), (j21, j22) = jacobian(geom, q)
    return j11 * j22 - j12 * j21


def near_singular(q: JointAngles, eps_knee: float = EPS_KNEE) -> bool:
    """True when the knee is within ``eps_knee`` of the straight-leg pose."""
    return q.knee < eps_knee


def inverse_kinematics(geom: LegGeometry, target: PlanarPoint, ankle: float = 0.0) -> JointAngles:
    """Hip and knee angles placing the ankle at ``target`` (hip frame).

    Always returns the anthropomorphic branch (knee >= 0).  Targets at exact
    full extension are accepted (the law-of-cosines argument is clamped
    within a relative slack of 1e-9); anything farther raises
    :class:`UnreachableTarget`, as do targets inside the folded-knee inner
    circle.  The ``ankle`` angle is passed through untouched.
    """
    a, b = geom.thigh_length, geom.shank_length
    r2 = target.x * target.x + target.z * target.z
    r = math.sqrt(r2)
    slack = _REACH_SLACK * geom.max_reach
    if r > geom.max_reach + slack:
        raise UnreachableTarget(
            f"target ({target.x:.4f}, {target.z:.4f}) at distance {r:.6f} m "
            f"exceeds maximum reach {geom.max_reach:.6f} m"
        )
    if r < geom.min_reach - slack or r == 0.0:
        raise UnreachableTarget(
            f"target ({target.x:.4f}, {target.z:.4f}) at distance {r:.6f} m "
            f"is inside minimum reach {geom.min_reach:.6f} m"
        )

    cos_knee = (r2 - a * a - b * b) / (2.0 * a * b)
    cos_knee = min(1.0, max(-1.0, cos_knee))
    knee = math.acos(cos_knee)

    # Angle of the hip->ankle ray measured from straight down, forward positive.
    phi = math.atan2(target.x, -target.z)
    # Interior angle at the hip between the thigh and the hip->ankle ray.
    cos_beta = (a * a + r2 - b * b) / (2.0 * a * r)
    cos_beta = min(1.0, max(-1.0, cos_beta))
    beta = math.acos(cos_beta)
    hip = phi + beta
    return JointAngles(hip=hip, knee=knee, ankle=ankle)


def joint_velocities_from_cartesian(
    geom: LegGeometry, q: JointAngles, v: PlanarPoint
) -> tuple[float, float]:
    """Hip/knee rates realizing ankle velocity ``(v.vx, v.vz)`` at pose ``q``.

    Raises :class:`SingularJacobian` at near-straight knees (within
    ``EPS_KNEE``) or when the determinant magnitude falls below ``EPS_DET``:
    inverting there would demand unbounded joint speeds.
    """
    (j11, j12), (j21, j22) = jacobian(geom, q)
    det = j11 * j22 - j12 * j21
    if near_singular(q) or abs(det) < EPS_DET:
        raise SingularJacobian(
            f"|det J| = {abs(det):.3e} at knee {q.knee:.4f} rad; "
            "velocity mapping undefined near the straight-leg pose"
        )
    hip_rate = (j22 * v.vx - j12 * v.vz) / det
    knee_rate = (-j21 * v.vx + j11 * v.vz) / det
    return (hip_rate, knee_rate)


def foot_pitch(q: JointAngles) -> float:
    """World pitch of the foot, radians; 0 = sole flat, positive = toes up."""
    shank_tilt = q.hip - q.knee
    return q.ankle + shank_tilt


def flat_foot_ankle(q_hip: float, q_knee: float) -> float:
    """Ankle angle that keeps the sole flat on the ground at this pose."""
    return q_knee - q_hip
