"""Minimum-jerk (quintic) trajectory segments and piecewise chains.

A segment interpolates position/velocity boundary conditions with zero
acceleration at both ends, which is the classic minimum-jerk profile; the
rest-to-rest case reduces to ``10 t^3 - 15 t^4 + 6 t^5`` in normalized time.
Coefficients are stored in normalized time ``tau = t / duration`` so that
boundary values are reproduced exactly regardless of duration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Junction tolerances for chained segments (position units, units/s).
JUNCTION_POS_TOL = 1e-9
JUNCTION_VEL_TOL = 1e-9

#: Slack for the time-domain check in evaluate().
_TIME_SLACK = 1e-12

# Binomial coefficients C(k, j) for k <= 5, used by time reversal.
_BINOM = (
    (1,),
    (1, 1),
    (1, 2, 1),
    (1, 3, 3, 1),
    (1, 4, 6, 4, 1),
    (1, 5, 10, 10, 5, 1),
)


class NonpositiveDuration(ValueError):
    """Segment/chain durations must be strictly positive."""


class OutOfDomain(ValueError):
    """Evaluation time outside [0, duration]."""


class DiscontinuousJunction(ValueError):
    """Adjacent chained segments disagree in position or velocity."""


@dataclass(frozen=True)
class QuinticSegment:
    """One quintic polynomial in normalized time, with a duration in seconds."""

    coefficients: tuple[float, float, float, float, float, float]
    duration: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise NonpositiveDuration(f"duration must be > 0, got {self.duration!r}")

    def evaluate(self, t: float) -> tuple[float, float, float]:
        """Position, velocity, acceleration at time ``t`` in [0, duration]."""
        if t < -_TIME_SLACK or t > self.duration + _TIME_SLACK:
            raise OutOfDomain(f"t = {t!r} outside [0, {self.duration!r}]")
        tau = min(1.0, max(0.0, t / self.duration))
        c0, c1, c2, c3, c4, c5 = self.coefficients
        p = c0 + tau * (c1 + tau * (c2 + tau * (c3 + tau * (c4 + tau * c5))))
        dp = c1 + tau * (2 * c2 + tau * (3 * c3 + tau * (4 * c4 + tau * 5 * c5)))
        ddp = 2 * c2 + tau * (6 * c3 + tau * (12 * c4 + tau * 20 * c5))
        return (p, dp / self.duration, ddp / (self.duration * self.duration))

    def start(self) -> tuple[float, float]:
        p, v, _ = self.evaluate(0.0)
        return (p, v)

    def end(self) -> tuple[float, float]:
        p, v, _ = self.evaluate(self.duration)
        return (p, v)

    def reversed(self) -> "QuinticSegment":
        """Segment tracing the same path backwards: r(t) = s(duration - t)."""
        c = self.coefficients
        out = [0.0] * 6
        # Substitute tau -> 1 - tau and re-collect powers via the binomial
        # expansion; exact for polynomials, so interior shape is preserved.
        for k in range(6):
            ck = c[k]
            if ck == 0.0:
                continue
            for j in range(k + 1):
                out[j] += ck * _BINOM[k][j] * ((-1.0) ** j)
        return QuinticSegment(tuple(out), self.duration)


def fit_segment(p0: float, v0: float, p1: float, v1: float, duration: float) -> QuinticSegment:
    """Quintic satisfying the four stated boundary conditions plus zero
    acceleration at both ends."""
    if not (math.isfinite(duration) and duration > 0.0):
        raise NonpositiveDuration(f"duration must be > 0, got {duration!r}")
    for name, value in (("p0", p0), ("v0", v0), ("p1", p1), ("v1", v1)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")
    dp = p1 - p0
    w0 = v0 * duration
    w1 = v1 * duration
    c3 = 10.0 * dp - 6.0 * w0 - 4.0 * w1
    c4 = -15.0 * dp + 8.0 * w0 + 7.0 * w1
    c5 = 6.0 * dp - 3.0 * (w0 + w1)
    return QuinticSegment((p0, w0, 0.0, c3, c4, c5), duration)


def hold_segment(value: float, duration: float) -> QuinticSegment:
    """Constant-position segment (zero velocity throughout)."""
    return fit_segment(value, 0.0, value, 0.0, duration)


@dataclass(frozen=True)
class SegmentChain:
    """Contiguous quintic segments forming one scalar channel."""

    segments: tuple[QuinticSegment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("chain needs at least one segment")
        for left, right in zip(self.segments, self.segments[1:]):
            p_end, v_end = left.end()
            p_start, v_start = right.start()
            if abs(p_end - p_start) > JUNCTION_POS_TOL or abs(v_end - v_start) > JUNCTION_VEL_TOL:
                raise DiscontinuousJunction(
                    f"junction jump pos={p_end - p_start:.3e}, vel={v_end - v_start:.3e} "
                    f"exceeds tolerance ({JUNCTION_POS_TOL:g}, {JUNCTION_VEL_TOL:g})"
                )

    @property
    def duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def evaluate(self, t: float) -> tuple[float, float, float]:
        if t < -_TIME_SLACK or t > self.duration + _TIME_SLACK:
            raise OutOfDomain(f"t = {t!r} outside [0, {self.duration!r}]")
        t = min(max(t, 0.0), self.duration)
        remaining = t
        for seg in self.segments[:-1]:
            if remaining <= seg.duration:
                return seg.evaluate(remaining)
            remaining -= seg.duration
        return self.segments[-1].evaluate(min(remaining, self.segments[-1].duration))

    def position(self, t: float) -> float:
        return self.evaluate(t)[0]

    def start(self) -> tuple[float, float]:
        return self.segments[0].start()

    def end(self) -> tuple[float, float]:
        return self.segments[-1].end()

    def sample(self, dt: float) -> tuple[list[float], list[float], list[float], list[float]]:
        """Times, positions, velocities, accelerations on a dt grid.

        Emits ``ceil(duration/dt) + 1`` points; both endpoints included (the
        final interval is shortened when dt does not divide the duration).
        """
        times = sample_times(self.duration, dt)
        pos, vel, acc = [], [], []
        for t in times:
            p, v, a = self.evaluate(t)
            pos.append(p)
            vel.append(v)
            acc.append(a)
        return times, pos, vel, acc

    def reversed(self) -> "SegmentChain":
        return SegmentChain(tuple(seg.reversed() for seg in reversed(self.segments)))


def chain(*segments: QuinticSegment) -> SegmentChain:
    """Join segments into one channel, checking junction continuity."""
    return SegmentChain(tuple(segments))


def sample_times(duration: float, dt: float) -> list[float]:
    if not (math.isfinite(dt) and dt > 0.0):
        raise NonpositiveDuration(f"dt must be > 0, got {dt!r}")
    n = math.ceil(duration / dt - _TIME_SLACK)
    times = [i * dt for i in range(n)]
    times.append(duration)
    return times


@dataclass(frozen=True)
class JointTrajectory:
    """Named scalar channels sharing one duration (one chain per joint)."""

    channels: dict[str, SegmentChain] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.channels:
            raise ValueError("trajectory needs at least one channel")
        durations = {name: c.duration for name, c in self.channels.items()}
        d0 = next(iter(durations.values()))
        for name, d in durations.items():
            if abs(d - d0) > 1e-9:
                raise ValueError(f"channel durations disagree: {durations}")

    @property
    def duration(self) -> float:
        return next(iter(self.channels.values())).duration

    def evaluate(self, t: float) -> dict[str, tuple[float, float, float]]:
        return {name: c.evaluate(t) for name, c in self.channels.items()}

    def sample(self, dt: float) -> tuple[list[float], dict[str, list[float]]]:
        times = sample_times(self.duration, dt)
        out: dict[str, list[float]] = {}
        for name, c in self.channels.items():
            out[name] = [c.evaluate(t)[0] for t in times]
        return times, out

    def reversed(self) -> "JointTrajectory":
        return JointTrajectory({name: c.reversed() for name, c in self.channels.items()})


def time_reverse(traj: "SegmentChain | JointTrajectory") -> "SegmentChain | JointTrajectory":
    """Trajectory tracing the same path backwards: r(t) = f(D - t)."""
    return traj.reversed()
