"""Scripted engine runs, CSV export/import, and phase-normalized averaging.

A scripted run stands briefly, then walks a requested number of steps with
every re-trigger issued inside the trigger window, producing one row per
control tick.  Normalization resamples each complete step (the first is
dropped as a start-from-rest transient) onto a common 0..1 time axis and
averages, the standard way gait traces are plotted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .behaviors import Behavior, BehaviorKind
from .engine import Phase, StepEngine
from .geometry import JointLimits, LegGeometry
from .parameters import GaitParameters, ParameterStore

#: Scripted runs re-trigger once the remaining step time drops to this
#: (inside the 0.25 s trigger window), giving continuous walking.
RETRIGGER_AT = 0.2

#: Standing lead-in before the first trigger, seconds.
DEFAULT_LEAD_IN = 0.1

NORMALIZED_POINTS = 101


class InsufficientSteps(ValueError):
    """Normalization needs at least two complete steps (the first one is
    excluded as a transient)."""


class IoError(OSError):
    """CSV file could not be written or read."""


@dataclass(frozen=True)
class TraceRow:
    """One control tick of a scripted run."""

    t_s: float
    step_index: int  # index of the step in progress, -1 while standing
    phase: str  # standing | transfer | swing
    support_side: str  # left | right | double
    left_hip_rad: float
    left_knee_rad: float
    left_ankle_rad: float
    left_hip_radps: float
    left_knee_radps: float
    left_ankle_radps: float
    right_hip_rad: float
    right_knee_rad: float
    right_ankle_rad: float
    right_hip_radps: float
    right_knee_radps: float
    right_ankle_radps: float
    left_foot_x_m: float
    left_foot_z_m: float
    right_foot_x_m: float
    right_foot_z_m: float
    hip_frame_x_m: float


TRACE_COLUMNS = [f.name for f in fields(TraceRow)]


@dataclass(frozen=True)
class NormalizedStepTrace:
    """Per-joint mean angles over normalized step time for both leg roles."""

    phase_fraction: list[float]
    channels: dict[str, list[float]]  # swing_hip, swing_knee, ... stance_ankle
    transfer_start: float
    transfer_end: float
    steps_averaged: int

    @property
    def transfer_fraction(self) -> float:
        return self.transfer_end - self.transfer_start


def _row_from_state(state) -> TraceRow:
    step_index = state.step_count if state.phase is not Phase.STANDING else -1
    return TraceRow(
        t_s=state.t,
        step_index=step_index,
        phase=state.phase.value,
        support_side=state.support_side,
        left_hip_rad=state.left.joints.angles.hip,
        left_knee_rad=state.left.joints.angles.knee,
        left_ankle_rad=state.left.joints.angles.ankle,
        left_hip_radps=state.left.joints.velocities.hip,
        left_knee_radps=state.left.joints.velocities.knee,
        left_ankle_radps=state.left.joints.velocities.ankle,
        right_hip_rad=state.right.joints.angles.hip,
        right_knee_rad=state.right.joints.angles.knee,
        right_ankle_rad=state.right.joints.angles.ankle,
        right_hip_radps=state.right.joints.velocities.hip,
        right_knee_radps=state.right.joints.velocities.knee,
        right_ankle_radps=state.right.joints.velocities.ankle,
        left_foot_x_m=state.left.foot_x,
        left_foot_z_m=state.left.foot_z,
        right_foot_x_m=state.right.foot_x,
        right_foot_z_m=state.right.foot_z,
        hip_frame_x_m=state.hip_x,
    )


def run_scripted(
    behavior: Behavior,
    n_steps: int,
    params: GaitParameters | str | None = None,
    geom: LegGeometry | None = None,
    dt: float = 0.002,
    lead_in: float = DEFAULT_LEAD_IN,
    limits: JointLimits | None = None,
    store: ParameterStore | None = None,
) -> list[TraceRow]:
    """Deterministic trace of ``n_steps`` continuously triggered steps."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    engine = StepEngine(geom=geom, limits=limits, store=store, dt=dt)
    if behavior.kind is BehaviorKind.STAIRS_DOWN:
        engine.acknowledge_reorientation()
    engine.select_behavior(behavior)
    if params is not None:
        engine.set_parameters(params)

    rows = [_row_from_state(engine.state())]
    lead_ticks = round(lead_in / dt)
    for _ in range(lead_ticks):
        state, _ = engine.tick()
        rows.append(_row_from_state(state))

    issued = 0
    state = engine.state()
    while state.step_count < n_steps:
        if issued < n_steps and not state.pending_trigger and state.in_trigger_window:
            remaining = state.remaining_step_time
            if state.phase is Phase.STANDING or remaining <= RETRIGGER_AT + 1e-12:
                if engine.trigger():
                    issued += 1
        state, _ = engine.tick()
        rows.append(_row_from_state(state))
    return rows


def _step_groups(rows: list[TraceRow]) -> list[list[TraceRow]]:
    """Rows of each step, including the boundary row that closes it."""
    positions: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        if row.step_index >= 0:
            positions.setdefault(row.step_index, []).append(i)
    out = []
    for idx in sorted(positions):
        pos = positions[idx]
        closing = pos[-1] + 1
        if closing >= len(rows):
            continue  # truncated step, drop it
        out.append([rows[i] for i in pos] + [rows[closing]])
    return out


def normalize_steps(rows: list[TraceRow], n_points: int = NORMALIZED_POINTS) -> NormalizedStepTrace:
    """Average per-joint traces of steps 2..n over normalized step time.

    Channels are keyed by leg role: the swing role is the leg in flight
    during the step's single-support phase.
    """
    groups = _step_groups(rows)
    if len(groups) < 2:
        raise InsufficientSteps(
            f"need at least 2 complete steps (first is a transient), got {len(groups)}"
        )
    groups = groups[1:]

    u = np.linspace(0.0, 1.0, n_points)
    sums: dict[str, np.ndarray] = {
        f"{role}_{joint}": np.zeros(n_points)
        for role in ("swing", "stance")
        for joint in ("hip", "knee", "ankle")
    }
    transfer_spans = []
    for g in groups:
        t0, t1 = g[0].t_s, g[-1].t_s
        duration = t1 - t0
        single = next(r for r in g if r.support_side != "double")
        swing_side = "left" if single.support_side == "right" else "right"
        stance_side = single.support_side
        times = np.array([r.t_s for r in g])
        uu = (times - t0) / duration
        for role, side in (("swing", swing_side), ("stance", stance_side)):
            for joint in ("hip", "knee", "ankle"):
                values = np.array([getattr(r, f"{side}_{joint}_rad") for r in g])
                sums[f"{role}_{joint}"] += np.interp(u, uu, values)
        # The row at the exact phase switch carries the boundary fraction
        # (its step time is the first phase's duration).
        in_transfer = np.array([r.phase == "transfer" for r in g])
        edges = np.flatnonzero(np.diff(in_transfer.astype(int)))
        if in_transfer[0]:
            end = uu[edges[0]] if len(edges) else 1.0
            transfer_spans.append((0.0, float(end)))
        else:
            start = uu[edges[0]] if len(edges) else 1.0
            transfer_spans.append((float(start), 1.0))

    n = len(groups)
    channels = {name: (vals / n).tolist() for name, vals in sums.items()}
    t_start = float(np.mean([s for s, _ in transfer_spans]))
    t_end = float(np.mean([e for _, e in transfer_spans]))
    return NormalizedStepTrace(
        phase_fraction=u.tolist(),
        channels=channels,
        transfer_start=t_start,
        transfer_end=t_end,
        steps_averaged=n,
    )


def export_csv(rows: list[TraceRow], path: str | Path) -> None:
    """Write a run trace; header names carry units, floats use repr (shortest
    round-trip form, locale independent)."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for row in rows:
                writer.writerow(
                    [
                        repr(v) if isinstance(v, float) else v
                        for v in (getattr(row, c) for c in TRACE_COLUMNS)
                    ]
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def import_csv(path: str | Path) -> list[TraceRow]:
    """Read back a trace written by export_csv."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != TRACE_COLUMNS:
                raise IoError(f"{path}: unexpected header {header!r}")
            rows = []
            for rec in reader:
                kwargs = {}
                for name, raw in zip(TRACE_COLUMNS, rec):
                    if name in ("phase", "support_side"):
                        kwargs[name] = raw
                    elif name == "step_index":
                        kwargs[name] = int(raw)
                    else:
                        kwargs[name] = float(raw)
                rows.append(TraceRow(**kwargs))
            return rows
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


NORMALIZED_COLUMNS = [
    "phase_fraction",
    "swing_hip_rad",
    "swing_knee_rad",
    "swing_ankle_rad",
    "stance_hip_rad",
    "stance_knee_rad",
    "stance_ankle_rad",
    "in_transfer",
]


def export_normalized_csv(trace: NormalizedStepTrace, path: str | Path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(NORMALIZED_COLUMNS)
            for i, u in enumerate(trace.phase_fraction):
                in_transfer = int(trace.transfer_start - 1e-9 <= u <= trace.transfer_end + 1e-9)
                writer.writerow(
                    [repr(u)]
                    + [
                        repr(trace.channels[f"{role}_{joint}"][i])
                        for role in ("swing", "stance")
                        for joint in ("hip", "knee", "ankle")
                    ]
                    + [in_transfer]
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def average_forward_speed(rows: list[TraceRow]) -> float:
    """Mean hip-frame speed over the walking portion (first step start to
    last step end) of a trace."""
    stepping = [r for r in rows if r.step_index >= 0]
    if not stepping:
        raise ValueError("trace contains no steps")
    first = stepping[0]
    start_i = rows.index(first)
    start = rows[start_i - 1] if start_i > 0 else first
    last_step = max(r.step_index for r in stepping)
    end = None
    for i, r in enumerate(rows):
        if r.step_index == last_step:
            end = rows[i + 1] if i + 1 < len(rows) else r
    dt = end.t_s - start.t_s
    if dt <= 0:
        raise ValueError("degenerate walking window")
    return (end.hip_frame_x_m - start.hip_frame_x_m) / dt
