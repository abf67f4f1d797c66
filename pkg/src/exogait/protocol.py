"""Wire protocol for the pilot console: UTF-8, newline-delimited JSON.

Every message carries a mandatory schema version field ``v`` and a ``type``
of: hello, state, trigger, trigger_ack, behavior, params, error.  Unknown
payload fields are ignored for forward compatibility; malformed input maps
to :class:`MalformedMessage` (the service replies with an error message and
keeps the session open).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .behaviors import Behavior
from .engine import TRIGGER_WINDOW, EngineState

PROTOCOL_VERSION = 1


class MalformedMessage(ValueError):
    """Input line is not a valid protocol message."""


@dataclass(frozen=True)
class Trigger:
    seq: int = 0


@dataclass(frozen=True)
class SelectBehavior:
    behavior: Behavior
    seq: int = 0


@dataclass(frozen=True)
class SetParams:
    name: str
    seq: int = 0


@dataclass(frozen=True)
class Hello:
    role: str = "controller"  # "controller" | "observer"
    seq: int = 0


Command = Trigger | SelectBehavior | SetParams | Hello


def encode(message: dict) -> str:
    """Serialize one message to its wire line (no trailing newline)."""
    payload = {"v": PROTOCOL_VERSION, **message}
    return json.dumps(payload, separators=(",", ":"), allow_nan=False)


def _clean(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return value


def encode_state(state: EngineState, seq: int = 0) -> dict:
    """State snapshot message (field-complete, flat payload)."""
    remaining = state.remaining_step_time
    window_in = None
    if remaining is not None:
        window_in = max(0.0, remaining - TRIGGER_WINDOW)
    msg = {
        "type": "state",
        "seq": seq,
        "t": state.t,
        "phase": state.phase.value,
        "phase_elapsed": state.phase_elapsed,
        "phase_duration": _clean(state.phase_duration),
        "support_side": state.support_side,
        "swing_side": state.swing_side,
        "behavior": state.behavior.name,
        "stone_length": state.behavior.stone_length,
        "params_name": state.params_name,
        "pending_trigger": state.pending_trigger,
        "step_count": state.step_count,
        "hip_x": state.hip_x,
        "hip_z": state.hip_z,
        "remaining_step_time": _clean(remaining),
        "trigger_window_s": TRIGGER_WINDOW,
        "window_opens_in": window_in,
        "in_trigger_window": state.in_trigger_window,
        "facing": state.facing,
    }
    for side in ("left", "right"):
        leg = getattr(state, side)
        msg[f"{side}_hip"] = leg.joints.angles.hip
        msg[f"{side}_knee"] = leg.joints.angles.knee
        msg[f"{side}_ankle"] = leg.joints.angles.ankle
        msg[f"{side}_hip_vel"] = leg.joints.velocities.hip
        msg[f"{side}_knee_vel"] = leg.joints.velocities.knee
        msg[f"{side}_ankle_vel"] = leg.joints.velocities.ankle
        msg[f"{side}_foot_x"] = leg.foot_x
        msg[f"{side}_foot_z"] = leg.foot_z
    return msg


def decode_line(line: str | bytes) -> dict:
    """One wire line to a raw message dict, validating envelope fields."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedMessage(f"not UTF-8: {exc}") from exc
    line = line.strip()
    if not line:
        raise MalformedMessage("empty message line")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedMessage(f"not JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise MalformedMessage(f"message must be an object, got {type(msg).__name__}")
    if "v" not in msg:
        raise MalformedMessage("missing schema version field 'v'")
    if msg["v"] != PROTOCOL_VERSION:
        raise MalformedMessage(f"unsupported schema version {msg['v']!r}")
    if not isinstance(msg.get("type"), str):
        raise MalformedMessage("missing message type")
    return msg


def decode_command(line: str | bytes) -> Command:
    """Parse a client command line; unknown fields are ignored."""
    msg = decode_line(line)
    kind = msg["type"]
    seq = msg.get("seq", 0)
    if not isinstance(seq, int):
        raise MalformedMessage(f"seq must be an integer, got {seq!r}")
    if kind == "trigger":
        return Trigger(seq=seq)
    if kind == "behavior":
        name = msg.get("name")
        if not isinstance(name, str):
            raise MalformedMessage("behavior message needs a string 'name'")
        stone = msg.get("stone_length")
        if stone is not None and not isinstance(stone, (int, float)):
            raise MalformedMessage(f"stone_length must be a number, got {stone!r}")
        try:
            behavior = Behavior.parse(name, stone_length=stone)
        except ValueError as exc:
            raise MalformedMessage(str(exc)) from exc
        return SelectBehavior(behavior=behavior, seq=seq)
    if kind == "params":
        name = msg.get("name")
        if not isinstance(name, str):
            raise MalformedMessage("params message needs a string 'name'")
        return SetParams(name=name, seq=seq)
    if kind == "hello":
        role = msg.get("role", "controller")
        if role not in ("controller", "observer"):
            raise MalformedMessage(f"role must be controller or observer, got {role!r}")
        return Hello(role=role, seq=seq)
    raise MalformedMessage(f"unknown message type {kind!r}")


def encode_command(command: Command) -> str:
    """Commands back to wire form (round trip used by clients and tests)."""
    if isinstance(command, Trigger):
        return encode({"type": "trigger", "seq": command.seq})
    if isinstance(command, SelectBehavior):
        msg = {"type": "behavior", "name": command.behavior.name, "seq": command.seq}
        if command.behavior.stone_length is not None:
            msg["stone_length"] = command.behavior.stone_length
        return encode(msg)
    if isinstance(command, SetParams):
        return encode({"type": "params", "name": command.name, "seq": command.seq})
    if isinstance(command, Hello):
        return encode({"type": "hello", "role": command.role, "seq": command.seq})
    raise TypeError(f"not a command: {command!r}")


def error_message(text: str, seq: int | None = None) -> dict:
    msg = {"type": "error", "message": text}
    if seq is not None:
        msg["seq"] = seq
    return msg
