"""Behavior vocabulary shared by the planner, engine, CLI, and wire protocol."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .parameters import GaitParameters, validate_stone_length


class BehaviorKind(Enum):
    FLAT_WALK = "flat_walk"
    STAIRS_UP = "stairs_up"
    STAIRS_DOWN = "stairs_down"
    RAMP_UP = "ramp_up"
    RAMP_DOWN = "ramp_down"
    STEPPING_STONES = "stepping_stones"
    STAND = "stand"


#: Preset name each behavior draws its parameters from.
PRESET_FOR_BEHAVIOR = {
    BehaviorKind.FLAT_WALK: "flat",
    BehaviorKind.STAIRS_UP: "stairs",
    BehaviorKind.STAIRS_DOWN: "stairs",
    BehaviorKind.RAMP_UP: "slopes",
    BehaviorKind.RAMP_DOWN: "slopes",
    BehaviorKind.STEPPING_STONES: "stepping_stones",
    BehaviorKind.STAND: "flat",
}

#: Behaviors that move the pilot forward (+x).  Stair descent is walked
#: backwards, so switching between the two groups needs an explicit
#: reorientation acknowledgment from the pilot.
FORWARD_KINDS = frozenset(
    {
        BehaviorKind.FLAT_WALK,
        BehaviorKind.STAIRS_UP,
        BehaviorKind.RAMP_UP,
        BehaviorKind.RAMP_DOWN,
        BehaviorKind.STEPPING_STONES,
    }
)
BACKWARD_KINDS = frozenset({BehaviorKind.STAIRS_DOWN})


@dataclass(frozen=True)
class Behavior:
    """A selected behavior; stepping stones carry their commanded step length."""

    kind: BehaviorKind
    stone_length: float | None = None

    def __post_init__(self) -> None:
        if self.kind is BehaviorKind.STEPPING_STONES:
            if self.stone_length is None:
                raise ValueError("stepping stones behavior needs a step length")
            validate_stone_length(self.stone_length)
        elif self.stone_length is not None:
            raise ValueError(f"{self.kind.value} takes no stone_length")

    @classmethod
    def flat_walk(cls) -> "Behavior":
        return cls(BehaviorKind.FLAT_WALK)

    @classmethod
    def stairs_up(cls) -> "Behavior":
        return cls(BehaviorKind.STAIRS_UP)

    @classmethod
    def stairs_down(cls) -> "Behavior":
        return cls(BehaviorKind.STAIRS_DOWN)

    @classmethod
    def ramp_up(cls) -> "Behavior":
        return cls(BehaviorKind.RAMP_UP)

    @classmethod
    def ramp_down(cls) -> "Behavior":
        return cls(BehaviorKind.RAMP_DOWN)

    @classmethod
    def stepping_stones(cls, step_length: float) -> "Behavior":
        return cls(BehaviorKind.STEPPING_STONES, stone_length=step_length)

    @classmethod
    def stand(cls) -> "Behavior":
        return cls(BehaviorKind.STAND)

    @classmethod
    def parse(cls, name: str, stone_length: float | None = None) -> "Behavior":
        try:
            kind = BehaviorKind(name)
        except ValueError:
            valid = ", ".join(k.value for k in BehaviorKind)
            raise ValueError(f"unknown behavior {name!r}; expected one of: {valid}") from None
        if kind is BehaviorKind.STEPPING_STONES:
            return cls(kind, stone_length=stone_length if stone_length is not None else 0.5)
        return cls(kind)

    @property
    def name(self) -> str:
        return self.kind.value

    def is_forward(self) -> bool:
        return self.kind in FORWARD_KINDS

    def resolve_params(self, base: GaitParameters) -> GaitParameters:
        """Behavior-adjusted copy of ``base`` (stone length, rise sign)."""
        kind = self.kind
        if kind is BehaviorKind.STEPPING_STONES:
            return replace(base, step_length=self.stone_length, step_rise=0.0)
        if kind is BehaviorKind.FLAT_WALK or kind is BehaviorKind.STAND:
            return replace(base, step_rise=0.0)
        if kind in (BehaviorKind.STAIRS_UP, BehaviorKind.STAIRS_DOWN, BehaviorKind.RAMP_UP):
            return replace(base, step_rise=abs(base.step_rise))
        if kind is BehaviorKind.RAMP_DOWN:
            return replace(base, step_rise=-abs(base.step_rise))
        raise AssertionError(f"unhandled behavior {kind}")
