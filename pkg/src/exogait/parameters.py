"""Gait parameter sets: validation, built-in presets, and config-file IO.

The config format is INI (one section per named set, ``key = value`` pairs,
``#`` comments).  Angles are written in degrees in files for easy hand
editing and converted to radians on load; lengths are meters, times are
seconds.  See ``docs/parameters.example.ini`` for the documented grammar.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .geometry import LegGeometry

#: Allowed stepping-stone step-length window, meters.
STONE_LENGTH_MIN = 0.35
STONE_LENGTH_MAX = 0.69


class ParseError(ValueError):
    """Config file could not be read or parsed."""


class ValidationError(ValueError):
    """A parameter set violates one of its invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class GaitParameters:
    """One step's worth of gait tuning knobs.

    ``pct_back``/``pct_front`` place the two swing midpoints as percentages
    of the step span measured from its back/front ends.  ``step_rise`` is the
    per-step elevation change: 0 on flat ground, +0.18 for stair ascent,
    signed rise per step on ramps.
    """

    step_length: float
    swing_height: float
    pct_back: float
    pct_front: float
    swing_time: float
    transfer_time: float
    toe_off_angle: float = math.radians(20.0)
    fast_toeoff_extra: float = math.radians(10.0)
    fast_toeoff_duration: float = 0.15
    step_rise: float = 0.0

    @property
    def step_time(self) -> float:
        return self.transfer_time + self.swing_time

    @property
    def transfer_fraction(self) -> float:
        return self.transfer_time / self.step_time

    def violations(self) -> list[str]:
        out = []
        if not self.step_length > 0.0:
            out.append(f"step_length must be > 0, got {self.step_length}")
        if not self.swing_height > 0.0:
            out.append(f"swing_height must be > 0, got {self.swing_height}")
        if not 0.0 < self.pct_back < 100.0:
            out.append(f"pct_back must be in (0, 100), got {self.pct_back}")
        if not 0.0 < self.pct_front < 100.0:
            out.append(f"pct_front must be in (0, 100), got {self.pct_front}")
        if self.pct_back + self.pct_front >= 100.0:
            out.append(
                f"pct_back + pct_front must be < 100, got {self.pct_back + self.pct_front}"
            )
        if not self.swing_time > 0.0:
            out.append(f"swing_time must be > 0, got {self.swing_time}")
        if not self.transfer_time > 0.0:
            out.append(f"transfer_time must be > 0, got {self.transfer_time}")
        if not 0.0 <= self.toe_off_angle <= math.radians(65.0):
            out.append(
                f"toe_off_angle must be within the ankle window [0, 65] deg, "
                f"got {math.degrees(self.toe_off_angle):.1f} deg"
            )
        if self.fast_toeoff_extra < 0.0:
            out.append(f"fast_toeoff_extra must be >= 0, got {self.fast_toeoff_extra}")
        if not 0.0 < self.fast_toeoff_duration < self.transfer_time:
            out.append(
                f"fast_toeoff_duration must be in (0, transfer_time), "
                f"got {self.fast_toeoff_duration} vs transfer_time {self.transfer_time}"
            )
        return out

    def validated(self) -> "GaitParameters":
        problems = self.violations()
        if problems:
            raise ValidationError(problems)
        return self


def validate(params: GaitParameters) -> list[str]:
    """Violation descriptions for ``params`` (empty list when valid)."""
    return params.violations()


def validate_stone_length(step_length: float) -> None:
    if not STONE_LENGTH_MIN <= step_length <= STONE_LENGTH_MAX:
        raise ValidationError(
            [
                f"stepping-stone step_length must be within "
                f"[{STONE_LENGTH_MIN}, {STONE_LENGTH_MAX}] m, got {step_length}"
            ]
        )


@dataclass(frozen=True)
class ParameterSet:
    """A named GaitParameters with its provenance."""

    name: str
    params: GaitParameters
    source: str = "builtin"  # "builtin" | "file"


def builtin_presets() -> dict[str, ParameterSet]:
    """The four shipped presets, keyed by name."""
    presets = {
        "flat": GaitParameters(
            step_length=0.4, swing_height=0.1, pct_back=15.0, pct_front=15.0,
            swing_time=1.0, transfer_time=0.4, step_rise=0.0,
        ),
        "stairs": GaitParameters(
            step_length=0.29, swing_height=0.15, pct_back=20.0, pct_front=20.0,
            swing_time=1.6, transfer_time=1.1, step_rise=0.18,
        ),
        "slopes": GaitParameters(
            step_length=0.31, swing_height=0.08, pct_back=20.0, pct_front=20.0,
            swing_time=1.2, transfer_time=0.6, step_rise=0.05,
        ),
        "stepping_stones": GaitParameters(
            step_length=0.5, swing_height=0.1, pct_back=15.0, pct_front=15.0,
            swing_time=1.8, transfer_time=0.6, step_rise=0.0,
        ),
    }
    out = {}
    for name, params in presets.items():
        out[name] = ParameterSet(name, params.validated(), source="builtin")
    return out


# File keys: (attribute, converter-to-internal, converter-to-file).
_DEG_KEYS = {"toe_off_angle_deg": "toe_off_angle", "fast_toeoff_extra_deg": "fast_toeoff_extra"}
_PLAIN_KEYS = (
    "step_length", "swing_height", "pct_back", "pct_front",
    "swing_time", "transfer_time", "fast_toeoff_duration", "step_rise",
)


def load_file(path: str | Path) -> list[ParameterSet]:
    """Parameter sets from an INI file; unknown section keys are rejected.

    Sections sharing a name with a builtin preset start from that preset and
    override only the keys given; other sections must define the six core
    values (step_length, swing_height, pct_back, pct_front, swing_time,
    transfer_time).
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        text = path.read_text(encoding="utf-8")
        parser.read_string(text, source=str(path))
    except (OSError, UnicodeDecodeError, configparser.Error) as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc

    presets = builtin_presets()
    out = []
    for section in parser.sections():
        base = presets[section].params if section in presets else None
        values: dict[str, float] = {}
        for key, raw in parser.items(section):
            if key in _PLAIN_KEYS:
                attr = key
                scale = 1.0
            elif key in _DEG_KEYS:
                attr = _DEG_KEYS[key]
                scale = math.pi / 180.0
            else:
                raise ParseError(f"{path} [{section}]: unknown key {key!r}")
            try:
                values[attr] = float(raw) * scale
            except ValueError as exc:
                raise ParseError(f"{path} [{section}] {key}: not a number: {raw!r}") from exc
        if base is not None:
            params = replace(base, **values)
        else:
            missing = [k for k in _PLAIN_KEYS[:6] if k not in values]
            if missing:
                raise ParseError(f"{path} [{section}]: missing required keys {missing}")
            params = GaitParameters(**values)
        try:
            params = params.validated()
            if section == "stepping_stones":
                validate_stone_length(params.step_length)
        except ValidationError as exc:
            raise ValidationError([f"[{section}] {v}" for v in exc.violations]) from exc
        out.append(ParameterSet(section, params, source="file"))
    if not out:
        raise ParseError(f"{path}: no parameter sections found")
    return out


def save_file(sets: list[ParameterSet], path: str | Path) -> None:
    """Write sets in the same INI grammar that load_file accepts."""
    lines = [
        "# exogait parameter sets",
        "# lengths in meters, times in seconds, *_deg keys in degrees",
    ]
    for ps in sets:
        p = ps.params
        lines.append("")
        lines.append(f"[{ps.name}]")
        for key in _PLAIN_KEYS:
            lines.append(f"{key} = {getattr(p, key)!r}")
        lines.append(f"toe_off_angle_deg = {math.degrees(p.toe_off_angle)!r}")
        lines.append(f"fast_toeoff_extra_deg = {math.degrees(p.fast_toeoff_extra)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class ParameterStore:
    """Read-mostly registry of named parameter sets (builtins + files)."""

    def __init__(self, extra_files: list[str | Path] | None = None):
        self._sets: dict[str, ParameterSet] = dict(builtin_presets())
        for f in extra_files or []:
            self.load(f)

    def load(self, path: str | Path) -> list[ParameterSet]:
        loaded = load_file(path)
        for ps in loaded:
            self._sets[ps.name] = ps
        return loaded

    def get(self, name: str) -> ParameterSet:
        try:
            return self._sets[name]
        except KeyError:
            raise KeyError(f"unknown parameter set {name!r}; have {sorted(self._sets)}") from None

    def names(self) -> list[str]:
        return sorted(self._sets)


def load_geometry_file(path: str | Path) -> LegGeometry:
    """LegGeometry from an INI file with a single [geometry] section."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(Path(path).read_text(encoding="utf-8"), source=str(path))
    except (OSError, UnicodeDecodeError, configparser.Error) as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    if "geometry" not in parser:
        raise ParseError(f"{path}: missing [geometry] section")
    kwargs = {}
    allowed = {"thigh_length", "shank_length", "foot_forward_length", "ankle_height"}
    for key, raw in parser.items("geometry"):
        if key not in allowed:
            raise ParseError(f"{path} [geometry]: unknown key {key!r}")
        try:
            kwargs[key] = float(raw)
        except ValueError as exc:
            raise ParseError(f"{path} [geometry] {key}: not a number: {raw!r}") from exc
    try:
        return LegGeometry(**kwargs)
    except ValueError as exc:
        raise ValidationError([str(exc)]) from exc
