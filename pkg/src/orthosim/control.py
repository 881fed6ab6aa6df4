"""Wrist-angle control modes for the orthosis motor.

Three user-control methods over the same single-motor plant:

* throttle: three wrist-angle regions; Close and Open integrate the motor
  position in opposite directions, Neutral holds it, so any grasp level can
  be reached with moderate extension and kept at a relaxed wrist.
* binary: a threshold latch between fully relaxed and fully grasping.
* proportional: wrist angle mapped linearly to the motor setpoint.

All steps are pure state-transition functions; the motor position is clamped
to [0, upper_limit] at every step regardless of input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InvalidInputError
from .kinematics import WristSample


class Region(Enum):
    OPEN = "open"
    NEUTRAL = "neutral"
    CLOSE = "close"


class GraspLatch(Enum):
    RELAXED = "relaxed"
    GRASPING = "grasping"


@dataclass(frozen=True, slots=True)
class RegionThresholds:
    """Wrist-angle dead-band edges in degrees; defaults are the comfortable
    +/-15 degrees found in participant training."""

    open_deg: float = -15.0
    close_deg: float = 15.0

    def __post_init__(self) -> None:
        if not (self.open_deg < 0.0 < self.close_deg):
            raise InvalidInputError(
                f"thresholds must satisfy open < 0 < close, got "
                f"({self.open_deg!r}, {self.close_deg!r})"
            )


@dataclass(frozen=True, slots=True)
class MotorState:
    """Normalized tendon excursion plus slew limits.

    position and upper_limit are in [0, 1] excursion units; speed is
    excursion per second.
    """

    position: float = 0.0
    speed: float = 0.25
    upper_limit: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.upper_limit <= 1.0:
            raise InvalidInputError(f"upper_limit {self.upper_limit!r} not in (0, 1]")
        if not 0.0 <= self.position <= self.upper_limit:
            raise InvalidInputError(
                f"motor position {self.position!r} outside [0, {self.upper_limit!r}]"
            )
        if self.speed <= 0.0:
            raise InvalidInputError(f"motor speed {self.speed!r} must be > 0")


@dataclass(frozen=True, slots=True)
class Twa:
    """Throttle mode: integrate in active regions, hold in Neutral."""


@dataclass(frozen=True, slots=True)
class Bwa:
    """Binary mode; carries the current relaxed/grasping latch."""

    latched: GraspLatch = GraspLatch.RELAXED


@dataclass(frozen=True, slots=True)
class Pwa:
    """Proportional mode mapping [map_min_deg, map_max_deg] onto [0, 1].

    The default 40 degree full-scale matches the wrist extension observed at
    maximum unassisted grasp force.
    """

    map_min_deg: float = 0.0
    map_max_deg: float = 40.0

    def __post_init__(self) -> None:
        if not self.map_min_deg < self.map_max_deg:
            raise InvalidInputError(
                f"proportional map requires min < max, got "
                f"({self.map_min_deg!r}, {self.map_max_deg!r})"
            )


@dataclass(frozen=True, slots=True)
class Passive:
    """No-device baseline: the motor stays at zero excursion."""


ControlMode = Twa | Bwa | Pwa | Passive

MODE_NAMES = {"twa": Twa, "bwa": Bwa, "pwa": Pwa, "passive": Passive}


def mode_name(mode: ControlMode) -> str:
    return type(mode).__name__.lower()


@dataclass(frozen=True, slots=True)
class ControllerState:
    """Controller mode, thresholds and motor state plus the last classified
    region (kept for logging)."""

    mode: ControlMode
    thresholds: RegionThresholds
    motor: MotorState
    region: Region = Region.NEUTRAL


def classify_region(angle_deg: float, thresholds: RegionThresholds) -> Region:
    """Partition a wrist angle into Open/Neutral/Close.

    Exact boundary values map to Neutral: an ambiguous reading must never
    actuate the motor.
    """
    if not math.isfinite(angle_deg):
        raise InvalidInputError(f"wrist angle {angle_deg!r} is not finite")
    if angle_deg > thresholds.close_deg:
        return Region.CLOSE
    if angle_deg < thresholds.open_deg:
        return Region.OPEN
    return Region.NEUTRAL


def _slew(motor: MotorState, setpoint: float, dt: float) -> MotorState:
    """Move position toward setpoint at the motor speed, clamped to limits."""
    step = motor.speed * dt
    delta = setpoint - motor.position
    if delta > step:
        delta = step
    elif delta < -step:
        delta = -step
    position = min(max(motor.position + delta, 0.0), motor.upper_limit)
    return replace(motor, position=position)


def twa_step(region: Region, motor: MotorState, dt: float) -> MotorState:
    """Advance the motor one tick under throttle control.

    Close integrates up, Open integrates down, Neutral holds the position
    bit-identically. Both directions clamp at the safety limits.
    """
    if dt <= 0.0:
        raise InvalidInputError(f"dt {dt!r} must be > 0")
    if region is Region.NEUTRAL:
        return motor
    if region is Region.CLOSE:
        return replace(
            motor, position=min(motor.position + motor.speed * dt, motor.upper_limit)
        )
    return replace(motor, position=max(motor.position - motor.speed * dt, 0.0))


def bwa_step(
    angle_deg: float,
    thresholds: RegionThresholds,
    latched: GraspLatch,
    motor: MotorState,
    dt: float,
) -> tuple[GraspLatch, MotorState]:
    """Advance the binary controller one tick.

    Crossing the close threshold latches grasping, crossing the open
    threshold latches relaxed; between thresholds the latch holds. The motor
    slews toward the latched extreme (upper limit or zero) and never targets
    anything in between.
    """
    if dt <= 0.0:
        raise InvalidInputError(f"dt {dt!r} must be > 0")
    if not math.isfinite(angle_deg):
        raise InvalidInputError(f"wrist angle {angle_deg!r} is not finite")
    if angle_deg > thresholds.close_deg:
        latched = GraspLatch.GRASPING
    elif angle_deg < thresholds.open_deg:
        latched = GraspLatch.RELAXED
    setpoint = motor.upper_limit if latched is GraspLatch.GRASPING else 0.0
    return latched, _slew(motor, setpoint, dt)


def pwa_step(angle_deg: float, mode: Pwa, motor: MotorState, dt: float) -> MotorState:
    """Advance the proportional controller one tick.

    The wrist angle maps linearly onto [0, upper_limit] over the configured
    span, clamped outside it; the motor slews toward that setpoint.
    """
    if dt <= 0.0:
        raise InvalidInputError(f"dt {dt!r} must be > 0")
    if not math.isfinite(angle_deg):
        raise InvalidInputError(f"wrist angle {angle_deg!r} is not finite")
    frac = (angle_deg - mode.map_min_deg) / (mode.map_max_deg - mode.map_min_deg)
    frac = min(max(frac, 0.0), 1.0)
    return _slew(motor, frac * motor.upper_limit, dt)


def controller_step(
    state: ControllerState, wrist: WristSample, dt: float
) -> ControllerState:
    """Dispatch one tick to the active mode and record the classified region.

    Passive pins the motor at zero excursion. ``dt`` must equal the
    configured tick period for the integration rates to be meaningful.
    """
    region = classify_region(wrist.angle_deg, state.thresholds)
    mode = state.mode
    if isinstance(mode, Twa):
        motor = twa_step(region, state.motor, dt)
    elif isinstance(mode, Bwa):
        latched, motor = bwa_step(
            wrist.angle_deg, state.thresholds, mode.latched, state.motor, dt
        )
        if latched is not mode.latched:
            mode = Bwa(latched=latched)
    elif isinstance(mode, Pwa):
        motor = pwa_step(wrist.angle_deg, mode, state.motor, dt)
    elif isinstance(mode, Passive):
        if dt <= 0.0:
            raise InvalidInputError(f"dt {dt!r} must be > 0")
        motor = (
            state.motor
            if state.motor.position == 0.0
            else replace(state.motor, position=0.0)
        )
    else:  # pragma: no cover - exhaustive over ControlMode
        raise InvalidInputError(f"unknown control mode {mode!r}")
    return ControllerState(mode=mode, thresholds=state.thresholds, motor=motor, region=region)
