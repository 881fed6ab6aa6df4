"""Simulated plant: exotendon transmission, contact, tenodesis and load cell.

Models the chain from motor excursion and wrist angle to the force measured
by the instrumented object. Grasp force is the superposition of two paths:
the device path (motor excursion past the contact point loading a linear
contact stiffness) and the passive tenodesis path (wrist extension tensioning
the digit flexors, modeled as a piecewise-linear ramp in wrist angle). The
load cell quantizes the combined force to its 0.28 N resolution.

Two reference operating points anchor the calibration: a no-device maximum of
10.5 N at ~40 degrees of extension and a with-device maximum of 15.3 N at
~25 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .control import MotorState
from .errors import CalibrationError, InvalidInputError
from .kinematics import WristSample

SENSOR_RESOLUTION_N = 0.28

#: Worn mass of the device in grams, excluding the tabletop controller and
#: power supply. Informational only; the plant is quasi-static.
DEVICE_MASS_G = 387.0

#: Default tenodesis onset. Sits at the edge of the default +/-15 degree
#: neutral band so that wrist motion inside the band moves no force on its
#: own; modulating force from within the band then genuinely requires the
#: motor, which is what throttle control is for.
DEFAULT_TENODESIS_ONSET_DEG = 18.0
DEFAULT_TENODESIS_SATURATION_DEG = 40.0


@dataclass(frozen=True, slots=True)
class TransmissionParams:
    """Exotendon transmission abstracted to dead travel plus a linear gain.

    slack is the excursion consumed before the fingers move at all;
    flexion_gain converts the remaining excursion to degrees of finger
    flexion in free space.
    """

    slack: float = 0.1
    flexion_gain: float = 100.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.slack < 1.0:
            raise InvalidInputError(f"slack {self.slack!r} not in [0, 1)")
        if self.flexion_gain <= 0.0:
            raise InvalidInputError(f"flexion_gain {self.flexion_gain!r} must be > 0")


@dataclass(frozen=True, slots=True)
class ContactModel:
    """One-sided linear spring engaged once the fingertips meet the object.

    The default stiffness is nominal; anchor-exact values come from
    calibrate_plant.
    """

    contact_excursion: float = 0.2
    device_stiffness: float = 15.0  # N per excursion unit

    def __post_init__(self) -> None:
        if not 0.0 <= self.contact_excursion <= 1.0:
            raise InvalidInputError(
                f"contact_excursion {self.contact_excursion!r} not in [0, 1]"
            )
        if self.device_stiffness <= 0.0:
            raise InvalidInputError(
                f"device_stiffness {self.device_stiffness!r} must be > 0"
            )


@dataclass(frozen=True, slots=True)
class TenodesisCurve:
    """Passive grasp force from wrist extension: zero below onset, linear up
    to saturation, flat beyond."""

    onset_deg: float = DEFAULT_TENODESIS_ONSET_DEG
    saturation_deg: float = DEFAULT_TENODESIS_SATURATION_DEG
    max_force: float = 10.5

    def __post_init__(self) -> None:
        if not self.onset_deg < self.saturation_deg:
            raise InvalidInputError(
                f"tenodesis curve requires onset < saturation, got "
                f"({self.onset_deg!r}, {self.saturation_deg!r})"
            )
        if self.max_force < 0.0:
            raise InvalidInputError(f"max_force {self.max_force!r} must be >= 0")


@dataclass(frozen=True, slots=True)
class InstrumentedObject:
    """Spring-buffered uniaxial load cell held by the participant."""

    series_stiffness: float = 2.0  # N/mm, tactile feel only; not in the force path
    sensor_resolution: float = SENSOR_RESOLUTION_N
    max_range: float = 50.0

    def __post_init__(self) -> None:
        if self.series_stiffness <= 0.0:
            raise InvalidInputError(
                f"series_stiffness {self.series_stiffness!r} must be > 0"
            )
        if self.sensor_resolution <= 0.0:
            raise InvalidInputError(
                f"sensor_resolution {self.sensor_resolution!r} must be > 0"
            )
        if self.max_range <= 0.0:
            raise InvalidInputError(f"max_range {self.max_range!r} must be > 0")


@dataclass(frozen=True, slots=True)
class PlantParams:
    """Immutable bundle of all plant constants for one session."""

    transmission: TransmissionParams = TransmissionParams()
    contact: ContactModel = ContactModel()
    tenodesis: TenodesisCurve = TenodesisCurve()
    instrument: InstrumentedObject = InstrumentedObject()

    def __post_init__(self) -> None:
        if self.contact.contact_excursion < self.transmission.slack:
            raise InvalidInputError(
                f"contact_excursion {self.contact.contact_excursion!r} must be "
                f">= slack {self.transmission.slack!r}"
            )


@dataclass(frozen=True, slots=True)
class PlantState:
    """Per-tick plant outputs."""

    finger_flexion_deg: float
    in_contact: bool
    device_force: float
    tenodesis_force: float
    true_force: float
    measured_force: float
    saturated: bool = False


def tendon_to_flexion(excursion: float, params: TransmissionParams) -> float:
    """Free-space finger flexion in degrees for a given excursion.

    Valid pre-contact only; past contact the fingers rest on the object and
    further excursion builds force instead (see plant_step).
    """
    if not 0.0 <= excursion <= 1.0:
        raise InvalidInputError(f"excursion {excursion!r} not in [0, 1]")
    return params.flexion_gain * max(0.0, excursion - params.slack)


def device_force(excursion: float, contact: ContactModel) -> float:
    """Force contributed by the motor: excursion past contact times stiffness."""
    if not 0.0 <= excursion <= 1.0:
        raise InvalidInputError(f"excursion {excursion!r} not in [0, 1]")
    return contact.device_stiffness * max(0.0, excursion - contact.contact_excursion)


def tenodesis_force(angle_deg: float, curve: TenodesisCurve) -> float:
    """Passive grasp force at a given wrist angle."""
    if angle_deg <= curve.onset_deg:
        return 0.0
    if angle_deg >= curve.saturation_deg:
        return curve.max_force
    frac = (angle_deg - curve.onset_deg) / (curve.saturation_deg - curve.onset_deg)
    return curve.max_force * frac


def measure_force(true_force: float, instrument: InstrumentedObject) -> float:
    """Quantize a force to the load cell grid.

    Rounds to the nearest integer multiple of the sensor resolution with ties
    to the even multiple (unbiased and deterministic), so the reading is
    always within half a quantum of the input. Forces beyond max_range rail
    at the top of the grid; plant_step flags that as saturation.
    """
    if true_force < 0.0 or not math.isfinite(true_force):
        raise InvalidInputError(f"force {true_force!r} must be finite and >= 0")
    clamped = min(true_force, instrument.max_range)
    steps = round(clamped / instrument.sensor_resolution)  # banker's rounding
    return steps * instrument.sensor_resolution


def plant_step(motor: MotorState, wrist: WristSample, params: PlantParams) -> PlantState:
    """Evaluate the full plant for one tick.

    Composes transmission, contact, tenodesis and the load cell. Fingers
    track the tendon up to the contact point and stop on the object there;
    they never close further than the motor has pulled, and they return only
    as fast as the motor releases (no extension assist).
    """
    excursion = motor.position
    contact = params.contact
    in_contact = excursion >= contact.contact_excursion
    flexion = tendon_to_flexion(
        min(excursion, contact.contact_excursion), params.transmission
    )
    dev = device_force(excursion, contact)
    ten = tenodesis_force(wrist.angle_deg, params.tenodesis)
    true = dev + ten
    saturated = true > params.instrument.max_range
    measured = measure_force(true, params.instrument)
    return PlantState(
        finger_flexion_deg=flexion,
        in_contact=in_contact,
        device_force=dev,
        tenodesis_force=ten,
        true_force=true,
        measured_force=measured,
        saturated=saturated,
    )


@dataclass(frozen=True, slots=True)
class CalibrationAnchors:
    """Published operating points the plant must reproduce.

    no_device: peak force and the wrist angle it occurred at with the device
    off. with_device: peak force and wrist angle with full assistance.
    """

    no_device_force: float = 10.5
    no_device_angle_deg: float = 40.0
    with_device_force: float = 15.3
    with_device_angle_deg: float = 25.0

    def __post_init__(self) -> None:
        if self.no_device_force <= 0.0 or self.with_device_force <= 0.0:
            raise InvalidInputError("anchor forces must be > 0")


def default_plant() -> PlantParams:
    """Plant constants calibrated from the default anchors; what a session
    gets when it overrides nothing."""
    return calibrate_plant(CalibrationAnchors())


def calibrate_plant(
    anchors: CalibrationAnchors,
    *,
    transmission: TransmissionParams = TransmissionParams(),
    tenodesis: TenodesisCurve = TenodesisCurve(),
    instrument: InstrumentedObject = InstrumentedObject(),
    contact_excursion: float = 0.2,
    motor_upper_limit: float = 1.0,
) -> PlantParams:
    """Solve tenodesis max force and device stiffness from the two anchors.

    The no-device anchor fixes the tenodesis ramp height: the ramp evaluated
    at the anchor angle must equal the anchor force. The with-device anchor
    then fixes the contact stiffness: tenodesis at the assisted angle plus
    the device at full excursion must equal the assisted force.

    Args:
        anchors: The two target operating points.
        transmission: Dead travel and flexion gain (not solved for).
        tenodesis: Provides onset/saturation; max_force is replaced.
        instrument: Load-cell parameters, passed through.
        contact_excursion: Excursion at which fingertips meet the object.
        motor_upper_limit: Excursion the motor reaches at full assistance.

    Returns:
        A PlantParams whose plant_step reproduces both anchors within one
        sensor quantum.

    Raises:
        CalibrationError: The anchors imply a non-positive stiffness or the
            no-device angle is below the tenodesis onset.
    """
    onset, saturation = tenodesis.onset_deg, tenodesis.saturation_deg

    def ramp_frac(angle: float) -> float:
        return min(max((angle - onset) / (saturation - onset), 0.0), 1.0)

    frac_no_device = ramp_frac(anchors.no_device_angle_deg)
    if frac_no_device <= 0.0:
        raise CalibrationError(
            f"no-device anchor angle {anchors.no_device_angle_deg!r} deg is at or "
            f"below the tenodesis onset {onset!r} deg"
        )
    max_force = anchors.no_device_force / frac_no_device
    curve = TenodesisCurve(onset_deg=onset, saturation_deg=saturation, max_force=max_force)

    residual = anchors.with_device_force - tenodesis_force(
        anchors.with_device_angle_deg, curve
    )
    travel = motor_upper_limit - contact_excursion
    if residual <= 0.0 or travel <= 0.0:
        raise CalibrationError(
            f"with-device anchor {anchors.with_device_force!r} N leaves no room "
            f"for a positive device stiffness (tenodesis already contributes "
            f"{anchors.with_device_force - residual:.3f} N at "
            f"{anchors.with_device_angle_deg!r} deg)"
        )
    contact = ContactModel(
        contact_excursion=contact_excursion, device_stiffness=residual / travel
    )
    return PlantParams(
        transmission=transmission,
        contact=contact,
        tenodesis=curve,
        instrument=instrument,
    )
