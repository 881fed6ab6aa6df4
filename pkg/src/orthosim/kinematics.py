"""Wrist flexion/extension angle from a pair of rigid-body orientations.

One orientation sensor sits on a forearm bracelet, the other on the back of
the hand. The signed wrist angle is the twist component (swing-twist
decomposition) of the relative rotation forearm^-1 * hand about a calibrated
anatomical flexion axis. Sign convention: extension positive, flexion
negative, 0 at the calibrated neutral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import InvalidInputError, StreamDesyncError

#: Quaternion as (w, x, y, z).
Quaternion = tuple[float, float, float, float]
Vec3 = tuple[float, float, float]

UNIT_TOLERANCE = 1e-6
DEFAULT_ANGLE_GUARD_DEG = 120.0
#: Default smoothing weight for 100 Hz streams; suppresses sub-degree sensor
#: jitter without adding more than ~50 ms of lag.
DEFAULT_SMOOTHING_ALPHA = 0.3


@dataclass(frozen=True, slots=True)
class OrientationSample:
    """A timestamped unit quaternion from one body-worn sensor."""

    timestamp: float
    orientation: Quaternion

    def __post_init__(self) -> None:
        w, x, y, z = self.orientation
        norm = math.sqrt(w * w + x * x + y * y + z * z)
        if not math.isfinite(norm) or abs(norm - 1.0) > UNIT_TOLERANCE:
            raise InvalidInputError(
                f"orientation quaternion norm {norm!r} is not within "
                f"{UNIT_TOLERANCE} of 1"
            )


@dataclass(frozen=True, slots=True)
class WristSample:
    """Signed wrist angle in degrees; extension positive, flexion negative."""

    timestamp: float
    angle_deg: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.angle_deg):
            raise InvalidInputError(f"wrist angle {self.angle_deg!r} is not finite")


@dataclass(frozen=True, slots=True)
class FlexionAxisCalibration:
    """Flexion axis in the forearm frame plus the per-session neutral offset.

    The axis must be unit length and oriented so that a positive twist about
    it corresponds to wrist extension.
    """

    flexion_axis: Vec3
    neutral_offset_deg: float = 0.0

    def __post_init__(self) -> None:
        x, y, z = self.flexion_axis
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or abs(norm - 1.0) > UNIT_TOLERANCE:
            raise InvalidInputError(
                f"flexion axis norm {norm!r} is not within {UNIT_TOLERANCE} of 1"
            )


def quat_from_axis_angle(axis: Vec3, angle_deg: float) -> Quaternion:
    """Build a unit quaternion for a rotation of ``angle_deg`` about ``axis``."""
    x, y, z = axis
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        raise InvalidInputError("rotation axis must be non-zero")
    half = math.radians(angle_deg) / 2.0
    s = math.sin(half) / norm
    return (math.cos(half), x * s, y * s, z * s)


def quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product a * b."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_conjugate(q: Quaternion) -> Quaternion:
    w, x, y, z = q
    return (w, -x, -y, -z)


def _wrap_degrees(angle: float) -> float:
    """Wrap to (-180, 180]."""
    wrapped = math.fmod(angle + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0


def relative_flexion_angle(
    forearm: OrientationSample,
    hand: OrientationSample,
    calib: FlexionAxisCalibration,
    *,
    tick: float = 0.01,
    guard_deg: float = DEFAULT_ANGLE_GUARD_DEG,
) -> WristSample:
    """Extract the signed wrist angle from a forearm/hand orientation pair.

    The relative rotation forearm^-1 * hand is decomposed into a twist about
    the calibrated flexion axis and a residual swing; only the twist angle is
    returned, minus the neutral offset. Rotations purely orthogonal to the
    axis therefore read as 0.

    Args:
        forearm: Orientation of the forearm bracelet sensor.
        hand: Orientation of the back-of-hand sensor, same timestamp.
        calib: Flexion axis (forearm frame) and neutral offset.
        tick: Stream sample period in seconds; timestamps may disagree by at
            most half of it.
        guard_deg: Anatomical guard; angles beyond it are rejected as
            nonphysical rather than clamped.

    Returns:
        WristSample at the shared timestamp.

    Raises:
        StreamDesyncError: Timestamps differ by more than ``tick / 2``.
        InvalidInputError: Result exceeds the anatomical guard.
    """
    if abs(forearm.timestamp - hand.timestamp) > tick / 2.0:
        raise StreamDesyncError(
            f"forearm t={forearm.timestamp!r} and hand t={hand.timestamp!r} "
            f"differ by more than half a tick ({tick / 2.0!r} s)"
        )
    rel = quat_multiply(quat_conjugate(forearm.orientation), hand.orientation)
    w, x, y, z = rel
    ax, ay, az = calib.flexion_axis
    # Projection of the vector part onto the flexion axis; (w, proj*axis) is
    # the un-normalized twist quaternion, whose angle atan2 recovers directly.
    proj = x * ax + y * ay + z * az
    twist_deg = _wrap_degrees(math.degrees(2.0 * math.atan2(proj, w)))
    angle = twist_deg - calib.neutral_offset_deg
    if abs(angle) > guard_deg:
        raise InvalidInputError(
            f"wrist angle {angle:.3f} deg exceeds the +/-{guard_deg} deg guard"
        )
    return WristSample(timestamp=hand.timestamp, angle_deg=angle)


def calibrate_neutral(
    samples: Sequence[WristSample], calib: FlexionAxisCalibration
) -> FlexionAxisCalibration:
    """Re-zero the calibration so the given window reads 0 degrees on average.

    ``samples`` are wrist angles measured under ``calib``; the returned
    calibration absorbs their mean into the neutral offset, so re-measuring
    the same window yields mean 0. Callers should supply at least one second
    of samples at the stream tick rate.
    """
    if not samples:
        raise InvalidInputError("neutral calibration window is empty")
    mean = sum(s.angle_deg for s in samples) / len(samples)
    return replace(calib, neutral_offset_deg=calib.neutral_offset_deg + mean)


def smooth_angle(previous: WristSample, raw: WristSample, alpha: float) -> WristSample:
    """Exponentially smooth a wrist angle stream.

    y = alpha * raw + (1 - alpha) * previous; alpha = 1 is pass-through.
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f"smoothing alpha {alpha!r} must be in (0, 1]")
    return WristSample(
        timestamp=raw.timestamp,
        angle_deg=alpha * raw.angle_deg + (1.0 - alpha) * previous.angle_deg,
    )
