"""Wrist-angle input sources: scripted trajectories and a virtual participant.

The virtual participant is a behavioral stand-in, not a model of any real
person: a bang-bang policy acting on visually delayed force feedback, with a
bounded wrist rate and seeded angle noise. Its parameters are configuration,
and the overshoot it produces at low force targets is an emergent property of
the delay, not a fitted quantity.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .control import Bwa, ControlMode, Twa
from .errors import InvalidInputError


@dataclass(frozen=True, slots=True)
class ScriptedTrajectory:
    """Piecewise-linear angle schedule; clamps to the end angles outside it."""

    times: tuple[float, ...]
    angles_deg: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.times:
            raise InvalidInputError("trajectory needs at least one waypoint")
        if len(self.times) != len(self.angles_deg):
            raise InvalidInputError("times and angles differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise InvalidInputError("waypoint times must be strictly increasing")
        if any(abs(a) > 120.0 for a in self.angles_deg):
            raise InvalidInputError("waypoint angles must stay within +/-120 deg")

    @classmethod
    def from_waypoints(cls, waypoints: Sequence[tuple[float, float]]) -> "ScriptedTrajectory":
        return cls(
            times=tuple(t for t, _ in waypoints),
            angles_deg=tuple(a for _, a in waypoints),
        )


def scripted_angle(traj: ScriptedTrajectory, t: float) -> float:
    """Linearly interpolate the trajectory at time t."""
    if t < 0.0:
        raise InvalidInputError(f"t {t!r} must be >= 0")
    return float(np.interp(t, traj.times, traj.angles_deg))


@dataclass(frozen=True, slots=True)
class ParticipantModel:
    """Virtual participant parameters; all plausible-scale configuration.

    The delay/rate defaults keep the delayed bang-bang loop stable against
    the default plant: the force swing accrued during one reaction delay
    stays below the +/-1 N target band, so the policy can converge instead
    of limit-cycling.
    """

    reaction_delay: float = 0.12
    max_wrist_rate: float = 30.0  # deg/s
    angle_noise_sigma: float = 0.5  # deg
    comfort_max_extension: float | None = None  # None: per-mode default
    rng_seed: int = 1234

    def __post_init__(self) -> None:
        if self.reaction_delay < 0.0:
            raise InvalidInputError(f"reaction_delay {self.reaction_delay!r} < 0")
        if self.max_wrist_rate <= 0.0:
            raise InvalidInputError(f"max_wrist_rate {self.max_wrist_rate!r} <= 0")
        if self.angle_noise_sigma < 0.0:
            raise InvalidInputError(f"angle_noise_sigma {self.angle_noise_sigma!r} < 0")


def comfort_extension(model: ParticipantModel, mode: ControlMode) -> float:
    """Extension the participant is willing to reach under a given mode.

    With throttle or binary assistance a moderate ~25 degrees suffices (the
    motor does the rest); unassisted and proportional control need the full
    ~40 degrees observed at maximum tenodesis force.
    """
    if model.comfort_max_extension is not None:
        return model.comfort_max_extension
    if isinstance(mode, (Twa, Bwa)):
        return 25.0
    return 40.0


class Intent(Enum):
    INCREASE = "increase"
    DECREASE = "decrease"
    SETTLE = "settle"


class PolicyState:
    """Mutable per-trial participant state: delayed feedback buffer, current
    intent, settle anchor and the seeded noise stream."""

    def __init__(self, model: ParticipantModel, tick: float) -> None:
        if tick <= 0.0:
            raise InvalidInputError(f"tick {tick!r} must be > 0")
        self.delay_ticks = math.ceil(model.reaction_delay / tick)
        self._buffer: deque[float] = deque(
            [0.0] * self.delay_ticks, maxlen=max(self.delay_ticks, 1)
        )
        # A trial opens with the participant reaching for the target, so the
        # first in-band tick records a fresh settle anchor.
        self.intent = Intent.INCREASE
        self.settle_anchor_deg = 0.0
        self._rng = np.random.default_rng(model.rng_seed)
        self._sigma = model.angle_noise_sigma

    def observe(self, measured_force: float) -> float:
        """Push the current measurement; return the one the participant sees.

        The returned value is the measurement from ``delay_ticks`` ago, so
        the policy never reacts to anything newer than its reaction delay.
        """
        if self.delay_ticks == 0:
            return measured_force
        delayed = self._buffer[0]
        self._buffer.append(measured_force)
        return delayed

    def noise(self) -> float:
        """One clipped noise draw; bounded at 3 sigma so rate and comfort
        bounds stay hard."""
        if self._sigma == 0.0:
            return 0.0
        draw = float(self._rng.normal(0.0, self._sigma))
        return min(max(draw, -3.0 * self._sigma), 3.0 * self._sigma)


def step_toward(current: float, target: float, max_step: float) -> float:
    """Move current toward target by at most max_step."""
    delta = target - current
    if delta > max_step:
        delta = max_step
    elif delta < -max_step:
        delta = -max_step
    return current + delta


def modulation_policy(
    model: ParticipantModel,
    state: PolicyState,
    delayed_force: float,
    target: float,
    band: float,
    mode: ControlMode,
    current_angle_deg: float,
    dt: float,
) -> float:
    """One tick of the force-matching policy; returns the next wrist angle.

    Bang-bang on the delayed reading: too low extends toward the comfort
    limit, too high flexes away, in band the wrist settles. Settling means
    returning to neutral under throttle control (the whole point of the
    Neutral region) and freezing at the entry angle under the other modes,
    which need sustained extension to sustain force. Noise is added to the
    settle/drive target and the move is rate-limited, so per-tick motion
    never exceeds max_wrist_rate * dt.
    """
    if band <= 0.0:
        raise InvalidInputError(f"band {band!r} must be > 0")
    comfort = comfort_extension(model, mode)
    if delayed_force < target - band:
        state.intent = Intent.INCREASE
        goal = comfort
    elif delayed_force > target + band:
        state.intent = Intent.DECREASE
        goal = -comfort
    else:
        if state.intent is not Intent.SETTLE:
            state.settle_anchor_deg = 0.0 if isinstance(mode, Twa) else current_angle_deg
        state.intent = Intent.SETTLE
        goal = state.settle_anchor_deg
    return step_toward(current_angle_deg, goal + state.noise(), model.max_wrist_rate * dt)


def max_force_policy(model: ParticipantModel, mode: ControlMode, t: float) -> float:
    """Squeeze-as-hard-as-possible trajectory: ramp to the comfort limit and
    hold it there."""
    if t < 0.0:
        raise InvalidInputError(f"t {t!r} must be >= 0")
    return min(model.max_wrist_rate * t, comfort_extension(model, mode))
