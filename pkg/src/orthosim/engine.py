"""Shared per-tick composition of controller and plant, plus hold tracking."""

from __future__ import annotations

from dataclasses import dataclass

from .control import ControllerState, controller_step
from .kinematics import WristSample
from .plant import PlantParams, PlantState, plant_step


def advance_tick(
    ctrl: ControllerState, wrist_angle_deg: float, t: float, params: PlantParams, dt: float
) -> tuple[ControllerState, PlantState]:
    """Advance controller then plant by one tick at the given wrist angle."""
    wrist = WristSample(timestamp=t, angle_deg=wrist_angle_deg)
    ctrl = controller_step(ctrl, wrist, dt)
    return ctrl, plant_step(ctrl.motor, wrist, params)


@dataclass
class HoldTracker:
    """Tracks the contiguous in-band window of a force-matching trial.

    A trial succeeds when the measured force stays within ``band`` of
    ``target`` for ``hold`` contiguous seconds. ``entry_t`` is the time the
    qualifying window was entered, which is what the trial reports as its
    modulation time (the fixed hold length is excluded).
    """

    target: float
    band: float
    hold: float
    tick: float
    in_band_ticks: int = 0
    entry_t: float | None = None
    succeeded: bool = False

    @property
    def hold_ticks(self) -> int:
        return round(self.hold / self.tick)

    @property
    def hold_progress(self) -> float:
        """Seconds of hold accumulated so far, capped at the required hold."""
        return min(self.in_band_ticks * self.tick, self.hold)

    def update(self, measured_force: float, t: float) -> bool:
        """Feed one tick; returns the in-band flag for that tick."""
        in_band = abs(measured_force - self.target) <= self.band
        if self.succeeded:
            return in_band
        if in_band:
            if self.in_band_ticks == 0:
                self.entry_t = t
            self.in_band_ticks += 1
            if self.in_band_ticks >= self.hold_ticks:
                self.succeeded = True
        else:
            self.in_band_ticks = 0
            self.entry_t = None
        return in_band
