"""Experiment harnesses: max-force, force-modulation and functional batteries.

Runs (controller mode x virtual participant x plant) at a fixed tick rate and
computes the study metrics: per-trial peak forces and their aggregates, the
20/50/80 % force targets, modulation success and modulation time, grasp-and-
release scores, and wrist-effort statistics. Everything is deterministic
given the configured seeds; trials are independent and merged by trial id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .control import (
    Bwa,
    ControllerState,
    ControlMode,
    MotorState,
    RegionThresholds,
    Twa,
    mode_name,
)
from .engine import HoldTracker, advance_tick
from .errors import InvalidInputError
from .logio import TickLogRow
from .participant import (
    ParticipantModel,
    PolicyState,
    ScriptedTrajectory,
    comfort_extension,
    max_force_policy,
    modulation_policy,
    scripted_angle,
    step_toward,
)
from .plant import PlantParams

TARGET_PERCENTS = (20, 50, 80)
DEFAULT_BAND_N = 1.0
DEFAULT_HOLD_S = 3.0
DEFAULT_TIMEOUT_S = 30.0
#: Max-force trials end once the measured force changes by less than this
#: rate over the plateau window (or at the 30 s cap).
PLATEAU_RATE_N_PER_S = 0.05
PLATEAU_WINDOW_S = 2.0
#: One grasp-lift-release attempt slot in the functional battery; covers the
#: reach/transport time the desk-scale plant does not model.
DEFAULT_GRT_SLOT_S = 9.0
DEFAULT_GRT_WINDOW_S = 30.0


@dataclass(frozen=True, slots=True)
class Harness:
    """Everything fixed for a batch of trials: plant, thresholds, motor and
    the tick rate."""

    plant: PlantParams
    thresholds: RegionThresholds = RegionThresholds()
    motor_speed: float = 0.25
    motor_upper_limit: float = 1.0
    tick_rate: float = 100.0

    def __post_init__(self) -> None:
        if self.tick_rate <= 0.0:
            raise InvalidInputError(f"tick_rate {self.tick_rate!r} must be > 0")

    @property
    def tick(self) -> float:
        return 1.0 / self.tick_rate

    def initial_controller(self, mode: ControlMode) -> ControllerState:
        return ControllerState(
            mode=mode,
            thresholds=self.thresholds,
            motor=MotorState(
                position=0.0, speed=self.motor_speed, upper_limit=self.motor_upper_limit
            ),
        )


@dataclass(frozen=True, slots=True)
class MaxForceResult:
    """Per-trial peak measured forces and their aggregates."""

    peaks: tuple[float, ...]
    traces: tuple[tuple[TickLogRow, ...], ...]

    @property
    def average_max(self) -> float:
        return sum(self.peaks) / len(self.peaks)

    @property
    def highest_max(self) -> float:
        return max(self.peaks)


@dataclass(frozen=True, slots=True)
class TargetSpec:
    """One force target: the full-precision control target plus the rounded
    value shown to the participant. The in-band check always uses the
    full-precision value."""

    percent: int
    absolute: float
    display: float
    band: float = DEFAULT_BAND_N
    hold: float = DEFAULT_HOLD_S
    timeout: float = DEFAULT_TIMEOUT_S


@dataclass(frozen=True, slots=True)
class ModulationOutcome:
    """Result of one force-modulation trial.

    modulation_time is the time the successful hold window was entered (the
    fixed 3 s hold itself is excluded) and is present only on success.
    """

    target: TargetSpec
    success: bool
    modulation_time: float | None
    trace: tuple[TickLogRow, ...]


@dataclass(frozen=True, slots=True)
class ModulationBattery:
    """All modulation trials for one mode, keyed by target percent."""

    mode: str
    max_force: MaxForceResult
    targets: tuple[TargetSpec, ...]
    outcomes: dict[int, tuple[ModulationOutcome, ...]]

    def successes(self, percent: int) -> int:
        return sum(1 for o in self.outcomes[percent] if o.success)

    def average_modulation_time(self, percent: int) -> float | None:
        """Mean modulation time over successful trials only; None if all
        trials at this target failed."""
        times = [o.modulation_time for o in self.outcomes[percent] if o.success]
        if not times:
            return None
        return sum(times) / len(times)


@dataclass(frozen=True, slots=True)
class FunctionalObject:
    """Abstract grasp-and-release test object."""

    name: str
    required_force: float
    required_aperture: float = 0.0  # excursion units the motor must reach
    weight_g: float = 0.0

    def __post_init__(self) -> None:
        if self.required_force <= 0.0:
            raise InvalidInputError(
                f"object {self.name!r} required_force must be > 0"
            )


#: Default battery: four objects within unassisted reach, two beyond it but
#: within assisted reach. Config data; swap in any battery via the config.
DEFAULT_OBJECTS = (
    FunctionalObject("foam_block", required_force=1.5, weight_g=10.0),
    FunctionalObject("wood_block", required_force=3.0, weight_g=120.0),
    FunctionalObject("fork", required_force=5.0, weight_g=40.0),
    FunctionalObject("full_cup", required_force=8.0, weight_g=250.0),
    FunctionalObject("vhs_tape", required_force=12.0, required_aperture=0.5, weight_g=400.0),
    FunctionalObject("filled_jar", required_force=13.0, required_aperture=0.5, weight_g=600.0),
)


@dataclass(frozen=True, slots=True)
class GrtScore:
    """Successful grasp-release cycles per object within the timed window."""

    per_object: tuple[tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.per_object)


@dataclass(frozen=True, slots=True)
class WristEffort:
    """Wrist usage over a hold phase: mean |angle| and the fraction of time
    spent extended beyond the close threshold."""

    mean_abs_angle_deg: float
    extension_fraction: float


def _display_round(value: float) -> float:
    """Round half up to 0.1 N, the precision shown on the target display."""
    return math.floor(value * 10.0 + 0.5) / 10.0


def compute_targets(
    highest_max: float,
    *,
    band: float = DEFAULT_BAND_N,
    hold: float = DEFAULT_HOLD_S,
    timeout: float = DEFAULT_TIMEOUT_S,
) -> tuple[TargetSpec, ...]:
    """Derive the 20/50/80 % targets from a recorded highest max force."""
    if highest_max <= 0.0:
        raise InvalidInputError(f"highest_max {highest_max!r} must be > 0")
    return tuple(
        TargetSpec(
            percent=pct,
            absolute=pct / 100.0 * highest_max,
            display=_display_round(pct / 100.0 * highest_max),
            band=band,
            hold=hold,
            timeout=timeout,
        )
        for pct in TARGET_PERCENTS
    )


def run_max_force(
    harness: Harness,
    mode: ControlMode,
    model: ParticipantModel,
    trials: int = 3,
    *,
    max_duration: float = DEFAULT_TIMEOUT_S,
    plateau_rate: float = PLATEAU_RATE_N_PER_S,
    plateau_window: float = PLATEAU_WINDOW_S,
) -> MaxForceResult:
    """Run repeated squeeze-as-hard-as-possible trials and record the peaks.

    Each trial drives the wrist along the max-force ramp until the measured
    force plateaus (change rate below ``plateau_rate`` across the trailing
    ``plateau_window``, evaluated once a grasp has registered) or the 30 s
    cap elapses. Peaks are of the quantized (measured) force.
    """
    if trials < 1:
        raise InvalidInputError(f"trials {trials!r} must be >= 1")
    dt = harness.tick
    window_ticks = round(plateau_window / dt)
    peaks: list[float] = []
    traces: list[tuple[TickLogRow, ...]] = []
    for _ in range(trials):
        ctrl = harness.initial_controller(mode)
        rows: list[TickLogRow] = []
        measured_history: list[float] = []
        peak = 0.0
        for k in range(round(max_duration / dt)):
            t = k * dt
            angle = max_force_policy(model, mode, t)
            ctrl, ps = advance_tick(ctrl, angle, t, harness.plant, dt)
            measured_history.append(ps.measured_force)
            peak = max(peak, ps.measured_force)
            rows.append(
                TickLogRow(
                    t=t,
                    wrist_angle=angle,
                    region=ctrl.region.value,
                    motor_position=ctrl.motor.position,
                    true_force=ps.true_force,
                    measured_force=ps.measured_force,
                    in_band=False,
                    intent="maxforce",
                )
            )
            if peak > 0.0 and len(measured_history) > window_ticks:
                window = measured_history[-(window_ticks + 1) :]
                if (max(window) - min(window)) / plateau_window < plateau_rate:
                    break
        peaks.append(peak)
        traces.append(tuple(rows))
    return MaxForceResult(peaks=tuple(peaks), traces=tuple(traces))


def run_modulation_trial(
    harness: Harness,
    mode: ControlMode,
    model: ParticipantModel,
    target: TargetSpec,
) -> ModulationOutcome:
    """Run one closed-loop force-matching trial.

    The participant policy sees the measured force delayed by its reaction
    time and steers the wrist; the trial ends at the first completed hold
    (success) or at the timeout (unsuccessful).
    """
    dt = harness.tick
    ctrl = harness.initial_controller(mode)
    policy = PolicyState(model, dt)
    tracker = HoldTracker(target=target.absolute, band=target.band, hold=target.hold, tick=dt)
    rows: list[TickLogRow] = []
    angle = 0.0
    measured = 0.0
    for k in range(round(target.timeout / dt)):
        t = k * dt
        delayed = policy.observe(measured)
        angle = modulation_policy(
            model, policy, delayed, target.absolute, target.band, mode, angle, dt
        )
        ctrl, ps = advance_tick(ctrl, angle, t, harness.plant, dt)
        measured = ps.measured_force
        in_band = tracker.update(measured, t)
        rows.append(
            TickLogRow(
                t=t,
                wrist_angle=angle,
                region=ctrl.region.value,
                motor_position=ctrl.motor.position,
                true_force=ps.true_force,
                measured_force=measured,
                in_band=in_band,
                intent=policy.intent.value,
            )
        )
        if tracker.succeeded:
            break
    return ModulationOutcome(
        target=target,
        success=tracker.succeeded,
        modulation_time=tracker.entry_t if tracker.succeeded else None,
        trace=tuple(rows),
    )


def run_modulation_battery(
    harness: Harness,
    mode: ControlMode,
    model: ParticipantModel,
    repeats: int = 3,
    *,
    max_force_trials: int = 3,
    band: float = DEFAULT_BAND_N,
    hold: float = DEFAULT_HOLD_S,
    timeout: float = DEFAULT_TIMEOUT_S,
) -> ModulationBattery:
    """Max-force trials, target derivation, then repeats per target.

    Each repeat gets its own derived noise seed so repeats differ while the
    battery stays reproducible for a given base seed.
    """
    max_force = run_max_force(harness, mode, model, trials=max_force_trials)
    targets = compute_targets(max_force.highest_max, band=band, hold=hold, timeout=timeout)
    outcomes: dict[int, tuple[ModulationOutcome, ...]] = {}
    for t_index, target in enumerate(targets):
        per_target = []
        for repeat in range(repeats):
            trial_model = replace(
                model, rng_seed=model.rng_seed + 1009 * t_index + repeat
            )
            per_target.append(run_modulation_trial(harness, mode, trial_model, target))
        outcomes[target.percent] = tuple(per_target)
    return ModulationBattery(
        mode=mode_name(mode), max_force=max_force, targets=targets, outcomes=outcomes
    )


class _GrtPhase(Enum):
    GRASP = "grasp"
    RELEASE = "release"
    IDLE = "idle"


def run_functional_battery(
    harness: Harness,
    mode: ControlMode,
    model: ParticipantModel,
    objects: tuple[FunctionalObject, ...] = DEFAULT_OBJECTS,
    *,
    slot: float = DEFAULT_GRT_SLOT_S,
    window: float = DEFAULT_GRT_WINDOW_S,
) -> GrtScore:
    """Score grasp-and-release cycles per object over a 30 s window.

    Attempts run on a fixed cadence of one per ``slot`` seconds (standing in
    for reach and transport time). Within a slot the participant closes on
    the object until the grasp registers - measured force at or above the
    object's requirement while the motor excursion covers its aperture - then
    releases until the load cell reads below one quantum. Only a completed
    grasp-then-release counts.
    """
    dt = harness.tick
    resolution = harness.plant.instrument.sensor_resolution
    comfort = comfort_extension(model, mode)
    release_goal = -comfort if isinstance(mode, (Twa, Bwa)) else 0.0
    slots = int(window / slot)
    scores: list[tuple[str, int]] = []
    for obj in objects:
        ctrl = harness.initial_controller(mode)
        angle = 0.0
        count = 0
        for _ in range(slots):
            phase = _GrtPhase.GRASP
            for k in range(round(slot / dt)):
                t = k * dt
                if phase is _GrtPhase.GRASP:
                    goal = comfort
                elif phase is _GrtPhase.RELEASE:
                    goal = release_goal
                else:
                    goal = 0.0
                angle = step_toward(angle, goal, model.max_wrist_rate * dt)
                ctrl, ps = advance_tick(ctrl, angle, t, harness.plant, dt)
                if (
                    phase is _GrtPhase.GRASP
                    and ps.measured_force >= obj.required_force
                    and ctrl.motor.position >= obj.required_aperture
                ):
                    phase = _GrtPhase.RELEASE
                elif phase is _GrtPhase.RELEASE and ps.measured_force < resolution:
                    phase = _GrtPhase.IDLE
                    count += 1
            # Unfinished attempts roll their controller state into the next
            # slot; only completed grasp+release pairs are counted.
        scores.append((obj.name, count))
    return GrtScore(per_object=tuple(scores))


def run_scripted(
    harness: Harness,
    mode: ControlMode,
    traj: ScriptedTrajectory,
    duration: float,
    target: TargetSpec | None = None,
) -> tuple[TickLogRow, ...]:
    """Drive the wrist along a scripted trajectory; log every tick.

    When a target is given the in_band column reflects it, which marks hold
    phases for wrist-effort analysis.
    """
    dt = harness.tick
    ctrl = harness.initial_controller(mode)
    rows: list[TickLogRow] = []
    for k in range(round(duration / dt)):
        t = k * dt
        angle = scripted_angle(traj, t)
        ctrl, ps = advance_tick(ctrl, angle, t, harness.plant, dt)
        in_band = (
            abs(ps.measured_force - target.absolute) <= target.band
            if target is not None
            else False
        )
        rows.append(
            TickLogRow(
                t=t,
                wrist_angle=angle,
                region=ctrl.region.value,
                motor_position=ctrl.motor.position,
                true_force=ps.true_force,
                measured_force=ps.measured_force,
                in_band=in_band,
                intent="script",
            )
        )
    return tuple(rows)


def replay_wrist(
    harness: Harness, mode: ControlMode, angles: tuple[float, ...]
) -> tuple[TickLogRow, ...]:
    """Re-run the physics for a recorded wrist-angle stream.

    Reproduces region, motor position and forces tick for tick; the
    participant-layer columns are not meaningful on replay.
    """
    dt = harness.tick
    ctrl = harness.initial_controller(mode)
    rows: list[TickLogRow] = []
    for k, angle in enumerate(angles):
        t = k * dt
        ctrl, ps = advance_tick(ctrl, angle, t, harness.plant, dt)
        rows.append(
            TickLogRow(
                t=t,
                wrist_angle=angle,
                region=ctrl.region.value,
                motor_position=ctrl.motor.position,
                true_force=ps.true_force,
                measured_force=ps.measured_force,
                in_band=False,
                intent="replay",
            )
        )
    return tuple(rows)


def wrist_effort_metrics(
    trace: tuple[TickLogRow, ...],
    close_threshold_deg: float,
    span: tuple[float, float] | None = None,
) -> WristEffort | None:
    """Wrist usage over the hold phase of a trace.

    The hold phase is either the given (start, end) time span or, by
    default, the last maximal contiguous run of in-band ticks. Returns None
    when the trace contains no hold phase.
    """
    if span is not None:
        hold_rows = [r for r in trace if span[0] <= r.t <= span[1]]
    else:
        hold_rows = []
        current: list[TickLogRow] = []
        for row in trace:
            if row.in_band:
                current.append(row)
            elif current:
                hold_rows, current = current, []
        if current:
            hold_rows = current
    if not hold_rows:
        return None
    mean_abs = sum(abs(r.wrist_angle) for r in hold_rows) / len(hold_rows)
    beyond = sum(1 for r in hold_rows if r.wrist_angle > close_threshold_deg)
    return WristEffort(
        mean_abs_angle_deg=mean_abs, extension_fraction=beyond / len(hold_rows)
    )


def summary_rows(battery: ModulationBattery, seed: int) -> list[dict[str, object]]:
    """Flatten a battery into summary-file rows, one per target."""
    rows: list[dict[str, object]] = []
    for target in battery.targets:
        outcomes = battery.outcomes[target.percent]
        rows.append(
            {
                "mode": battery.mode,
                "seed": seed,
                "average_max_force": battery.max_force.average_max,
                "highest_max_force": battery.max_force.highest_max,
                "target_percent": target.percent,
                "target_force": target.display,
                "average_modulation_time": battery.average_modulation_time(target.percent),
                "successes": battery.successes(target.percent),
                "trials": len(outcomes),
            }
        )
    return rows
