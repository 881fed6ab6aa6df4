"""Session configuration: a single JSON file describing one simulation setup.

Loading fills defaults, rejects unknown keys, and validates every invariant
the runtime modules enforce, so a config that loads cleanly cannot fail
mid-trial on bad parameters. Plant constants come either from explicit
values or from the two calibration anchor points (the default).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .control import Bwa, ControlMode, MODE_NAMES, Passive, Pwa, RegionThresholds, Twa
from .errors import ConfigError, InvalidInputError
from .participant import ParticipantModel
from .plant import (
    DEFAULT_TENODESIS_ONSET_DEG,
    DEFAULT_TENODESIS_SATURATION_DEG,
    CalibrationAnchors,
    ContactModel,
    InstrumentedObject,
    PlantParams,
    TenodesisCurve,
    TransmissionParams,
    calibrate_plant,
    default_plant,
)
from .trials import (
    DEFAULT_BAND_N,
    DEFAULT_GRT_SLOT_S,
    DEFAULT_GRT_WINDOW_S,
    DEFAULT_HOLD_S,
    DEFAULT_OBJECTS,
    DEFAULT_TIMEOUT_S,
    FunctionalObject,
    Harness,
)


@dataclass(frozen=True, slots=True)
class TrialSettings:
    band: float = DEFAULT_BAND_N
    hold: float = DEFAULT_HOLD_S
    timeout: float = DEFAULT_TIMEOUT_S
    max_force_trials: int = 3
    modulation_repeats: int = 3
    grt_slot: float = DEFAULT_GRT_SLOT_S
    grt_window: float = DEFAULT_GRT_WINDOW_S

    def __post_init__(self) -> None:
        if self.band <= 0.0:
            raise InvalidInputError(f"band {self.band!r} must be > 0")
        if self.hold <= 0.0 or self.timeout <= self.hold:
            raise InvalidInputError(
                f"need 0 < hold < timeout, got ({self.hold!r}, {self.timeout!r})"
            )
        if self.max_force_trials < 1 or self.modulation_repeats < 1:
            raise InvalidInputError("trial counts must be >= 1")
        if self.grt_slot <= 0.0 or self.grt_window < self.grt_slot:
            raise InvalidInputError(
                f"need 0 < grt_slot <= grt_window, got "
                f"({self.grt_slot!r}, {self.grt_window!r})"
            )


@dataclass(frozen=True, slots=True)
class SessionConfig:
    """Validated session parameters with all defaults resolved."""

    tick_rate: float = 100.0
    mode: str = "twa"
    thresholds: RegionThresholds = RegionThresholds()
    motor_speed: float = 0.25
    motor_upper_limit: float = 1.0
    pwa_map: Pwa = Pwa()
    plant: PlantParams = field(default_factory=default_plant)
    anchors: CalibrationAnchors | None = CalibrationAnchors()
    participant: ParticipantModel = ParticipantModel()
    trial: TrialSettings = TrialSettings()
    objects: tuple[FunctionalObject, ...] = DEFAULT_OBJECTS
    out_dir: str = "sessions"

    def __post_init__(self) -> None:
        if self.tick_rate <= 0.0:
            raise InvalidInputError(f"tick_rate {self.tick_rate!r} must be > 0")
        if self.mode not in MODE_NAMES:
            raise InvalidInputError(
                f"mode {self.mode!r} not one of {sorted(MODE_NAMES)}"
            )

    def harness(self) -> Harness:
        return Harness(
            plant=self.plant,
            thresholds=self.thresholds,
            motor_speed=self.motor_speed,
            motor_upper_limit=self.motor_upper_limit,
            tick_rate=self.tick_rate,
        )

    def control_mode(self, name: str | None = None) -> ControlMode:
        name = (name or self.mode).lower()
        if name == "pwa":
            return self.pwa_map
        if name == "twa":
            return Twa()
        if name == "bwa":
            return Bwa()
        if name == "passive":
            return Passive()
        raise ConfigError(f"mode {name!r} not one of {sorted(MODE_NAMES)}")


class _Section:
    """One level of the config tree; tracks consumed keys so leftovers can be
    reported as unknown."""

    def __init__(self, data: Mapping[str, Any], path: str) -> None:
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path or 'config'}: expected an object")
        self._data = dict(data)
        self._path = path

    def _name(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def take(self, key: str, default: Any) -> Any:
        return self._data.pop(key, default)

    def take_number(self, key: str, default: float | None) -> float | None:
        value = self._data.pop(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self._name(key)}: expected a number, got {value!r}")
        return float(value)

    def take_int(self, key: str, default: int) -> int:
        value = self._data.pop(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self._name(key)}: expected an integer, got {value!r}")
        return value

    def take_str(self, key: str, default: str) -> str:
        value = self._data.pop(key, default)
        if not isinstance(value, str):
            raise ConfigError(f"{self._name(key)}: expected a string, got {value!r}")
        return value

    def section(self, key: str) -> "_Section":
        return _Section(self._data.pop(key, {}), self._name(key))

    def finish(self) -> None:
        if self._data:
            key = sorted(self._data)[0]
            raise ConfigError(f"unknown config key {self._name(key)!r}")


def _build(raw: Mapping[str, Any]) -> SessionConfig:
    root = _Section(raw, "")
    tick_rate = root.take_number("tick_rate", 100.0)
    mode = root.take_str("mode", "twa").lower()
    out_dir = root.take_str("out_dir", "sessions")

    thr = root.section("thresholds")
    thresholds = RegionThresholds(
        open_deg=thr.take_number("open_deg", -15.0),
        close_deg=thr.take_number("close_deg", 15.0),
    )
    thr.finish()

    motor = root.section("motor")
    motor_speed = motor.take_number("speed", 0.25)
    motor_upper_limit = motor.take_number("upper_limit", 1.0)
    motor.finish()

    pwa = root.section("pwa_map")
    pwa_map = Pwa(
        map_min_deg=pwa.take_number("min_deg", 0.0),
        map_max_deg=pwa.take_number("max_deg", 40.0),
    )
    pwa.finish()

    plant_sec = root.section("plant")
    transmission = TransmissionParams(
        slack=plant_sec.take_number("slack", 0.1),
        flexion_gain=plant_sec.take_number("flexion_gain", 100.0),
    )
    instrument = InstrumentedObject(
        series_stiffness=plant_sec.take_number("series_stiffness", 2.0),
        sensor_resolution=plant_sec.take_number("sensor_resolution", 0.28),
        max_range=plant_sec.take_number("max_range", 50.0),
    )
    contact_excursion = plant_sec.take_number("contact_excursion", 0.2)
    onset = plant_sec.take_number(
        "tenodesis_onset_deg", DEFAULT_TENODESIS_ONSET_DEG
    )
    saturation = plant_sec.take_number(
        "tenodesis_saturation_deg", DEFAULT_TENODESIS_SATURATION_DEG
    )
    explicit_max = plant_sec.take_number("tenodesis_max_force", None)
    explicit_stiffness = plant_sec.take_number("device_stiffness", None)

    anchors_sec = plant_sec.section("anchors")
    anchors = CalibrationAnchors(
        no_device_force=anchors_sec.take_number("no_device_force", 10.5),
        no_device_angle_deg=anchors_sec.take_number("no_device_angle_deg", 40.0),
        with_device_force=anchors_sec.take_number("with_device_force", 15.3),
        with_device_angle_deg=anchors_sec.take_number("with_device_angle_deg", 25.0),
    )
    anchors_sec.finish()
    plant_sec.finish()

    if (explicit_max is None) != (explicit_stiffness is None):
        raise ConfigError(
            "plant.tenodesis_max_force and plant.device_stiffness must be "
            "given together (or both omitted to calibrate from anchors)"
        )
    if explicit_max is not None and explicit_stiffness is not None:
        plant = PlantParams(
            transmission=transmission,
            contact=ContactModel(
                contact_excursion=contact_excursion,
                device_stiffness=explicit_stiffness,
            ),
            tenodesis=TenodesisCurve(
                onset_deg=onset, saturation_deg=saturation, max_force=explicit_max
            ),
            instrument=instrument,
        )
        resolved_anchors = None
    else:
        plant = calibrate_plant(
            anchors,
            transmission=transmission,
            tenodesis=TenodesisCurve(onset_deg=onset, saturation_deg=saturation),
            instrument=instrument,
            contact_excursion=contact_excursion,
            motor_upper_limit=motor_upper_limit,
        )
        resolved_anchors = anchors

    part = root.section("participant")
    participant = ParticipantModel(
        reaction_delay=part.take_number("reaction_delay", 0.12),
        max_wrist_rate=part.take_number("max_wrist_rate", 30.0),
        angle_noise_sigma=part.take_number("angle_noise_sigma", 0.5),
        comfort_max_extension=part.take_number("comfort_max_extension", None),
        rng_seed=part.take_int("rng_seed", 1234),
    )
    part.finish()

    trial_sec = root.section("trial")
    trial = TrialSettings(
        band=trial_sec.take_number("band", DEFAULT_BAND_N),
        hold=trial_sec.take_number("hold", DEFAULT_HOLD_S),
        timeout=trial_sec.take_number("timeout", DEFAULT_TIMEOUT_S),
        max_force_trials=trial_sec.take_int("max_force_trials", 3),
        modulation_repeats=trial_sec.take_int("modulation_repeats", 3),
        grt_slot=trial_sec.take_number("grt_slot", DEFAULT_GRT_SLOT_S),
        grt_window=trial_sec.take_number("grt_window", DEFAULT_GRT_WINDOW_S),
    )
    trial_sec.finish()

    raw_objects = root.take("objects", None)
    if raw_objects is None:
        objects = DEFAULT_OBJECTS
    else:
        if not isinstance(raw_objects, list) or not raw_objects:
            raise ConfigError("objects: expected a non-empty array")
        built = []
        for i, entry in enumerate(raw_objects):
            obj_sec = _Section(entry, f"objects[{i}]")
            built.append(
                FunctionalObject(
                    name=obj_sec.take_str("name", f"object_{i}"),
                    required_force=obj_sec.take_number("required_force", 1.0),
                    required_aperture=obj_sec.take_number("required_aperture", 0.0),
                    weight_g=obj_sec.take_number("weight_g", 0.0),
                )
            )
            obj_sec.finish()
        objects = tuple(built)

    root.finish()
    return SessionConfig(
        tick_rate=tick_rate,
        mode=mode,
        thresholds=thresholds,
        motor_speed=motor_speed,
        motor_upper_limit=motor_upper_limit,
        pwa_map=pwa_map,
        plant=plant,
        anchors=resolved_anchors,
        participant=participant,
        trial=trial,
        objects=objects,
        out_dir=out_dir,
    )


def config_from_dict(raw: Mapping[str, Any]) -> SessionConfig:
    """Build and validate a config from an already-parsed mapping."""
    try:
        return _build(raw)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> SessionConfig:
    """Load, parse and validate a session config file.

    Raises ConfigError with line/column on parse errors and with the
    offending field name on validation errors.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(raw)
