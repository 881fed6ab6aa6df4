"""Real-time gateway: wall-clock simulation loop streamed over WebSocket.

One owner task advances the simulation on a monotonic timer; client
connections feed validated commands into an ordered queue that is drained
once per tick, and state frames fan out through per-client queues that drop
frames for slow consumers rather than stall the loop. A client that sends
nothing keeps its last commanded wrist angle indefinitely.

Wire format: one JSON object per message, newline-free, with mandatory
``type`` and ``v`` (schema version) fields. Unknown fields are ignored on
decode for forward compatibility.
"""

from __future__ import annotations

import asyncio
import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from websockets.asyncio.server import ServerConnection, serve
from websockets.exceptions import ConnectionClosed

from .config import SessionConfig
from .control import MODE_NAMES, RegionThresholds
from .engine import HoldTracker, advance_tick
from .errors import InvalidInputError
from .kinematics import DEFAULT_ANGLE_GUARD_DEG
from .logio import TickLogRow, write_log
from .participant import ScriptedTrajectory, scripted_angle
from .trials import PLATEAU_RATE_N_PER_S, PLATEAU_WINDOW_S, TargetSpec, compute_targets

SCHEMA_VERSION = 1
DEFAULT_PORT = 7420


class CodecError(ValueError):
    """A frame or command failed to decode or validate."""


@dataclass(frozen=True, slots=True)
class SetWristAngle:
    angle_deg: float


@dataclass(frozen=True, slots=True)
class SetMode:
    mode: str


@dataclass(frozen=True, slots=True)
class SetThresholds:
    open_deg: float
    close_deg: float


@dataclass(frozen=True, slots=True)
class StartTrial:
    kind: str  # "modulate" | "maxforce"
    percent: int | None = None
    target_n: float | None = None


@dataclass(frozen=True, slots=True)
class AbortTrial:
    pass


Command = SetWristAngle | SetMode | SetThresholds | StartTrial | AbortTrial

_COMMAND_TYPES = {
    "set_wrist_angle",
    "set_mode",
    "set_thresholds",
    "start_trial",
    "abort_trial",
}


def _require(payload: dict[str, Any], field: str) -> Any:
    if field not in payload:
        raise CodecError(f"missing required field {field!r}")
    return payload[field]


def _require_number(payload: dict[str, Any], field: str) -> float:
    value = _require(payload, field)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CodecError(f"field {field!r} must be a number, got {value!r}")
    return float(value)


def decode_command(text: str | bytes) -> Command:
    """Parse and validate one client command message.

    Commands are validated against the same rules as config values; unknown
    fields are ignored.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodecError(f"bad JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise CodecError("command must be a JSON object")
    kind = _require(payload, "type")
    _require(payload, "v")
    if kind == "set_wrist_angle":
        angle = _require_number(payload, "angle")
        if abs(angle) > DEFAULT_ANGLE_GUARD_DEG:
            raise CodecError(
                f"angle {angle!r} exceeds the +/-{DEFAULT_ANGLE_GUARD_DEG} deg guard"
            )
        return SetWristAngle(angle_deg=angle)
    if kind == "set_mode":
        mode = _require(payload, "mode")
        if mode not in MODE_NAMES:
            raise CodecError(f"mode {mode!r} not one of {sorted(MODE_NAMES)}")
        return SetMode(mode=mode)
    if kind == "set_thresholds":
        open_deg = _require_number(payload, "open")
        close_deg = _require_number(payload, "close")
        try:
            RegionThresholds(open_deg=open_deg, close_deg=close_deg)
        except InvalidInputError as exc:
            raise CodecError(str(exc)) from exc
        return SetThresholds(open_deg=open_deg, close_deg=close_deg)
    if kind == "start_trial":
        trial_kind = _require(payload, "kind")
        if trial_kind not in ("modulate", "maxforce"):
            raise CodecError(f"trial kind {trial_kind!r} unknown")
        percent = payload.get("percent")
        target_n = payload.get("target_n")
        if trial_kind == "modulate" and percent is None and target_n is None:
            raise CodecError("start_trial(modulate) needs percent or target_n")
        if percent is not None and percent not in (20, 50, 80):
            raise CodecError(f"percent {percent!r} must be 20, 50 or 80")
        return StartTrial(kind=trial_kind, percent=percent, target_n=target_n)
    if kind == "abort_trial":
        return AbortTrial()
    raise CodecError(f"unknown command type {kind!r}")


def encode_frame(frame: dict[str, Any]) -> str:
    return json.dumps(frame, sort_keys=True, separators=(",", ":"))


def decode_frame(text: str | bytes) -> dict[str, Any]:
    """Parse one state/error frame; checks schema fields, keeps extras."""
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise CodecError("frame must be a JSON object")
    _require(payload, "type")
    _require(payload, "v")
    return payload


class _LiveTrial:
    """State for one interactive trial run inside the bridge loop."""

    def __init__(self, kind: str, target: TargetSpec | None, start_tick: int, tick: float):
        self.kind = kind
        self.target = target
        self.start_tick = start_tick
        self.tick = tick
        self.rows: list[TickLogRow] = []
        self.phase = "running"
        self.peak = 0.0
        self.measured_history: list[float] = []
        self.tracker = (
            HoldTracker(target=target.absolute, band=target.band, hold=target.hold, tick=tick)
            if target is not None
            else None
        )
        self.modulation_time: float | None = None

    @property
    def elapsed(self) -> float:
        return len(self.rows) * self.tick


class BridgeServer:
    """Wall-clock simulation loop plus WebSocket fan-out.

    ``input_source`` is "client" for live wrist commands or "script" to lock
    the wrist to a trajectory (clients then observe only; SetWristAngle is
    rejected, which keeps scripted sessions deterministic under any client
    behavior).
    """

    def __init__(
        self,
        config: SessionConfig,
        port: int = DEFAULT_PORT,
        frame_divisor: int = 3,
        out_dir: str | Path | None = None,
        input_source: str = "client",
        script: ScriptedTrajectory | None = None,
        max_ticks: int | None = None,
        realtime: bool = True,
        initial_commands: tuple[Command, ...] = (),
    ) -> None:
        if frame_divisor < 1:
            raise InvalidInputError(f"frame_divisor {frame_divisor!r} must be >= 1")
        if input_source not in ("client", "script"):
            raise InvalidInputError(f"input_source {input_source!r} unknown")
        if input_source == "script" and script is None:
            raise InvalidInputError("script input source needs a trajectory")
        self.config = config
        self.port = port
        self.frame_divisor = frame_divisor
        self.out_dir = Path(out_dir) if out_dir is not None else Path(config.out_dir)
        self.input_source = input_source
        self.script = script
        self.max_ticks = max_ticks
        self.realtime = realtime
        self.initial_commands = initial_commands

        self.harness = config.harness()
        self.ctrl = self.harness.initial_controller(config.control_mode())
        self.mode_label = config.mode
        self.wrist_angle = 0.0
        self.tick_idx = 0
        self.trial: _LiveTrial | None = None
        self.last_plant = None

        self._commands: asyncio.Queue[Command] = asyncio.Queue()
        self._clients: dict[ServerConnection, asyncio.Queue[str]] = {}
        self._stop = asyncio.Event()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._started = threading.Event()

    # -- command handling ---------------------------------------------------

    def _apply_command(self, cmd: Command) -> None:
        harness = self.harness
        if isinstance(cmd, SetWristAngle):
            self.wrist_angle = cmd.angle_deg
        elif isinstance(cmd, SetMode):
            self.mode_label = cmd.mode
            self.ctrl = replace(
                self.harness.initial_controller(self.config.control_mode(cmd.mode)),
                thresholds=self.ctrl.thresholds,
            )
        elif isinstance(cmd, SetThresholds):
            self.ctrl = replace(
                self.ctrl,
                thresholds=RegionThresholds(open_deg=cmd.open_deg, close_deg=cmd.close_deg),
            )
        elif isinstance(cmd, StartTrial):
            target = None
            if cmd.kind == "modulate":
                if cmd.target_n is not None:
                    target = TargetSpec(
                        percent=cmd.percent or 0,
                        absolute=cmd.target_n,
                        display=round(cmd.target_n, 1),
                        band=self.config.trial.band,
                        hold=self.config.trial.hold,
                        timeout=self.config.trial.timeout,
                    )
                else:
                    anchors = self.config.anchors
                    highest = (
                        anchors.no_device_force
                        if self.mode_label == "passive"
                        else anchors.with_device_force
                    ) if anchors is not None else 15.3
                    targets = {
                        t.percent: t
                        for t in compute_targets(
                            highest,
                            band=self.config.trial.band,
                            hold=self.config.trial.hold,
                            timeout=self.config.trial.timeout,
                        )
                    }
                    target = targets[cmd.percent]
            self.trial = _LiveTrial(cmd.kind, target, self.tick_idx, harness.tick)
        elif isinstance(cmd, AbortTrial):
            if self.trial is not None:
                self.trial.phase = "aborted"
                self._finish_trial()

    def _finish_trial(self) -> None:
        trial = self.trial
        if trial is None:
            return
        if trial.rows:
            name = f"live_{trial.kind}"
            if trial.target is not None and trial.target.percent:
                name += f"_p{trial.target.percent}"
            write_log(self.out_dir / f"{name}.csv", trial.rows)
        self.trial = None

    # -- simulation ---------------------------------------------------------

    def _advance_one_tick(self) -> dict[str, Any] | None:
        dt = self.harness.tick
        t = self.tick_idx * dt
        if self.input_source == "script":
            self.wrist_angle = scripted_angle(self.script, t)
        self.ctrl, ps = advance_tick(self.ctrl, self.wrist_angle, t, self.harness.plant, dt)
        self.last_plant = ps

        trial = self.trial
        trial_info: dict[str, Any] | None = None
        if trial is not None and trial.phase == "running":
            in_band = False
            if trial.kind == "modulate" and trial.tracker is not None:
                in_band = trial.tracker.update(ps.measured_force, trial.elapsed)
                if trial.tracker.succeeded:
                    trial.phase = "success"
                    trial.modulation_time = trial.tracker.entry_t
                elif trial.elapsed >= trial.target.timeout:
                    trial.phase = "timeout"
            elif trial.kind == "maxforce":
                trial.peak = max(trial.peak, ps.measured_force)
                trial.measured_history.append(ps.measured_force)
                window_ticks = round(PLATEAU_WINDOW_S / dt)
                if trial.peak > 0.0 and len(trial.measured_history) > window_ticks:
                    window = trial.measured_history[-(window_ticks + 1) :]
                    if (max(window) - min(window)) / PLATEAU_WINDOW_S < PLATEAU_RATE_N_PER_S:
                        trial.phase = "done"
                if trial.elapsed >= 30.0:
                    trial.phase = "done"
            trial.rows.append(
                TickLogRow(
                    t=trial.elapsed,
                    wrist_angle=self.wrist_angle,
                    region=self.ctrl.region.value,
                    motor_position=self.ctrl.motor.position,
                    true_force=ps.true_force,
                    measured_force=ps.measured_force,
                    in_band=in_band,
                    intent="live",
                )
            )
            if trial.phase != "running":
                trial_info = self._trial_payload(in_band)
                self._finish_trial()

        self.tick_idx += 1
        if (self.tick_idx - 1) % self.frame_divisor == 0 or trial_info is not None:
            return self._frame(trial_info)
        return None

    def _trial_payload(self, in_band: bool) -> dict[str, Any]:
        trial = self.trial
        assert trial is not None
        payload: dict[str, Any] = {"kind": trial.kind, "phase": trial.phase}
        if trial.target is not None:
            payload.update(
                {
                    "percent": trial.target.percent,
                    "target": trial.target.absolute,
                    "display": trial.target.display,
                    "band": trial.target.band,
                    "in_band": in_band,
                    "hold_progress": trial.tracker.hold_progress if trial.tracker else 0.0,
                    "modulation_time": trial.modulation_time,
                }
            )
        if trial.kind == "maxforce":
            payload["peak"] = trial.peak
        return payload

    def _frame(self, trial_override: dict[str, Any] | None = None) -> dict[str, Any]:
        ps = self.last_plant
        trial = self.trial
        trial_payload = trial_override
        if trial_payload is None and trial is not None:
            in_band = False
            if trial.tracker is not None and trial.rows:
                in_band = trial.rows[-1].in_band
            trial_payload = self._trial_payload(in_band)
        return {
            "type": "state",
            "v": SCHEMA_VERSION,
            "tick": self.tick_idx - 1,
            "t": (self.tick_idx - 1) * self.harness.tick,
            "wrist_angle": self.wrist_angle,
            "region": self.ctrl.region.value,
            "thresholds": {
                "open": self.ctrl.thresholds.open_deg,
                "close": self.ctrl.thresholds.close_deg,
            },
            "motor_position": self.ctrl.motor.position,
            "measured_force": ps.measured_force if ps is not None else 0.0,
            "mode": self.mode_label,
            "trial": trial_payload,
        }

    # -- asyncio plumbing ---------------------------------------------------

    async def _handler(self, ws: ServerConnection) -> None:
        queue: asyncio.Queue[str] = asyncio.Queue(maxsize=64)
        self._clients[ws] = queue
        sender = asyncio.create_task(self._sender(ws, queue))
        try:
            async for message in ws:
                try:
                    cmd = decode_command(message)
                except CodecError as exc:
                    await ws.send(
                        encode_frame(
                            {"type": "error", "v": SCHEMA_VERSION, "message": str(exc)}
                        )
                    )
                    continue
                if isinstance(cmd, SetWristAngle) and self.input_source == "script":
                    await ws.send(
                        encode_frame(
                            {
                                "type": "error",
                                "v": SCHEMA_VERSION,
                                "message": "wrist input is script-locked",
                            }
                        )
                    )
                    continue
                await self._commands.put(cmd)
        except ConnectionClosed:
            pass
        finally:
            self._clients.pop(ws, None)
            sender.cancel()

    async def _sender(self, ws: ServerConnection, queue: asyncio.Queue[str]) -> None:
        try:
            while True:
                await ws.send(await queue.get())
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def _fanout(self, text: str) -> None:
        for queue in self._clients.values():
            try:
                queue.put_nowait(text)
            except asyncio.QueueFull:
                pass  # slow client: drop the frame, never stall the tick

    async def _tick_loop(self) -> None:
        dt = self.harness.tick
        loop = asyncio.get_running_loop()
        next_deadline = loop.time() + dt
        for cmd in self.initial_commands:
            self._apply_command(cmd)
        while not self._stop.is_set():
            while not self._commands.empty():
                self._apply_command(self._commands.get_nowait())
            frame = self._advance_one_tick()
            if frame is not None:
                self._fanout(encode_frame(frame))
            if self.max_ticks is not None and self.tick_idx >= self.max_ticks:
                break
            if self.realtime:
                delay = next_deadline - loop.time()
                next_deadline += dt
                if delay > 0:
                    try:
                        await asyncio.wait_for(self._stop.wait(), timeout=delay)
                    except asyncio.TimeoutError:
                        pass
            else:
                await asyncio.sleep(0)

    async def serve(self) -> None:
        """Run the server until stop() is called (or max_ticks elapse)."""
        async with serve(self._handler, "127.0.0.1", self.port):
            self._started.set()
            await self._tick_loop()

    def run_forever(self) -> None:
        asyncio.run(self.serve())

    # -- threaded harness for tests and embedding ---------------------------

    def start_background(self) -> None:
        self._startup_error: BaseException | None = None

        def runner() -> None:
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)
            try:
                self._loop.run_until_complete(self.serve())
            except BaseException as exc:  # surfaced to the starting thread
                self._startup_error = exc
                self._started.set()
            finally:
                self._loop.close()

        self._thread = threading.Thread(target=runner, daemon=True)
        self._thread.start()
        if not self._started.wait(timeout=5.0):
            raise RuntimeError("bridge failed to start")
        if self._startup_error is not None:
            raise RuntimeError(
                f"bridge failed to start on port {self.port}: {self._startup_error}"
            ) from self._startup_error

    def wait(self) -> None:
        """Block until the background server exits."""
        if self._thread is not None:
            self._thread.join()

    def stop(self) -> None:
        if self._loop is not None and not self._loop.is_closed():
            try:
                self._loop.call_soon_threadsafe(self._stop.set)
            except RuntimeError:
                pass  # loop finished between the check and the call
        if self._thread is not None:
            self._thread.join(timeout=10.0)
