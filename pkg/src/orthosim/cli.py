"""Command-line entry point for the simulator harnesses.

Exit codes: 0 success, 1 trial infrastructure error, 2 config/usage error.
Output directory resolution: --out flag, then the ORTHOSIS_SIM_OUT
environment variable, then the config's out_dir.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import SessionConfig, load_config
from .errors import ConfigError
from .logio import read_log, write_log, write_summary
from . import trials
from .trials import (
    run_functional_battery,
    run_max_force,
    run_modulation_battery,
    replay_wrist,
    summary_rows,
)

COMPARE_MODES = ("twa", "bwa", "pwa", "passive")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthosim",
        description="Deterministic wrist-controlled grasping orthosis simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, mode: bool = True) -> None:
        p.add_argument("--config", help="session config JSON (defaults used if omitted)")
        p.add_argument("--seed", type=int, help="participant noise seed override")
        p.add_argument("--out", help="output directory")
        if mode:
            p.add_argument("--mode", choices=COMPARE_MODES, help="control mode override")

    p = sub.add_parser("calibrate", help="solve plant constants from the anchors")
    common(p, mode=False)

    p = sub.add_parser("maxforce", help="run max-force trials")
    common(p)
    p.add_argument("--trials", type=int, help="number of trials (default from config)")

    p = sub.add_parser("modulate", help="run the force-modulation battery")
    common(p)

    p = sub.add_parser("grt", help="run the functional grasp-and-release battery")
    common(p)

    p = sub.add_parser("compare", help="run the modulation battery under every mode")
    common(p, mode=False)
    p.add_argument("--seeds", type=int, default=3, help="seeds per mode (default 3)")

    p = sub.add_parser("replay", help="re-run a logged wrist stream and diff the physics")
    common(p)
    p.add_argument("--log", required=True, help="trial CSV to replay")

    p = sub.add_parser("serve", help="run the real-time bridge")
    common(p)
    p.add_argument("--port", type=int, default=7420)
    p.add_argument("--frame-divisor", type=int, default=3,
                   help="emit one frame every N ticks (default 3)")
    return parser


def _load(args: argparse.Namespace) -> SessionConfig:
    cfg = load_config(args.config) if args.config else SessionConfig()
    if getattr(args, "mode", None):
        cfg = replace(cfg, mode=args.mode)
    if args.seed is not None:
        cfg = replace(cfg, participant=replace(cfg.participant, rng_seed=args.seed))
    return cfg


def _out_dir(args: argparse.Namespace, cfg: SessionConfig) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get("ORTHOSIS_SIM_OUT"):
        return Path(os.environ["ORTHOSIS_SIM_OUT"])
    return Path(cfg.out_dir)


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    plant = cfg.plant
    payload = {
        "tenodesis_onset_deg": plant.tenodesis.onset_deg,
        "tenodesis_saturation_deg": plant.tenodesis.saturation_deg,
        "tenodesis_max_force": plant.tenodesis.max_force,
        "contact_excursion": plant.contact.contact_excursion,
        "device_stiffness": plant.contact.device_stiffness,
        "slack": plant.transmission.slack,
        "flexion_gain": plant.transmission.flexion_gain,
        "sensor_resolution": plant.instrument.sensor_resolution,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_maxforce(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    harness = cfg.harness()
    mode = cfg.control_mode()
    n = args.trials if args.trials is not None else cfg.trial.max_force_trials
    result = run_max_force(harness, mode, cfg.participant, trials=n)
    for i, trace in enumerate(result.traces, start=1):
        write_log(out / f"maxforce_{cfg.mode}_trial{i}.csv", trace)
    print(f"mode={cfg.mode} trials={n}")
    print(f"peaks: {', '.join(f'{p:.2f}' for p in result.peaks)} N")
    print(f"average max: {result.average_max:.2f} N")
    print(f"highest max: {result.highest_max:.2f} N")
    return 0


def _battery_table(battery: trials.ModulationBattery) -> str:
    lines = [
        f"{'target %':>9} {'target N':>9} {'avg time s':>11} {'successes':>10}"
    ]
    for target in battery.targets:
        avg = battery.average_modulation_time(target.percent)
        lines.append(
            f"{target.percent:>9} {target.display:>9.1f} "
            f"{avg if avg is not None else float('nan'):>11.2f} "
            f"{battery.successes(target.percent):>6}/{len(battery.outcomes[target.percent])}"
        )
    return "\n".join(lines)


def _write_battery(out: Path, cfg: SessionConfig, battery: trials.ModulationBattery) -> None:
    for i, trace in enumerate(battery.max_force.traces, start=1):
        write_log(out / f"maxforce_{battery.mode}_trial{i}.csv", trace)
    for target in battery.targets:
        for i, outcome in enumerate(battery.outcomes[target.percent], start=1):
            write_log(
                out / f"modulate_{battery.mode}_p{target.percent}_r{i}.csv",
                outcome.trace,
            )


def _cmd_modulate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    battery = run_modulation_battery(
        cfg.harness(),
        cfg.control_mode(),
        cfg.participant,
        repeats=cfg.trial.modulation_repeats,
        max_force_trials=cfg.trial.max_force_trials,
        band=cfg.trial.band,
        hold=cfg.trial.hold,
        timeout=cfg.trial.timeout,
    )
    _write_battery(out, cfg, battery)
    write_summary(
        out / f"summary_{battery.mode}.csv",
        summary_rows(battery, cfg.participant.rng_seed),
    )
    print(f"mode={battery.mode} highest_max={battery.max_force.highest_max:.2f} N")
    print(_battery_table(battery))
    return 0


def _cmd_grt(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    score = run_functional_battery(
        cfg.harness(),
        cfg.control_mode(),
        cfg.participant,
        cfg.objects,
        slot=cfg.trial.grt_slot,
        window=cfg.trial.grt_window,
    )
    out.mkdir(parents=True, exist_ok=True)
    with (out / f"grt_{cfg.mode}.csv").open("w") as fh:
        fh.write("object,successes\n")
        for name, count in score.per_object:
            fh.write(f"{name},{count}\n")
    for name, count in score.per_object:
        print(f"{name:>12}: {count}")
    print(f"{'total':>12}: {score.total}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    if args.seeds < 1:
        raise ConfigError(f"--seeds {args.seeds} must be >= 1")
    base = cfg.participant.rng_seed
    all_rows: list[dict[str, object]] = []
    for mode_name in COMPARE_MODES:
        for i in range(args.seeds):
            seed = base + i
            model = replace(cfg.participant, rng_seed=seed)
            battery = run_modulation_battery(
                cfg.harness(),
                cfg.control_mode(mode_name),
                model,
                repeats=cfg.trial.modulation_repeats,
                max_force_trials=cfg.trial.max_force_trials,
                band=cfg.trial.band,
                hold=cfg.trial.hold,
                timeout=cfg.trial.timeout,
            )
            _write_battery(out / mode_name / f"seed{seed}", cfg, battery)
            all_rows.extend(summary_rows(battery, seed))
    write_summary(out / "summary.csv", all_rows)
    header = f"{'mode':>8} {'seed':>6} {'target %':>9} {'target N':>9} {'successes':>10}"
    print(header)
    for row in all_rows:
        print(
            f"{row['mode']:>8} {row['seed']:>6} {row['target_percent']:>9} "
            f"{row['target_force']:>9.1f} {row['successes']:>6}/{row['trials']}"
        )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    cfg = _load(args)
    source = read_log(args.log)
    angles = tuple(row.wrist_angle for row in source)
    replayed = replay_wrist(cfg.harness(), cfg.control_mode(), angles)
    mismatches = 0
    for original, redo in zip(source, replayed):
        if (
            original.region != redo.region
            or original.motor_position != redo.motor_position
            or original.true_force != redo.true_force
            or original.measured_force != redo.measured_force
        ):
            mismatches += 1
    if args.out:
        write_log(Path(args.out) / f"replay_{Path(args.log).name}", replayed)
    if mismatches:
        print(f"replay mismatch on {mismatches}/{len(source)} ticks")
        return 1
    print(f"replay identical across {len(source)} ticks")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .bridge import BridgeServer  # deferred: pulls in asyncio/websockets

    cfg = _load(args)
    out = _out_dir(args, cfg)
    server = BridgeServer(cfg, port=args.port, frame_divisor=args.frame_divisor, out_dir=out)
    server.start_background()
    print(f"serving on ws://127.0.0.1:{args.port} (mode={cfg.mode}); Ctrl-C to stop")
    try:
        server.wait()
    except KeyboardInterrupt:
        server.stop()
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "maxforce": _cmd_maxforce,
    "modulate": _cmd_modulate,
    "grt": _cmd_grt,
    "compare": _cmd_compare,
    "replay": _cmd_replay,
    "serve": _cmd_serve,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
