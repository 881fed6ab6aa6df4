"""Deterministic CSV logging: per-tick trial traces and battery summaries.

Floats are printed with 6 significant digits when that representation parses
back to the identical value, otherwise with the full shortest round-trip
repr, so read_log(write_log(rows)) always reproduces the rows bit-exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InvalidInputError

TICK_LOG_COLUMNS = (
    "t",
    "wrist_angle",
    "region",
    "motor_position",
    "true_force",
    "measured_force",
    "in_band",
    "intent",
)

#: Battery summary schema: max-force aggregates
#: plus one row per force target.
SUMMARY_COLUMNS = (
    "mode",
    "seed",
    "average_max_force",
    "highest_max_force",
    "target_percent",
    "target_force",
    "average_modulation_time",
    "successes",
    "trials",
)


@dataclass(frozen=True, slots=True)
class TickLogRow:
    """One simulation tick as logged to a trial CSV."""

    t: float
    wrist_angle: float
    region: str
    motor_position: float
    true_force: float
    measured_force: float
    in_band: bool
    intent: str


def format_float(value: float) -> str:
    """6 significant digits if lossless for this value, else full precision."""
    compact = format(value, ".6g")
    if float(compact) == value:
        return compact
    return repr(value)


def _parse_bool(text: str, row_num: int) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise InvalidInputError(f"row {row_num}: bad boolean {text!r}")


def write_log(path: str | Path, rows: Iterable[TickLogRow]) -> None:
    """Write a trial trace; an empty trial produces a header-only file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TICK_LOG_COLUMNS)
        for row in rows:
            writer.writerow(
                (
                    format_float(row.t),
                    format_float(row.wrist_angle),
                    row.region,
                    format_float(row.motor_position),
                    format_float(row.true_force),
                    format_float(row.measured_force),
                    "true" if row.in_band else "false",
                    row.intent,
                )
            )


def read_log(path: str | Path) -> list[TickLogRow]:
    """Read a trial trace back; raises with the row number on malformed input."""
    rows: list[TickLogRow] = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TICK_LOG_COLUMNS:
            raise InvalidInputError(f"bad log header {header!r} in {path}")
        for row_num, record in enumerate(reader, start=2):
            if len(record) != len(TICK_LOG_COLUMNS):
                raise InvalidInputError(
                    f"row {row_num}: expected {len(TICK_LOG_COLUMNS)} fields, "
                    f"got {len(record)}"
                )
            try:
                rows.append(
                    TickLogRow(
                        t=float(record[0]),
                        wrist_angle=float(record[1]),
                        region=record[2],
                        motor_position=float(record[3]),
                        true_force=float(record[4]),
                        measured_force=float(record[5]),
                        in_band=_parse_bool(record[6], row_num),
                        intent=record[7],
                    )
                )
            except ValueError as exc:
                raise InvalidInputError(f"row {row_num}: {exc}") from exc
    return rows


def write_summary(path: str | Path, rows: Sequence[Mapping[str, object]]) -> None:
    """Write battery summary rows; values already stringifiable."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    format_float(v) if isinstance(v, float) else ("" if v is None else v)
                    for v in (row.get(col) for col in SUMMARY_COLUMNS)
                ]
            )
