// Wire schema shared with the bridge: one JSON object per message with
// mandatory `type` and `v` fields. Unknown fields are preserved on decode so
// newer bridges keep working with this console.

export const SCHEMA_VERSION = 1;
export const ANGLE_GUARD_DEG = 120;

export interface Thresholds {
  open: number;
  close: number;
}

export interface TrialState {
  kind: string;
  phase: string;
  percent?: number;
  target?: number;
  display?: number;
  band?: number;
  in_band?: boolean;
  hold_progress?: number;
  modulation_time?: number | null;
  peak?: number;
}

export interface StateFrame {
  type: "state";
  v: number;
  tick: number;
  t: number;
  wrist_angle: number;
  region: "open" | "neutral" | "close";
  thresholds: Thresholds;
  motor_position: number;
  measured_force: number;
  mode: string;
  trial: TrialState | null;
  [extra: string]: unknown;
}

export interface ErrorFrame {
  type: "error";
  v: number;
  message: string;
  [extra: string]: unknown;
}

export type Frame = StateFrame | ErrorFrame;

export class CodecError extends Error {}

const STATE_REQUIRED = [
  "tick",
  "t",
  "wrist_angle",
  "region",
  "thresholds",
  "motor_position",
  "measured_force",
  "mode",
] as const;

export function decodeFrame(text: string): Frame {
  let payload: unknown;
  try {
    payload = JSON.parse(text);
  } catch (err) {
    throw new CodecError(`bad JSON frame: ${(err as Error).message}`);
  }
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new CodecError("frame must be a JSON object");
  }
  const frame = payload as Record<string, unknown>;
  if (!("type" in frame)) throw new CodecError("missing required field 'type'");
  if (!("v" in frame)) throw new CodecError("missing required field 'v'");
  if (frame.type === "state") {
    for (const field of STATE_REQUIRED) {
      if (!(field in frame)) {
        throw new CodecError(`missing required field '${field}'`);
      }
    }
    return frame as unknown as StateFrame;
  }
  if (frame.type === "error") {
    if (!("message" in frame)) throw new CodecError("missing required field 'message'");
    return frame as unknown as ErrorFrame;
  }
  throw new CodecError(`unknown frame type '${String(frame.type)}'`);
}

export type Command =
  | { type: "set_wrist_angle"; v: number; angle: number }
  | { type: "set_mode"; v: number; mode: string }
  | { type: "set_thresholds"; v: number; open: number; close: number }
  | { type: "start_trial"; v: number; kind: string; percent?: number; target_n?: number }
  | { type: "abort_trial"; v: number };

export function setWristAngle(angle: number): Command {
  if (!Number.isFinite(angle) || Math.abs(angle) > ANGLE_GUARD_DEG) {
    throw new CodecError(`angle ${angle} exceeds the +/-${ANGLE_GUARD_DEG} deg guard`);
  }
  return { type: "set_wrist_angle", v: SCHEMA_VERSION, angle };
}

export function setMode(mode: string): Command {
  return { type: "set_mode", v: SCHEMA_VERSION, mode };
}

export function startModulation(percent: number): Command {
  return { type: "start_trial", v: SCHEMA_VERSION, kind: "modulate", percent };
}

export function startMaxForce(): Command {
  return { type: "start_trial", v: SCHEMA_VERSION, kind: "maxforce" };
}

export function abortTrial(): Command {
  return { type: "abort_trial", v: SCHEMA_VERSION };
}

export function encodeCommand(cmd: Command): string {
  return JSON.stringify(cmd);
}
