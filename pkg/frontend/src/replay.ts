// Replay input mode: feed the wrist column of a recorded trial CSV back to
// the bridge as commands, paced by the log's own timestamps and throttled to
// the same send rate as live input.

import { Command, setWristAngle } from "./codec.js";
import { CommandSink } from "./input.js";

export interface ReplaySample {
  t: number;
  angle: number;
}

export function parseTrialCsv(text: string): ReplaySample[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error("empty replay file");
  const header = lines[0].split(",");
  const tCol = header.indexOf("t");
  const angleCol = header.indexOf("wrist_angle");
  if (tCol < 0 || angleCol < 0) {
    throw new Error("not a trial log: needs t and wrist_angle columns");
  }
  const samples: ReplaySample[] = [];
  for (let i = 1; i < lines.length; i += 1) {
    const fields = lines[i].split(",");
    const t = Number(fields[tCol]);
    const angle = Number(fields[angleCol]);
    if (!Number.isFinite(t) || !Number.isFinite(angle)) {
      throw new Error(`bad replay row ${i + 1}`);
    }
    samples.push({ t, angle });
  }
  return samples;
}

export class ReplayPlayer {
  private startMs: number | null = null;
  private cursor = 0;
  private lastSendMs = -Infinity;
  private lastSentAngle: number | null = null;
  readonly sendIntervalMs: number;

  constructor(
    private readonly sink: CommandSink,
    private readonly samples: ReplaySample[],
    opts: { sendHz?: number } = {},
  ) {
    if (samples.length === 0) throw new Error("empty replay");
    this.sendIntervalMs = 1000 / (opts.sendHz ?? 30);
  }

  get active(): boolean {
    return this.startMs !== null && this.cursor < this.samples.length;
  }

  start(nowMs: number): void {
    this.startMs = nowMs;
    this.cursor = 0;
  }

  stop(): void {
    this.startMs = null;
  }

  /** Advance playback; sends the newest sample due at this wall time. */
  tick(nowMs: number): void {
    if (!this.active || this.startMs === null) return;
    const elapsed = (nowMs - this.startMs) / 1000;
    let latest: ReplaySample | null = null;
    while (this.cursor < this.samples.length && this.samples[this.cursor].t <= elapsed) {
      latest = this.samples[this.cursor];
      this.cursor += 1;
    }
    if (latest === null) return;
    if (nowMs - this.lastSendMs >= this.sendIntervalMs && latest.angle !== this.lastSentAngle) {
      this.sink.send(setWristAngle(latest.angle) as Command);
      this.lastSendMs = nowMs;
      this.lastSentAngle = latest.angle;
    }
  }
}
