// Wrist input: arrow-key hold integrates the commanded angle at a bounded
// rate (making the task physically comparable to real wrist dynamics) and
// slider drags slew toward the dragged value under the same limit. Commands
// go out at no more than `sendHz`, and the bridge holds the last commanded
// angle when we go quiet, so key-up needs no extra traffic.

import { Command, setWristAngle } from "./codec.js";

export interface CommandSink {
  send(cmd: Command): void;
}

export interface WristInputOptions {
  rateLimitDegPerSec?: number;
  sendHz?: number;
  minDeg?: number;
  maxDeg?: number;
}

export class WristInput {
  angle = 0;
  private extendHeld = false;
  private flexHeld = false;
  private sliderTarget: number | null = null;
  private lastTickMs: number | null = null;
  private lastSendMs = -Infinity;
  private lastSentAngle: number | null = null;

  readonly rateLimit: number;
  readonly sendIntervalMs: number;
  readonly minDeg: number;
  readonly maxDeg: number;

  constructor(
    private readonly sink: CommandSink,
    opts: WristInputOptions = {},
  ) {
    this.rateLimit = opts.rateLimitDegPerSec ?? 60;
    this.sendIntervalMs = 1000 / (opts.sendHz ?? 30);
    this.minDeg = opts.minDeg ?? -120;
    this.maxDeg = opts.maxDeg ?? 120;
  }

  keyDown(key: "extend" | "flex"): void {
    if (key === "extend") this.extendHeld = true;
    else this.flexHeld = true;
    this.sliderTarget = null; // keys take over from the slider
  }

  keyUp(key: "extend" | "flex"): void {
    if (key === "extend") this.extendHeld = false;
    else this.flexHeld = false;
  }

  setSlider(angle: number): void {
    this.sliderTarget = Math.max(this.minDeg, Math.min(this.maxDeg, angle));
  }

  /** Jump the local angle to match server state (e.g. after reconnect). */
  syncTo(angle: number): void {
    this.angle = angle;
    this.sliderTarget = null;
  }

  tick(nowMs: number): void {
    if (this.lastTickMs === null) {
      this.lastTickMs = nowMs;
      return;
    }
    const dt = (nowMs - this.lastTickMs) / 1000;
    this.lastTickMs = nowMs;
    if (dt <= 0) return;

    const maxStep = this.rateLimit * dt;
    const direction = (this.extendHeld ? 1 : 0) - (this.flexHeld ? 1 : 0);
    if (direction !== 0) {
      this.angle += direction * maxStep;
    } else if (this.sliderTarget !== null) {
      const delta = this.sliderTarget - this.angle;
      this.angle += Math.max(-maxStep, Math.min(maxStep, delta));
      if (this.angle === this.sliderTarget) this.sliderTarget = null;
    }
    this.angle = Math.max(this.minDeg, Math.min(this.maxDeg, this.angle));

    const due = nowMs - this.lastSendMs >= this.sendIntervalMs;
    if (due && this.angle !== this.lastSentAngle) {
      this.sink.send(setWristAngle(this.angle));
      this.lastSendMs = nowMs;
      this.lastSentAngle = this.angle;
    }
  }
}
