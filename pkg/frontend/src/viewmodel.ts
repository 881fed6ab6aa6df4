// Console state derived purely from received frames plus local input; the
// charts keep a bounded 60 s window and frames arriving out of order are
// dropped so every view stays monotone in simulation time.

import { Frame, StateFrame } from "./codec.js";

export interface ChartPoint {
  t: number;
  value: number;
}

export class RingBuffer {
  private buf: ChartPoint[] = [];

  constructor(
    readonly spanSeconds: number,
    readonly maxPoints: number = 4096,
  ) {}

  push(point: ChartPoint): void {
    this.buf.push(point);
    const cutoff = point.t - this.spanSeconds;
    let start = 0;
    while (start < this.buf.length && this.buf[start].t < cutoff) start++;
    if (start > 0) this.buf = this.buf.slice(start);
    if (this.buf.length > this.maxPoints) {
      this.buf = this.buf.filter((_, i) => i % 2 === 0); // decimate, keep shape
    }
  }

  points(): readonly ChartPoint[] {
    return this.buf;
  }

  clear(): void {
    this.buf = [];
  }
}

export type ConnectionStatus = "connecting" | "connected" | "stale" | "closed";

export const STALE_AFTER_MS = 500;

export class ConsoleViewModel {
  latest: StateFrame | null = null;
  lastError: string | null = null;
  droppedFrames = 0;
  private lastFrameWallMs = -Infinity;
  private socketOpen = false;
  private socketEverOpened = false;

  readonly angleChart = new RingBuffer(60);
  readonly forceChart = new RingBuffer(60);

  ingest(frame: Frame, wallMs: number): boolean {
    if (frame.type === "error") {
      this.lastError = frame.message;
      return false;
    }
    if (this.latest !== null && frame.t < this.latest.t) {
      this.droppedFrames += 1;
      return false;
    }
    this.latest = frame;
    this.lastFrameWallMs = wallMs;
    this.angleChart.push({ t: frame.t, value: frame.wrist_angle });
    this.forceChart.push({ t: frame.t, value: frame.measured_force });
    return true;
  }

  socketOpened(): void {
    this.socketOpen = true;
    this.socketEverOpened = true;
  }

  socketClosed(): void {
    this.socketOpen = false;
  }

  status(nowMs: number): ConnectionStatus {
    if (!this.socketOpen) return this.socketEverOpened ? "closed" : "connecting";
    if (this.latest === null) return "connecting";
    return nowMs - this.lastFrameWallMs > STALE_AFTER_MS ? "stale" : "connected";
  }
}
