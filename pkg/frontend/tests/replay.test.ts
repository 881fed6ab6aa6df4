import { describe, expect, it } from "vitest";

import { Command } from "../src/codec.js";
import { parseTrialCsv, ReplayPlayer } from "../src/replay.js";

const CSV = [
  "t,wrist_angle,region,motor_position,true_force,measured_force,in_band,intent",
  "0,0,neutral,0,0,0,false,script",
  "0.01,0.3,neutral,0,0,0,false,script",
  "0.02,0.6,neutral,0,0,0,false,script",
  "1,20,close,0.1,1.5,1.4,false,script",
].join("\n");

class Recorder {
  commands: Command[] = [];
  send(cmd: Command): void {
    this.commands.push(cmd);
  }
  angles(): number[] {
    return this.commands.map((c) => (c as { angle: number }).angle);
  }
}

describe("parseTrialCsv", () => {
  it("extracts time and wrist angle pairs", () => {
    const samples = parseTrialCsv(CSV);
    expect(samples).toHaveLength(4);
    expect(samples[0]).toEqual({ t: 0, angle: 0 });
    expect(samples[3]).toEqual({ t: 1, angle: 20 });
  });

  it("rejects files without the trial log columns", () => {
    expect(() => parseTrialCsv("a,b\n1,2")).toThrowError(/wrist_angle/);
  });

  it("rejects malformed rows with the row number", () => {
    const bad = CSV + "\nnope,x,neutral,0,0,0,false,script";
    expect(() => parseTrialCsv(bad)).toThrowError(/row 6/);
  });
});

describe("ReplayPlayer", () => {
  it("paces playback by the log's own timestamps", () => {
    const sink = new Recorder();
    const player = new ReplayPlayer(sink, parseTrialCsv(CSV), { sendHz: 1000 });
    player.start(0);
    player.tick(0); // t = 0 sample due immediately
    player.tick(500); // nothing new due between 0.02 s and 1 s
    const mid = sink.angles().length;
    player.tick(1001); // the t = 1 sample
    expect(sink.angles()[0]).toBe(0);
    expect(sink.angles().length).toBeGreaterThan(mid);
    expect(sink.angles()[sink.angles().length - 1]).toBe(20);
    expect(player.active).toBe(false);
  });

  it("throttles sends to the configured rate", () => {
    const samples = Array.from({ length: 1000 }, (_, i) => ({
      t: i * 0.001,
      angle: i * 0.01,
    }));
    const sink = new Recorder();
    const player = new ReplayPlayer(sink, samples, { sendHz: 30 });
    player.start(0);
    for (let ms = 0; ms <= 1000; ms += 2) player.tick(ms);
    expect(sink.commands.length).toBeLessThanOrEqual(31);
  });

  it("skips ahead to the newest due sample after a stall", () => {
    const sink = new Recorder();
    const player = new ReplayPlayer(sink, parseTrialCsv(CSV), { sendHz: 1000 });
    player.start(0);
    player.tick(2000); // everything due at once: only the newest is sent
    expect(sink.angles()).toEqual([20]);
  });

  it("stop() deactivates playback", () => {
    const sink = new Recorder();
    const player = new ReplayPlayer(sink, parseTrialCsv(CSV));
    player.start(0);
    player.stop();
    player.tick(100);
    expect(sink.commands).toHaveLength(0);
    expect(player.active).toBe(false);
  });
});
