// End-to-end: a real bridge process on loopback, driven through the same
// codec/input modules the browser uses. Covers the live interaction path:
// key-hold raising force on screen, green-state fidelity to the bridge's
// in_band flag, a full human-driven 50% modulation trial landing in the
// session CSV, and command-to-frame latency.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { decodeFrame, encodeCommand, setMode, setWristAngle, startModulation, Command, StateFrame } from "../src/codec.js";
import { forceView } from "../src/forcebar.js";
import { WristInput } from "../src/input.js";
import { ConsoleViewModel } from "../src/viewmodel.js";

const PORT = 7491;
const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

let bridge: ChildProcess;
let outDir: string;
let ws: WebSocket;
let vm: ConsoleViewModel;
const frames: StateFrame[] = [];

function send(cmd: Command): void {
  ws.send(encodeCommand(cmd));
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor<T>(
  probe: () => T | null | undefined | false,
  timeoutMs: number,
  what: string,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = probe();
    if (value) return value as T;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await sleep(10);
  }
}

beforeAll(async () => {
  outDir = mkdtempSync(join(tmpdir(), "console-e2e-"));
  bridge = spawn(
    "python3",
    ["-u", "-m", "orthosim.cli", "serve", "--port", String(PORT), "--out", outDir],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  let banner = "";
  bridge.stdout!.on("data", (chunk) => (banner += String(chunk)));
  await waitFor(() => banner.includes("serving"), 15_000, "bridge startup");

  vm = new ConsoleViewModel();
  for (let attempt = 0; ; attempt += 1) {
    try {
      ws = new WebSocket(`ws://127.0.0.1:${PORT}`);
      await new Promise<void>((resolve, reject) => {
        ws.once("open", () => resolve());
        ws.once("error", reject);
      });
      break;
    } catch (err) {
      if (attempt >= 20) throw err;
      await sleep(250);
    }
  }
  vm.socketOpened();
  ws.on("message", (data) => {
    const frame = decodeFrame(String(data));
    if (frame.type === "state") {
      frames.push(frame);
      vm.ingest(frame, Date.now());
    }
  });
  await waitFor(() => vm.latest, 5_000, "first frame");
}, 30_000);

afterAll(async () => {
  ws?.close();
  bridge?.kill("SIGINT");
  await sleep(200);
  bridge?.kill("SIGKILL");
});

describe("console against a live bridge", () => {
  it(
    "holding the extend key raises motor position and force on screen",
    async () => {
      const input = new WristInput({ send }, { rateLimitDegPerSec: 60, sendHz: 30 });
      const before = vm.latest!;
      input.tick(performance.now());
      input.keyDown("extend");
      const driver = setInterval(() => input.tick(performance.now()), 10);
      await sleep(2500);
      input.keyUp("extend");
      clearInterval(driver);

      const after = vm.latest!;
      expect(after.wrist_angle).toBeGreaterThan(15);
      expect(after.motor_position).toBeGreaterThan(before.motor_position);
      expect(after.measured_force).toBeGreaterThan(before.measured_force);
      // straight from the view model the operator is looking at
      expect(forceView(after).live).toBe(after.measured_force);

      // park back at neutral and reset the motor for the next test
      send(setWristAngle(0));
      await sleep(300);
      send(setMode("twa"));
      await sleep(300);
    },
    20_000,
  );

  it(
    "completes a human-driven 50% modulation trial matching the headless CSV shape",
    async () => {
      const input = new WristInput({ send }, { rateLimitDegPerSec: 60, sendHz: 30 });
      input.tick(performance.now());
      const trialFrames: StateFrame[] = [];
      let mismatchedGreens = 0;

      send(startModulation(50));
      await waitFor(() => vm.latest?.trial, 5_000, "trial to start");

      const driver = setInterval(() => {
        const frame = vm.latest;
        if (!frame?.trial || frame.trial.phase !== "running") return;
        trialFrames.push(frame);
        // the operator's green indicator must be the bridge's in_band flag
        if (forceView(frame).green !== (frame.trial.in_band === true)) {
          mismatchedGreens += 1;
        }
        const target = frame.trial.target!;
        const band = frame.trial.band!;
        // a simple human strategy: push when low, back off when high,
        // return the wrist to neutral once the band turns green
        if (frame.measured_force < target - band) {
          input.keyUp("flex");
          input.keyDown("extend");
        } else if (frame.measured_force > target + band) {
          input.keyUp("extend");
          input.keyDown("flex");
        } else {
          input.keyUp("extend");
          input.keyUp("flex");
          input.setSlider(0);
        }
        input.tick(performance.now());
      }, 10);

      const success = await waitFor(
        () => frames.find((f) => f.trial?.phase === "success"),
        45_000,
        "trial success",
      );
      clearInterval(driver);

      expect(success.trial!.percent).toBe(50);
      expect(success.trial!.hold_progress).toBeCloseTo(3.0, 5);
      expect(mismatchedGreens).toBe(0);
      expect(trialFrames.some((f) => f.trial!.in_band)).toBe(true);

      // the live session CSV must look exactly like a headless trial record
      const livePath = join(outDir, "live_modulate_p50.csv");
      await waitFor(() => existsSync(livePath), 5_000, "live CSV");
      const live = readFileSync(livePath, "utf-8").split("\n");

      const headlessDir = mkdtempSync(join(tmpdir(), "headless-"));
      const headless = spawnSync(
        "python3",
        ["-m", "orthosim.cli", "modulate", "--mode", "twa", "--out", headlessDir],
        { cwd: REPO_ROOT },
      );
      expect(headless.status).toBe(0);
      const reference = readFileSync(
        join(headlessDir, "modulate_twa_p50_r1.csv"),
        "utf-8",
      ).split("\n");

      expect(live[0]).toBe(reference[0]); // identical schema line
      expect(live.length).toBeGreaterThan(10);
      const liveFields = live[1].split(",");
      const refFields = reference[1].split(",");
      expect(liveFields.length).toBe(refFields.length);
      // modulation succeeded, so the trace must contain in-band ticks
      expect(live.some((row) => row.includes(",true,"))).toBe(true);
    },
    60_000,
  );

  it(
    "reflects a key-driven command within 100 ms at the streaming rate",
    async () => {
      send(setMode("twa"));
      await sleep(200);
      const marker = 37.0;
      const sentAt = performance.now();
      send(setWristAngle(marker));
      await waitFor(
        () => vm.latest !== null && vm.latest.wrist_angle === marker,
        2_000,
        "command reflection",
      );
      const latency = performance.now() - sentAt;
      expect(latency).toBeLessThanOrEqual(100);
      send(setWristAngle(0));
    },
    10_000,
  );
});
