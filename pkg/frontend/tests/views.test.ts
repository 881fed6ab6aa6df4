import { describe, expect, it } from "vitest";

import { StateFrame, TrialState } from "../src/codec.js";
import { forceView } from "../src/forcebar.js";
import { gaugeView } from "../src/gauge.js";

function frame(overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    type: "state",
    v: 1,
    tick: 0,
    t: 0,
    wrist_angle: 0,
    region: "neutral",
    thresholds: { open: -15, close: 15 },
    motor_position: 0,
    measured_force: 0,
    mode: "twa",
    trial: null,
    ...overrides,
  };
}

describe("gaugeView", () => {
  it("centers the needle in the neutral band at zero", () => {
    const view = gaugeView(frame(), false);
    expect(view).toMatchObject({
      needleDeg: 0,
      openUpTo: -15,
      closeFrom: 15,
      activeRegion: "neutral",
      disconnected: false,
    });
  });

  it("highlights the close band past the threshold", () => {
    const view = gaugeView(frame({ wrist_angle: 20, region: "close" }), false);
    expect(view.activeRegion).toBe("close");
    expect(view.needleDeg).toBe(20);
  });

  it("moves the bands when thresholds change", () => {
    const view = gaugeView(
      frame({ thresholds: { open: -10, close: 25 } }),
      false,
    );
    expect(view.openUpTo).toBe(-10);
    expect(view.closeFrom).toBe(25);
  });

  it("shows the disconnected badge on stale frames", () => {
    const view = gaugeView(frame(), true);
    expect(view.disconnected).toBe(true);
    expect(view.activeRegion).toBeNull();
  });

  it("is a pure function of the frame", () => {
    const f = frame({ wrist_angle: 7.5 });
    expect(gaugeView(f, false)).toEqual(gaugeView(f, false));
  });
});

describe("forceView", () => {
  const trial: TrialState = {
    kind: "modulate",
    phase: "running",
    percent: 50,
    target: 7.65,
    display: 7.7,
    band: 1.0,
    in_band: false,
    hold_progress: 0,
    modulation_time: null,
  };

  it("turns green exactly when the bridge says in-band", () => {
    const green = forceView(frame({ trial: { ...trial, in_band: true } }));
    const grey = forceView(frame({ trial: { ...trial, in_band: false } }));
    expect(green.green).toBe(true);
    expect(grey.green).toBe(false);
  });

  it("never invents a green state without a trial", () => {
    const view = forceView(frame({ measured_force: 7.65 }));
    expect(view.green).toBe(false);
    expect(view.target).toBeNull();
  });

  it("reports hold progress toward the 3 s requirement", () => {
    const view = forceView(frame({ trial: { ...trial, hold_progress: 1.5 } }));
    expect(view.holdProgress).toBe(1.5);
    expect(view.holdRequired).toBe(3.0);
  });

  it("raises the success banner when the trial completes", () => {
    const view = forceView(
      frame({ trial: { ...trial, phase: "success", hold_progress: 3.0 } }),
    );
    expect(view.banner).toBe("success");
    expect(view.trialActive).toBe(false);
  });

  it("scales the bars to fit the target", () => {
    const view = forceView(frame({ trial: { ...trial, target: 30 } }));
    expect(view.scaleMax).toBeGreaterThanOrEqual(30 * 1.5);
  });
});
