// Force-matching display: target and live force as vertical bars, with the
// live bar turning bright green while the bridge reports in-band. The green
// state is trusted from the frame's in_band flag verbatim - never recomputed
// here - so screen and trial bookkeeping can never disagree.

import { StateFrame } from "./codec.js";

export interface ForceView {
  live: number;
  target: number | null;
  band: number | null;
  green: boolean;
  holdProgress: number;
  holdRequired: number;
  banner: "none" | "success" | "timeout" | "aborted";
  trialActive: boolean;
  peak: number | null;
  scaleMax: number;
}

export const HOLD_REQUIRED_S = 3.0;

export function forceView(frame: StateFrame | null): ForceView {
  const empty: ForceView = {
    live: 0,
    target: null,
    band: null,
    green: false,
    holdProgress: 0,
    holdRequired: HOLD_REQUIRED_S,
    banner: "none",
    trialActive: false,
    peak: null,
    scaleMax: 20,
  };
  if (frame === null) return empty;
  const trial = frame.trial;
  if (!trial) {
    return { ...empty, live: frame.measured_force };
  }
  let banner: ForceView["banner"] = "none";
  if (trial.phase === "success") banner = "success";
  else if (trial.phase === "timeout") banner = "timeout";
  else if (trial.phase === "aborted") banner = "aborted";
  const target = trial.target ?? null;
  const scaleMax = Math.max(20, target !== null ? target * 1.6 : 0);
  return {
    live: frame.measured_force,
    target,
    band: trial.band ?? null,
    green: trial.in_band === true,
    holdProgress: trial.hold_progress ?? 0,
    holdRequired: HOLD_REQUIRED_S,
    banner,
    trialActive: trial.phase === "running",
    peak: trial.peak ?? null,
    scaleMax,
  };
}

export function drawForceBars(
  ctx: CanvasRenderingContext2D,
  view: ForceView,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const baseline = height - 24;
  const usable = baseline - 30;
  const toPx = (force: number) => (force / view.scaleMax) * usable;

  const barWidth = width * 0.22;
  const targetX = width * 0.2;
  const liveX = width * 0.58;

  if (view.target !== null) {
    ctx.fillStyle = "#8a8f98";
    ctx.fillRect(targetX, baseline - toPx(view.target), barWidth, toPx(view.target));
    if (view.band !== null) {
      const top = baseline - toPx(view.target + view.band);
      const bottom = baseline - toPx(Math.max(view.target - view.band, 0));
      ctx.fillStyle = "rgba(120, 200, 120, 0.25)";
      ctx.fillRect(targetX - 8, top, barWidth + liveX - targetX + 16, bottom - top);
    }
  }

  ctx.fillStyle = view.green ? "#2ecc40" : "#c0c5cc";
  ctx.fillRect(liveX, baseline - toPx(view.live), barWidth, toPx(view.live));

  ctx.font = "13px system-ui, sans-serif";
  ctx.fillStyle = "#cfcfcf";
  ctx.textAlign = "center";
  if (view.target !== null) {
    ctx.fillText(`target ${view.target.toFixed(1)} N`, targetX + barWidth / 2, baseline + 16);
  }
  ctx.fillText(`live ${view.live.toFixed(2)} N`, liveX + barWidth / 2, baseline + 16);

  if (view.trialActive && view.target !== null) {
    // hold progress as a 0..3 s arc in the top-right corner
    const cx = width - 28;
    const cy = 28;
    ctx.beginPath();
    ctx.arc(cx, cy, 16, 0, Math.PI * 2);
    ctx.strokeStyle = "#555";
    ctx.lineWidth = 5;
    ctx.stroke();
    const frac = Math.min(view.holdProgress / view.holdRequired, 1);
    if (frac > 0) {
      ctx.beginPath();
      ctx.arc(cx, cy, 16, -Math.PI / 2, -Math.PI / 2 + frac * Math.PI * 2);
      ctx.strokeStyle = "#2ecc40";
      ctx.stroke();
    }
  }

  if (view.banner !== "none") {
    ctx.font = "bold 20px system-ui, sans-serif";
    ctx.fillStyle = view.banner === "success" ? "#2ecc40" : "#d9534f";
    ctx.fillText(view.banner.toUpperCase(), width / 2, 24);
  }
  if (view.peak !== null) {
    ctx.font = "13px system-ui, sans-serif";
    ctx.fillStyle = "#cfcfcf";
    ctx.fillText(`peak ${view.peak.toFixed(2)} N`, width / 2, 44);
  }
}
