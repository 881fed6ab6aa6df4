// Wrist-angle gauge: a needle over three shaded region bands whose edges
// come from the frame's thresholds, mirroring the training display the
// device uses. Pure view computation separated from canvas drawing.

import { StateFrame } from "./codec.js";

export const GAUGE_MIN_DEG = -60;
export const GAUGE_MAX_DEG = 60;

export interface GaugeView {
  needleDeg: number | null;
  openUpTo: number; // open region: [GAUGE_MIN, openUpTo)
  closeFrom: number; // close region: (closeFrom, GAUGE_MAX]
  activeRegion: "open" | "neutral" | "close" | null;
  disconnected: boolean;
}

export function gaugeView(frame: StateFrame | null, stale: boolean): GaugeView {
  if (frame === null || stale) {
    return {
      needleDeg: frame?.wrist_angle ?? null,
      openUpTo: frame?.thresholds.open ?? -15,
      closeFrom: frame?.thresholds.close ?? 15,
      activeRegion: null,
      disconnected: true,
    };
  }
  return {
    needleDeg: frame.wrist_angle,
    openUpTo: frame.thresholds.open,
    closeFrom: frame.thresholds.close,
    activeRegion: frame.region,
    disconnected: false,
  };
}

const REGION_COLORS: Record<string, string> = {
  open: "#3a6ea5",
  neutral: "#555a60",
  close: "#a5513a",
};

function angleToRad(deg: number): number {
  // map [GAUGE_MIN, GAUGE_MAX] onto a 150 deg arc centered on vertical
  const span = GAUGE_MAX_DEG - GAUGE_MIN_DEG;
  const frac = (deg - GAUGE_MIN_DEG) / span;
  const start = Math.PI * 1.25;
  return start - frac * Math.PI * 1.5 + Math.PI;
}

export function drawGauge(
  ctx: CanvasRenderingContext2D,
  view: GaugeView,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const cx = width / 2;
  const cy = height * 0.7;
  const radius = Math.min(width, height) * 0.42;

  const bands: Array<[number, number, string]> = [
    [GAUGE_MIN_DEG, view.openUpTo, "open"],
    [view.openUpTo, view.closeFrom, "neutral"],
    [view.closeFrom, GAUGE_MAX_DEG, "close"],
  ];
  for (const [from, to, region] of bands) {
    ctx.beginPath();
    ctx.arc(cx, cy, radius, angleToRad(from), angleToRad(to), true);
    ctx.lineWidth = view.activeRegion === region ? 22 : 12;
    ctx.strokeStyle = REGION_COLORS[region];
    ctx.globalAlpha = view.activeRegion === region ? 1.0 : 0.45;
    ctx.stroke();
  }
  ctx.globalAlpha = 1.0;

  if (view.needleDeg !== null) {
    const clamped = Math.max(GAUGE_MIN_DEG, Math.min(GAUGE_MAX_DEG, view.needleDeg));
    const rad = angleToRad(clamped);
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + Math.cos(rad) * radius * 0.9, cy + Math.sin(rad) * radius * 0.9);
    ctx.lineWidth = 3;
    ctx.strokeStyle = view.disconnected ? "#777" : "#e8e8e8";
    ctx.stroke();
  }

  ctx.font = "14px system-ui, sans-serif";
  ctx.fillStyle = "#cfcfcf";
  ctx.textAlign = "center";
  const label =
    view.needleDeg === null ? "--" : `${view.needleDeg.toFixed(1)}°`;
  ctx.fillText(label, cx, cy + 24);
  if (view.disconnected) {
    ctx.fillStyle = "#d9534f";
    ctx.fillText("disconnected", cx, 18);
  }
}
