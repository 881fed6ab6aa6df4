// Strip charts over the view model's ring buffers: plain canvas polylines,
// monotone in simulation time by construction.

import { RingBuffer } from "./viewmodel.js";

export interface ChartStyle {
  color: string;
  yMin: number;
  yMax: number;
  label: string;
  guides?: number[];
}

export function drawStripChart(
  ctx: CanvasRenderingContext2D,
  buffer: RingBuffer,
  style: ChartStyle,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const pts = buffer.points();
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillStyle = "#9aa0a6";
  ctx.textAlign = "left";
  ctx.fillText(style.label, 6, 14);
  if (pts.length === 0) return;

  const tEnd = pts[pts.length - 1].t;
  const tStart = tEnd - buffer.spanSeconds;
  const x = (t: number) => ((t - tStart) / buffer.spanSeconds) * width;
  const y = (v: number) =>
    height - ((v - style.yMin) / (style.yMax - style.yMin)) * height;

  for (const guide of style.guides ?? []) {
    ctx.strokeStyle = "#3a3f45";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(0, y(guide));
    ctx.lineTo(width, y(guide));
    ctx.stroke();
  }

  ctx.strokeStyle = style.color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const px = x(p.t);
    const py = Math.max(0, Math.min(height, y(p.value)));
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}
