// Canvas rendering: dual RPM trace with attack/obstacle shading, and a
// small utilization sparkline. Pure draw functions; no state of their own.

import { UiSessionState } from "./session";

const TARGET_COLOR = "#3b82f6"; // target rpm: blue
const ACTUAL_COLOR = "#22c55e"; // actual rpm: green, dashed
const ATTACK_FILL = "rgba(239, 68, 68, 0.15)";
const ATTACK_EDGE = "#ef4444";
const OBSTACLE_FILL = "rgba(250, 204, 21, 0.25)";

export function drawRpmTraces(ctx: CanvasRenderingContext2D, w: number, h: number,
                              state: UiSessionState): void {
  ctx.clearRect(0, 0, w, h);
  const times = state.actualRpm.times;
  if (times.length < 2) return;
  const t1 = times[times.length - 1];
  const t0 = Math.max(times[0], t1 - 60);
  const span = Math.max(t1 - t0, 1e-6);
  const rpmMax = Math.max(
    7000,
    ...state.targetRpm.values,
    ...state.actualRpm.values,
  ) * 1.05;

  const xOf = (t: number) => ((t - t0) / span) * w;
  const yOf = (v: number) => h - (v / rpmMax) * (h - 8) - 4;

  // attack window shading with edge lines
  for (const spanMark of state.attackSpans) {
    const x0 = xOf(Math.max(spanMark.startS, t0));
    const x1 = xOf(spanMark.endS === null ? t1 : Math.min(spanMark.endS, t1));
    if (x1 < 0 || x0 > w) continue;
    ctx.fillStyle = ATTACK_FILL;
    ctx.fillRect(x0, 0, Math.max(x1 - x0, 1), h);
    ctx.strokeStyle = ATTACK_EDGE;
    ctx.beginPath();
    ctx.moveTo(x0, 0);
    ctx.lineTo(x0, h);
    if (spanMark.endS !== null && spanMark.endS <= t1) {
      ctx.moveTo(x1, 0);
      ctx.lineTo(x1, h);
    }
    ctx.stroke();
  }

  // obstacle presence shading: from each detection marker while the latest
  // telemetry still reports an obstacle, shade a thin band
  ctx.fillStyle = OBSTACLE_FILL;
  for (const marker of state.markers) {
    if (marker.kind !== "obstacle_detected") continue;
    if (marker.timeS > t1) continue;
    const x0 = xOf(Math.max(marker.timeS, t0));
    ctx.fillRect(x0, 0, w - x0, h);
  }

  drawLine(ctx, state.targetRpm.times, state.targetRpm.values, xOf, yOf,
           TARGET_COLOR, []);
  drawLine(ctx, state.actualRpm.times, state.actualRpm.values, xOf, yOf,
           ACTUAL_COLOR, [6, 4]);
}

function drawLine(ctx: CanvasRenderingContext2D, times: number[], values: number[],
                  xOf: (t: number) => number, yOf: (v: number) => number,
                  color: string, dash: number[]): void {
  if (times.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.6;
  ctx.setLineDash(dash);
  ctx.beginPath();
  ctx.moveTo(xOf(times[0]), yOf(values[0]));
  for (let i = 1; i < times.length; i++) {
    ctx.lineTo(xOf(times[i]), yOf(values[i]));
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

export function drawSparkline(ctx: CanvasRenderingContext2D, w: number, h: number,
                              times: number[], values: number[], vMax: number): void {
  ctx.clearRect(0, 0, w, h);
  if (times.length < 2) return;
  const t1 = times[times.length - 1];
  const t0 = Math.max(times[0], t1 - 60);
  const span = Math.max(t1 - t0, 1e-6);
  ctx.strokeStyle = "#94a3b8";
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let i = 0; i < times.length; i++) {
    const x = ((times[i] - t0) / span) * w;
    const y = h - Math.min(values[i] / vMax, 1) * (h - 2) - 1;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}
