// Canvas renderer. Pure over (state, pixel size, wall time): identical
// inputs draw identical frames, which makes live-vs-replay equivalence a
// testable property. Wall time only drives the flicker phase of the
// stimulation grid overlay.

import { ViewState } from "./model";
import { FIELD, GRID, regionFrequency } from "./types";

export interface FieldTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fieldTransform(pxWidth: number, pxHeight: number): FieldTransform {
  const scale = Math.min(pxWidth / FIELD.width, pxHeight / FIELD.height);
  return {
    scale,
    offsetX: (pxWidth - FIELD.width * scale) / 2,
    offsetY: (pxHeight - FIELD.height * scale) / 2,
  };
}

export function toPx(tf: FieldTransform, x: number, y: number): [number, number] {
  return [tf.offsetX + x * tf.scale, tf.offsetY + y * tf.scale];
}

export function toField(tf: FieldTransform, px: number, py: number): [number, number] {
  return [(px - tf.offsetX) / tf.scale, (py - tf.offsetY) / tf.scale];
}

export function clampToField(x: number, y: number): [number, number] {
  return [
    Math.min(Math.max(x, 0), FIELD.width),
    Math.min(Math.max(y, 0), FIELD.height),
  ];
}

const ROBOT_RADIUS_M = 0.055;

export interface RenderOptions {
  overlay: "none" | "ssvep-grid" | "trajectory";
  wallTime: number; // seconds, drives flicker only
  rawGaze?: Array<[number, number]>;
  snr?: number;
}

/**
 * Draw one frame. `ctx` only needs the 2D-context subset used here, so the
 * tests can pass a recording fake.
 */
export function render(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: ViewState,
  opts: RenderOptions,
): void {
  const tf = fieldTransform(width, height);
  ctx.clearRect(0, 0, width, height);

  // field background and border
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);
  const [fx, fy] = toPx(tf, 0, 0);
  ctx.fillStyle = "#1b2330";
  ctx.fillRect(fx, fy, FIELD.width * tf.scale, FIELD.height * tf.scale);
  ctx.strokeStyle = "#3a4a60";
  ctx.strokeRect(fx, fy, FIELD.width * tf.scale, FIELD.height * tf.scale);

  drawGrid(ctx, tf, state, opts);

  if (opts.overlay === "trajectory") {
    drawTrajectory(ctx, tf, state, opts.rawGaze ?? []);
  }

  for (const marker of state.selections) {
    const [mx, my] = toPx(tf, ...clampToField(marker.x, marker.y));
    ctx.strokeStyle = "#e8c545";
    ctx.beginPath();
    ctx.arc(mx, my, 8, 0, 2 * Math.PI);
    ctx.stroke();
  }

  for (const robot of state.robotList()) {
    drawRobot(ctx, tf, robot);
  }
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  tf: FieldTransform,
  state: ViewState,
  opts: RenderOptions,
): void {
  const cellW = (FIELD.width / GRID.cols) * tf.scale;
  const cellH = (FIELD.height / GRID.rows) * tf.scale;
  for (let row = 0; row < GRID.rows; row++) {
    for (let col = 0; col < GRID.cols; col++) {
      const region = row * GRID.cols + col + 1;
      const [cx, cy] = toPx(tf, (col * FIELD.width) / GRID.cols, (row * FIELD.height) / GRID.rows);
      if (opts.overlay === "ssvep-grid") {
        // best-effort flicker at the region's stimulus frequency
        const on = Math.sin(2 * Math.PI * regionFrequency(region) * opts.wallTime) > 0;
        ctx.fillStyle = on ? "#f2f4f8" : "#2a3546";
        ctx.fillRect(cx + 1, cy + 1, cellW - 2, cellH - 2);
        ctx.fillStyle = on ? "#10141a" : "#8fa2bd";
        ctx.fillText(String(region), cx + 4, cy + 12);
        if (state.ssvep !== null && state.ssvep.region === region) {
          ctx.strokeStyle = "#45e87a";
          ctx.strokeRect(cx + 1, cy + 1, cellW - 2, cellH - 2);
          const prob = state.ssvep.probabilities[region - 1];
          ctx.fillStyle = "#45e87a";
          ctx.fillText(prob.toFixed(2), cx + 4, cy + cellH - 6);
        }
      } else {
        ctx.strokeStyle = "#242e3e";
        ctx.strokeRect(cx, cy, cellW, cellH);
      }
    }
  }
}

function drawTrajectory(
  ctx: CanvasRenderingContext2D,
  tf: FieldTransform,
  state: ViewState,
  rawGaze: Array<[number, number]>,
): void {
  ctx.fillStyle = "#5f6f8a";
  for (const [x, y] of rawGaze) {
    const [px, py] = toPx(tf, ...clampToField(x, y));
    ctx.fillRect(px - 1, py - 1, 2, 2);
  }
  if (state.gazePath !== null && state.gazePath.length >= 2) {
    ctx.strokeStyle = "#45c6e8";
    ctx.beginPath();
    const [sx, sy] = toPx(tf, ...clampToField(...state.gazePath[0]));
    ctx.moveTo(sx, sy);
    for (const [x, y] of state.gazePath.slice(1)) {
      const [px, py] = toPx(tf, ...clampToField(x, y));
      ctx.lineTo(px, py);
    }
    ctx.stroke();
  }
}

function drawRobot(
  ctx: CanvasRenderingContext2D,
  tf: FieldTransform,
  robot: { id: number; x: number; y: number; theta: number; stale: boolean; trail: Array<{ x: number; y: number }> },
): void {
  // trail first, glyph on top; everything clamped into the field rect
  if (robot.trail.length >= 2) {
    ctx.strokeStyle = robot.stale ? "#3c3f45" : "#2e7d4f";
    ctx.beginPath();
    const [tx, ty] = toPx(tf, ...clampToField(robot.trail[0].x, robot.trail[0].y));
    ctx.moveTo(tx, ty);
    for (const p of robot.trail.slice(1)) {
      const [px, py] = toPx(tf, ...clampToField(p.x, p.y));
      ctx.lineTo(px, py);
    }
    ctx.stroke();
  }
  const [x, y] = clampToField(robot.x, robot.y);
  const [px, py] = toPx(tf, x, y);
  const r = ROBOT_RADIUS_M * tf.scale;
  ctx.fillStyle = robot.stale ? "#55585e" : "#4f9de8";
  ctx.beginPath();
  ctx.arc(px, py, r, 0, 2 * Math.PI);
  ctx.fill();
  // heading tick
  ctx.strokeStyle = "#e8eef7";
  ctx.beginPath();
  ctx.moveTo(px, py);
  ctx.lineTo(px + r * Math.cos(robot.theta), py + r * Math.sin(robot.theta));
  ctx.stroke();
  ctx.fillStyle = "#e8eef7";
  ctx.fillText(String(robot.id), px + r + 2, py - r - 2);
}
