// Shared message and view-state types for the console.

/** One frame from the gateway's WebSocket bridge. */
export interface BridgeMessage {
  topic: string;
  t: number; // microseconds since run start (sim time)
  payload?: unknown;
  payload_b64?: string;
}

/** Message the console publishes back to the gateway. */
export interface UiMessage {
  topic: string;
  payload: Record<string, unknown>;
}

export interface RobotStatePayload {
  x: number;
  y: number;
  theta: number;
  vx: number;
  vy: number;
  w: number;
  t: number;
}

export interface TrailPoint {
  t: number; // seconds, sim time
  x: number;
  y: number;
}

export interface RobotView {
  id: number;
  x: number;
  y: number;
  theta: number;
  lastSeen: number; // seconds, sim time
  trail: TrailPoint[];
}

export type OverlayMode = "none" | "ssvep-grid" | "trajectory";

export const FIELD = { width: 2.42, height: 1.36 };
export const GRID = { rows: 5, cols: 8 };

export const TRAIL_SECONDS = 2.0;
export const STALE_SECONDS = 0.5;

export const GESTURES = ["stop", "up", "down", "left", "right"] as const;
export type Gesture = (typeof GESTURES)[number];

/** Flicker frequency of 1-based region k: 8.0 + 0.2 * (k - 1) Hz. */
export function regionFrequency(region: number): number {
  return 8.0 + 0.2 * (region - 1);
}
