// Console view state, built exclusively from bridge messages so that a
// replayed log renders exactly like the live run did.

import {
  BridgeMessage,
  OverlayMode,
  RobotStatePayload,
  RobotView,
  STALE_SECONDS,
  TRAIL_SECONDS,
} from "./types";

export interface SelectionMarker {
  x: number;
  y: number;
  region: number | null;
  t: number;
}

export interface SsvepResult {
  region: number;
  probabilities: number[];
}

export class ViewState {
  robots = new Map<number, RobotView>();
  clock = 0; // latest sim time seen, seconds
  tick = 0;
  mode = "idle";
  modeDetail: Record<string, unknown> = {};
  ssvep: SsvepResult | null = null;
  activeGesture: string | null = null;
  gazePath: Array<[number, number]> | null = null;
  gazePathLength = 0;
  gazeError: string | null = null;
  selections: SelectionMarker[] = [];
  overlay: OverlayMode = "none";

  apply(msg: BridgeMessage): void {
    this.clock = Math.max(this.clock, msg.t / 1e6);
    const parts = msg.topic.split("/");
    if (parts[0] === "robot" && parts[2] === "state") {
      this.applyRobotState(Number(parts[1]), msg.payload as RobotStatePayload);
    } else if (msg.topic === "sim/tick") {
      const p = msg.payload as { tick: number; t: number };
      this.tick = p.tick;
    } else if (msg.topic === "swarm/mode") {
      const p = msg.payload as { mode: string; detail: Record<string, unknown> };
      this.mode = p.mode;
      this.modeDetail = p.detail;
    } else if (msg.topic === "intent/ssvep") {
      const p = msg.payload as { region: number; probabilities: number[] };
      this.ssvep = { region: p.region, probabilities: p.probabilities };
    } else if (msg.topic === "intent/emg") {
      const p = msg.payload as { gesture: string };
      this.activeGesture = p.gesture;
    } else if (msg.topic === "intent/gaze/path") {
      const p = msg.payload as { knots: Array<[number, number]>; length: number };
      this.gazePath = p.knots;
      this.gazePathLength = p.length;
      this.gazeError = null;
    } else if (msg.topic === "intent/gaze/error") {
      this.gazeError = (msg.payload as { error: string }).error;
    } else if (msg.topic === "intent/gaze/selection") {
      const p = msg.payload as { x: number; y: number; region: number | null; t: number };
      this.selections.push({ x: p.x, y: p.y, region: p.region, t: this.clock });
      if (this.selections.length > 8) {
        this.selections.shift();
      }
    }
  }

  private applyRobotState(id: number, p: RobotStatePayload): void {
    let robot = this.robots.get(id);
    if (robot === undefined) {
      robot = { id, x: p.x, y: p.y, theta: p.theta, lastSeen: p.t, trail: [] };
      this.robots.set(id, robot);
    }
    robot.x = p.x;
    robot.y = p.y;
    robot.theta = p.theta;
    robot.lastSeen = p.t;
    robot.trail.push({ t: p.t, x: p.x, y: p.y });
    const cutoff = p.t - TRAIL_SECONDS;
    while (robot.trail.length > 0 && robot.trail[0].t < cutoff) {
      robot.trail.shift();
    }
  }

  /** Robots ordered by id, with staleness judged against the sim clock. */
  robotList(): Array<RobotView & { stale: boolean }> {
    const list = [...this.robots.values()].sort((a, b) => a.id - b.id);
    return list.map((r) => ({ ...r, stale: this.clock - r.lastSeen > STALE_SECONDS }));
  }
}
