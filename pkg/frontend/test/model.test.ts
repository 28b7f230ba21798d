import { describe, expect, it } from "vitest";

import { ViewState } from "../src/model";
import { BridgeMessage } from "../src/types";

function stateMsg(id: number, t: number, x: number, y = 0.5, theta = 0): BridgeMessage {
  return {
    topic: `robot/${id}/state`,
    t: Math.round(t * 1e6),
    payload: { x, y, theta, vx: 0, vy: 0, w: 0, t },
  };
}

describe("view state", () => {
  it("tracks robot poses and ids", () => {
    const vs = new ViewState();
    vs.apply(stateMsg(1, 0.02, 0.5));
    vs.apply(stateMsg(2, 0.02, 1.0));
    vs.apply(stateMsg(1, 0.04, 0.52));
    const robots = vs.robotList();
    expect(robots.map((r) => r.id)).toEqual([1, 2]);
    expect(robots[0].x).toBeCloseTo(0.52);
  });

  it("prunes trails to two seconds", () => {
    const vs = new ViewState();
    for (let k = 0; k < 300; k++) {
      vs.apply(stateMsg(1, k * 0.02, 0.5 + k * 0.001));
    }
    const robot = vs.robotList()[0];
    const span = robot.trail[robot.trail.length - 1].t - robot.trail[0].t;
    expect(span).toBeLessThanOrEqual(2.0 + 1e-9);
    expect(robot.trail.length).toBeGreaterThan(90);
  });

  it("marks robots stale after half a second of silence", () => {
    const vs = new ViewState();
    vs.apply(stateMsg(1, 0.1, 0.5));
    vs.apply(stateMsg(2, 0.1, 1.0));
    // robot 2 keeps reporting, robot 1 goes quiet
    for (let k = 1; k <= 40; k++) {
      vs.apply(stateMsg(2, 0.1 + k * 0.02, 1.0));
    }
    const robots = vs.robotList();
    expect(robots.find((r) => r.id === 1)!.stale).toBe(true);
    expect(robots.find((r) => r.id === 2)!.stale).toBe(false);
  });

  it("applies intents and mode changes", () => {
    const vs = new ViewState();
    vs.apply({
      topic: "swarm/mode",
      t: 1000,
      payload: { mode: "common-velocity", detail: { gesture: "up" } },
    });
    vs.apply({
      topic: "intent/emg",
      t: 2000,
      payload: { gesture: "up", scores: [0, 1, 0, 0, 0], t: 0.5 },
    });
    vs.apply({
      topic: "intent/ssvep",
      t: 3000,
      payload: { epoch: 1, region: 26, probabilities: Array(40).fill(0.025), correlations: [] },
    });
    vs.apply({
      topic: "intent/gaze/path",
      t: 4000,
      payload: { knots: [[0.1, 0.2], [0.3, 0.4]], length: 0.28 },
    });
    expect(vs.mode).toBe("common-velocity");
    expect(vs.activeGesture).toBe("up");
    expect(vs.ssvep!.region).toBe(26);
    expect(vs.gazePath!.length).toBe(2);
  });

  it("gaze errors clear when a path arrives", () => {
    const vs = new ViewState();
    vs.apply({ topic: "intent/gaze/error", t: 1, payload: { error: "too short" } });
    expect(vs.gazeError).toBe("too short");
    vs.apply({ topic: "intent/gaze/path", t: 2, payload: { knots: [[0, 0]], length: 0 } });
    expect(vs.gazeError).toBeNull();
  });

  it("replay builds the identical state as live (single code path)", () => {
    const stream: BridgeMessage[] = [];
    for (let k = 0; k < 100; k++) {
      stream.push(stateMsg(1, k * 0.02, 0.5 + 0.002 * k, 0.5 + 0.001 * k, k * 0.01));
      if (k % 10 === 0) {
        stream.push({ topic: "sim/tick", t: k * 20000, payload: { tick: k, t: k * 0.02 } });
      }
    }
    stream.push({
      topic: "intent/gaze/selection",
      t: 2_000_000,
      payload: { t: 2.0, x: 1.1, y: 0.6, region: 12 },
    });

    const live = new ViewState();
    const replayed = new ViewState();
    for (const msg of stream) live.apply(msg);
    for (const msg of stream) replayed.apply(msg);
    expect(JSON.stringify(replayed)).toEqual(JSON.stringify(live));
    expect(replayed.robotList()).toEqual(live.robotList());
  });
});
