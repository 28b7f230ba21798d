// Single-fire contract: each operator action publishes exactly one message.

import { describe, expect, it } from "vitest";

import { GazePanel, GesturePanel, Publisher, SsvepPanel, TouchInput } from "../src/panels";
import { UiMessage } from "../src/types";

class FakeBus implements Publisher {
  sent: UiMessage[] = [];
  send(msg: UiMessage): boolean {
    this.sent.push(msg);
    return true;
  }
}

describe("touch input", () => {
  it("down/move/up publish one message each with a stable id", () => {
    const bus = new FakeBus();
    const touch = new TouchInput(bus);
    touch.down(0.5, 0.5);
    touch.move(0.6, 0.5);
    touch.up(0.6, 0.5);
    expect(bus.sent.length).toBe(3);
    const ids = bus.sent.map((m) => m.payload.id);
    expect(new Set(ids).size).toBe(1);
    expect(bus.sent.map((m) => m.payload.down)).toEqual([true, true, false]);
  });

  it("moves without a press publish nothing", () => {
    const bus = new FakeBus();
    const touch = new TouchInput(bus);
    touch.move(0.5, 0.5);
    touch.up(0.5, 0.5);
    expect(bus.sent).toEqual([]);
  });

  it("each press gets a fresh id", () => {
    const bus = new FakeBus();
    const touch = new TouchInput(bus);
    touch.down(0.1, 0.1);
    touch.up(0.1, 0.1);
    touch.down(0.2, 0.2);
    expect(bus.sent[0].payload.id).not.toEqual(bus.sent[2].payload.id);
  });
});

describe("ssvep panel", () => {
  it("one click publishes one epoch with the slider snr", () => {
    const bus = new FakeBus();
    const panel = new SsvepPanel(bus);
    panel.snr = 2.5;
    panel.clickCell(26);
    expect(bus.sent).toEqual([
      { topic: "ui/ssvep/epoch", payload: { region: 26, snr: 2.5 } },
    ]);
  });
});

describe("gesture panel", () => {
  it("keyboard bindings map to commands", () => {
    const bus = new FakeBus();
    const panel = new GesturePanel(bus);
    expect(panel.key("ArrowUp")).toBe(true);
    expect(panel.key(" ")).toBe(true);
    expect(panel.key("q")).toBe(false);
    expect(bus.sent.map((m) => m.payload.gesture)).toEqual(["up", "stop"]);
  });
});

describe("gaze panel", () => {
  it("capture start/stop are idempotent single-fire markers", () => {
    const bus = new FakeBus();
    const panel = new GazePanel(bus);
    panel.startCapture();
    panel.startCapture();
    panel.stopCapture();
    panel.stopCapture();
    expect(bus.sent.map((m) => [m.topic, m.payload.action])).toEqual([
      ["ui/gaze/capture", "start"],
      ["ui/gaze/capture", "stop"],
    ]);
  });

  it("pointer motion streams 120 Hz samples and records raw capture points", () => {
    const bus = new FakeBus();
    const panel = new GazePanel(bus);
    panel.startCapture();
    panel.pointer(0.0, 0.5, 0.5);
    panel.pointer(0.5, 1.0, 0.5);
    const emitted = panel.tick(0.5);
    expect(emitted).toBeGreaterThan(55);
    const gazeMsgs = bus.sent.filter((m) => m.topic === "ui/gaze");
    expect(gazeMsgs.length).toBe(emitted);
    expect(panel.raw.length).toBe(emitted);
    panel.stopCapture();
    expect(bus.sent[bus.sent.length - 1].topic).toBe("ui/gaze/capture");
  });
});
