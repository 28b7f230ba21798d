// Input panels: each operator action funnels through one builder into one
// bus.send call, so nothing can double-fire.

import { PointerGazeSampler } from "./gaze";
import {
  gazeCaptureMessage,
  gazeSampleMessage,
  gestureMessage,
  ssvepEpochMessage,
  touchMessage,
} from "./messages";
import { Gesture, GESTURES, UiMessage } from "./types";

/** The only capability panels need from the bus. */
export interface Publisher {
  send(msg: UiMessage): boolean;
}

export class TouchInput {
  private nextId = 1;
  private activeId: number | null = null;

  constructor(private bus: Publisher) {}

  down(x: number, y: number): void {
    this.activeId = this.nextId++;
    this.bus.send(touchMessage(this.activeId, x, y, true));
  }

  move(x: number, y: number): void {
    if (this.activeId !== null) {
      this.bus.send(touchMessage(this.activeId, x, y, true));
    }
  }

  up(x: number, y: number): void {
    if (this.activeId !== null) {
      this.bus.send(touchMessage(this.activeId, x, y, false));
      this.activeId = null;
    }
  }
}

export class SsvepPanel {
  snr = 10.0;

  constructor(private bus: Publisher) {}

  clickCell(region: number): void {
    this.bus.send(ssvepEpochMessage(region, this.snr));
  }
}

const KEY_GESTURES: Record<string, Gesture> = {
  " ": "stop",
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
};

export class GesturePanel {
  constructor(private bus: Publisher) {}

  press(gesture: Gesture): void {
    this.bus.send(gestureMessage(gesture));
  }

  /** Returns true when the key maps to a gesture (and was published). */
  key(key: string): boolean {
    const gesture = KEY_GESTURES[key];
    if (gesture === undefined) {
      return false;
    }
    this.press(gesture);
    return true;
  }

  gestures(): readonly Gesture[] {
    return GESTURES;
  }
}

export class GazePanel {
  capturing = false;
  raw: Array<[number, number]> = [];
  private sampler = new PointerGazeSampler();

  constructor(private bus: Publisher) {}

  pointer(t: number, x: number, y: number): void {
    this.sampler.observe(t, x, y);
  }

  pointerLeft(): void {
    this.sampler.invalidate();
  }

  /** Called from the render loop; flushes all due 120 Hz samples. */
  tick(now: number): number {
    const samples = this.sampler.sampleUpTo(now);
    for (const s of samples) {
      this.bus.send(gazeSampleMessage(s.t, s.x, s.y, s.valid));
      if (this.capturing) {
        this.raw.push([s.x, s.y]);
      }
    }
    return samples.length;
  }

  startCapture(): void {
    if (!this.capturing) {
      this.capturing = true;
      this.raw = [];
      this.bus.send(gazeCaptureMessage("start"));
    }
  }

  stopCapture(): void {
    if (this.capturing) {
      this.capturing = false;
      this.bus.send(gazeCaptureMessage("stop"));
    }
  }
}
