// Builders for every message the console can publish. Each operator action
// funnels through exactly one builder call, which is what keeps the
// action-to-topic mapping single-fire and testable.

import { Gesture, GESTURES, UiMessage } from "./types";

export function touchMessage(id: number, x: number, y: number, down: boolean): UiMessage {
  return { topic: "ui/touch", payload: { id, x, y, down } };
}

export function ssvepEpochMessage(region: number, snr: number): UiMessage {
  if (!Number.isInteger(region) || region < 1 || region > 40) {
    throw new Error(`region must be 1..40, got ${region}`);
  }
  if (!(snr >= 0)) {
    throw new Error(`snr must be >= 0, got ${snr}`);
  }
  return { topic: "ui/ssvep/epoch", payload: { region, snr } };
}

export function gestureMessage(gesture: Gesture): UiMessage {
  if (!GESTURES.includes(gesture)) {
    throw new Error(`unknown gesture ${gesture}`);
  }
  return { topic: "ui/emg/gesture", payload: { gesture } };
}

export function gazeSampleMessage(t: number, x: number, y: number, valid: boolean): UiMessage {
  return { topic: "ui/gaze", payload: { t, x, y, valid } };
}

export function gazeCaptureMessage(action: "start" | "stop"): UiMessage {
  if (action !== "start" && action !== "stop") {
    throw new Error(`capture action must be start or stop`);
  }
  return { topic: "ui/gaze/capture", payload: { action } };
}
