// Console entry point: DOM wiring, the render loop, and the ws connection.

import { GatewayBus } from "./bus";
import { ViewState } from "./model";
import { GazePanel, GesturePanel, SsvepPanel, TouchInput } from "./panels";
import { fieldTransform, render, toField } from "./render";
import { FIELD, GRID, OverlayMode } from "./types";

const WS_URL = `ws://${location.hostname}:7789`;

type InputMode = "touch" | "ssvep" | "gaze";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("field");
  const ctx = canvas.getContext("2d")!;
  const state = new ViewState();
  const bus = new GatewayBus(WS_URL);

  const touch = new TouchInput(bus);
  const ssvep = new SsvepPanel(bus);
  const gestures = new GesturePanel(bus);
  const gaze = new GazePanel(bus);

  let inputMode: InputMode = "touch";
  const overlayFor: Record<InputMode, OverlayMode> = {
    touch: "none",
    ssvep: "ssvep-grid",
    gaze: "trajectory",
  };

  // ---- status banner + toasts ------------------------------------------
  const banner = el<HTMLDivElement>("banner");
  bus.onStatus = (status) => {
    banner.textContent = status === "open" ? "" : `link ${status}...`;
    banner.className = status === "open" ? "banner hidden" : "banner";
  };
  const toast = el<HTMLDivElement>("toast");
  let toastTimer: ReturnType<typeof setTimeout> | null = null;
  const showToast = (text: string) => {
    toast.textContent = text;
    toast.className = "toast";
    if (toastTimer !== null) clearTimeout(toastTimer);
    toastTimer = setTimeout(() => (toast.className = "toast hidden"), 4000);
  };
  bus.onError = showToast;

  bus.onMessage = (msg) => {
    state.apply(msg);
    if (msg.topic === "intent/gaze/error") {
      showToast(`trajectory rejected: ${(msg.payload as { error: string }).error}`);
    }
  };
  bus.connect();

  // ---- mode switching ----------------------------------------------------
  const modeButtons: Record<InputMode, HTMLButtonElement> = {
    touch: el("mode-touch"),
    ssvep: el("mode-ssvep"),
    gaze: el("mode-gaze"),
  };
  const setMode = (mode: InputMode) => {
    inputMode = mode;
    for (const [name, button] of Object.entries(modeButtons)) {
      button.className = name === mode ? "active" : "";
    }
    el<HTMLDivElement>("gaze-controls").style.display = mode === "gaze" ? "" : "none";
    el<HTMLDivElement>("ssvep-controls").style.display = mode === "ssvep" ? "" : "none";
  };
  for (const mode of Object.keys(modeButtons) as InputMode[]) {
    modeButtons[mode].addEventListener("click", () => setMode(mode));
  }
  setMode("touch");

  // ---- gesture buttons + keyboard ---------------------------------------
  const gestureRow = el<HTMLDivElement>("gestures");
  for (const gesture of gestures.gestures()) {
    const button = document.createElement("button");
    button.textContent = gesture;
    button.addEventListener("click", () => gestures.press(gesture));
    gestureRow.appendChild(button);
  }
  window.addEventListener("keydown", (event) => {
    if (gestures.key(event.key)) {
      event.preventDefault();
    }
  });

  // ---- ssvep snr slider ---------------------------------------------------
  const snrSlider = el<HTMLInputElement>("snr");
  const snrValue = el<HTMLSpanElement>("snr-value");
  const syncSnr = () => {
    ssvep.snr = Number(snrSlider.value);
    snrValue.textContent = snrSlider.value;
  };
  snrSlider.addEventListener("input", syncSnr);
  syncSnr();

  // ---- gaze capture buttons ----------------------------------------------
  el<HTMLButtonElement>("capture-start").addEventListener("click", () => gaze.startCapture());
  el<HTMLButtonElement>("capture-stop").addEventListener("click", () => gaze.stopCapture());

  // ---- pointer routing -----------------------------------------------------
  const fieldPoint = (event: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    const tf = fieldTransform(canvas.width, canvas.height);
    const [x, y] = toField(tf, event.clientX - rect.left, event.clientY - rect.top);
    return [Math.min(Math.max(x, 0), FIELD.width), Math.min(Math.max(y, 0), FIELD.height)];
  };
  let pointerDown = false;
  canvas.addEventListener("pointerdown", (event) => {
    pointerDown = true;
    const [x, y] = fieldPoint(event);
    if (inputMode === "touch") {
      touch.down(x, y);
    } else if (inputMode === "ssvep") {
      const col = Math.min(Math.floor((x / FIELD.width) * GRID.cols), GRID.cols - 1);
      const row = Math.min(Math.floor((y / FIELD.height) * GRID.rows), GRID.rows - 1);
      ssvep.clickCell(row * GRID.cols + col + 1);
    }
  });
  canvas.addEventListener("pointermove", (event) => {
    const [x, y] = fieldPoint(event);
    if (inputMode === "touch" && pointerDown) {
      touch.move(x, y);
    } else if (inputMode === "gaze") {
      gaze.pointer(performance.now() / 1000, x, y);
    }
  });
  canvas.addEventListener("pointerup", (event) => {
    pointerDown = false;
    if (inputMode === "touch") {
      touch.up(...fieldPoint(event));
    }
  });
  canvas.addEventListener("pointerleave", () => {
    pointerDown = false;
    gaze.pointerLeft();
  });

  // ---- render loop ----------------------------------------------------------
  const fps = el<HTMLSpanElement>("fps");
  const modeLabel = el<HTMLSpanElement>("swarm-mode");
  const commandLabel = el<HTMLSpanElement>("command");
  let frames = 0;
  let fpsWindowStart = performance.now();

  const frame = () => {
    const nowS = performance.now() / 1000;
    if (inputMode === "gaze") {
      gaze.tick(nowS);
    }
    render(ctx, canvas.width, canvas.height, state, {
      overlay: overlayFor[inputMode],
      wallTime: nowS,
      rawGaze: gaze.raw,
      snr: ssvep.snr,
    });
    modeLabel.textContent = state.mode;
    commandLabel.textContent = state.activeGesture ?? "-";
    frames += 1;
    const elapsed = performance.now() - fpsWindowStart;
    if (elapsed >= 1000) {
      fps.textContent = `${((frames * 1000) / elapsed).toFixed(0)} fps`;
      frames = 0;
      fpsWindowStart = performance.now();
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

window.addEventListener("load", main);
