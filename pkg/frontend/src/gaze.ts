// Pointer-as-gaze: resample the pointer track at the eye-tracker rate.
//
// Pointer events arrive whenever the browser feels like it; the gateway
// expects a 120 Hz gaze stream. The sampler linearly interpolates between
// the last two pointer observations and emits samples on a fixed 120 Hz
// lattice, so the published stream looks like eye-tracker output no matter
// the event cadence.

export const GAZE_RATE_HZ = 120;

export interface GazeSampleOut {
  t: number; // seconds on the caller's clock
  x: number;
  y: number;
  valid: boolean;
}

export class PointerGazeSampler {
  private prev: { t: number; x: number; y: number } | null = null;
  private latest: { t: number; x: number; y: number } | null = null;
  private nextSampleT: number | null = null;

  /** New pointer observation at time `t` seconds. */
  observe(t: number, x: number, y: number): void {
    this.prev = this.latest;
    this.latest = { t, x, y };
    if (this.nextSampleT === null) {
      this.nextSampleT = t;
    }
  }

  /** Pointer left the surface: following samples are invalid until it returns. */
  invalidate(): void {
    this.prev = null;
    this.latest = null;
  }

  /**
   * Emit every 120 Hz sample due up to time `now`, interpolating between
   * the two most recent pointer observations (holding the last position
   * when the pointer is idle).
   */
  sampleUpTo(now: number): GazeSampleOut[] {
    if (this.latest === null || this.nextSampleT === null) {
      return [];
    }
    const out: GazeSampleOut[] = [];
    const period = 1 / GAZE_RATE_HZ;
    while (this.nextSampleT <= now) {
      const t = this.nextSampleT;
      out.push({ t, ...this.positionAt(t), valid: true });
      this.nextSampleT += period;
    }
    return out;
  }

  private positionAt(t: number): { x: number; y: number } {
    const b = this.latest!;
    const a = this.prev;
    if (a === null || b.t <= a.t || t >= b.t) {
      return { x: b.x, y: b.y };
    }
    if (t <= a.t) {
      return { x: a.x, y: a.y };
    }
    const frac = (t - a.t) / (b.t - a.t);
    return { x: a.x + frac * (b.x - a.x), y: a.y + frac * (b.y - a.y) };
  }
}
