import { describe, expect, it } from "vitest";

import { GAZE_RATE_HZ, PointerGazeSampler } from "../src/gaze";

describe("pointer-as-gaze resampling", () => {
  it("emits 120 samples per second of pointer presence", () => {
    const sampler = new PointerGazeSampler();
    sampler.observe(0.0, 0.5, 0.5);
    const samples = sampler.sampleUpTo(1.0);
    expect(samples.length).toBe(GAZE_RATE_HZ + 1); // inclusive lattice from t=0
    expect(samples.every((s) => s.valid)).toBe(true);
  });

  it("interpolates linearly between pointer events", () => {
    const sampler = new PointerGazeSampler();
    sampler.observe(0.0, 0.0, 0.0);
    sampler.sampleUpTo(0.0);
    sampler.observe(0.1, 1.0, 0.5);
    const samples = sampler.sampleUpTo(0.1);
    const mid = samples[Math.floor(samples.length / 2)];
    expect(mid.x).toBeGreaterThan(0.2);
    expect(mid.x).toBeLessThan(0.8);
    expect(mid.y).toBeCloseTo(mid.x / 2, 5);
    const last = samples[samples.length - 1];
    expect(last.x).toBeCloseTo(1.0, 3);
  });

  it("holds the last position while the pointer is idle", () => {
    const sampler = new PointerGazeSampler();
    sampler.observe(0.0, 0.3, 0.4);
    sampler.sampleUpTo(0.5);
    const more = sampler.sampleUpTo(1.0);
    expect(more.length).toBeGreaterThan(50);
    expect(more.every((s) => s.x === 0.3 && s.y === 0.4)).toBe(true);
  });

  it("timestamps are strictly increasing on the 120 Hz lattice", () => {
    const sampler = new PointerGazeSampler();
    sampler.observe(0.0, 0, 0);
    sampler.observe(0.013, 0.1, 0);
    sampler.observe(0.021, 0.2, 0);
    const samples = sampler.sampleUpTo(0.5);
    for (let i = 1; i < samples.length; i++) {
      expect(samples[i].t - samples[i - 1].t).toBeCloseTo(1 / GAZE_RATE_HZ, 9);
    }
  });

  it("emits nothing before the first pointer event or after invalidate", () => {
    const sampler = new PointerGazeSampler();
    expect(sampler.sampleUpTo(5.0)).toEqual([]);
    sampler.observe(0.0, 0.1, 0.1);
    sampler.sampleUpTo(0.1);
    sampler.invalidate();
    expect(sampler.sampleUpTo(1.0)).toEqual([]);
  });
});
