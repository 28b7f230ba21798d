"""Gaze intent: dwell-based point selection and smooth trajectory fitting.

The gaze stream is 120 Hz field-coordinate samples (the console pointer, or
the synthetic generator below). Dwelling inside a small radius for 0.8 s
selects a point/region; between explicit start/stop markers the stream is
captured and fitted into a C1 path: moving-average smoothing, uniform
arc-length resampling to knots, a centripetal Catmull-Rom spline through
the knots, and a 1 mm arc-length table for constant-speed sampling.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .world import RegionGrid

GAZE_RATE_HZ = 120.0
DWELL_RADIUS_M = 0.05
DWELL_HOLD_S = 0.8
DWELL_REFRACTORY_S = 1.0
DWELL_MAX_INVALID = 0.10

DEDUP_DISTANCE_M = 1e-3
SMOOTH_WINDOW = 9
MIN_FIT_POINTS = 4
TABLE_RESOLUTION_M = 1e-3
TREMOR_SIGMA_M = 0.002


class TrajectoryTooShort(ValueError):
    """Fewer than four usable points survived capture/dedup."""


@dataclass(frozen=True)
class GazeSample:
    t: float
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class SelectionEvent:
    """A dwell fired: centroid point plus the region it lands in (if any)."""

    t: float
    x: float
    y: float
    region: Optional[int] = None


class DwellDetector:
    """Sliding-window dwell detector over an ordered gaze stream.

    Fires when the window spans the hold time, invalid samples stay under
    the tolerated fraction, and every valid sample lies within the radius
    of the window centroid. After firing, new events are suppressed for the
    refractory period.
    """

    def __init__(
        self,
        radius: float = DWELL_RADIUS_M,
        hold: float = DWELL_HOLD_S,
        refractory: float = DWELL_REFRACTORY_S,
        max_invalid_frac: float = DWELL_MAX_INVALID,
        grid: Optional[RegionGrid] = None,
    ):
        self.radius = radius
        self.hold = hold
        self.refractory = refractory
        self.max_invalid_frac = max_invalid_frac
        self.grid = grid
        self._window: deque[GazeSample] = deque()
        self._last_event_t = -math.inf

    def push(self, sample: GazeSample) -> Optional[SelectionEvent]:
        window = self._window
        if window and sample.t < window[-1].t:
            raise ValueError("gaze samples must be time-ordered")
        window.append(sample)
        cutoff = sample.t - self.hold
        while window and window[0].t < cutoff:
            window.popleft()
        if sample.t - self._last_event_t < self.refractory:
            return None
        if not window or window[0].t > cutoff + 0.5 / GAZE_RATE_HZ:
            return None  # window does not span the hold time yet
        invalid = sum(1 for s in window if not s.valid)
        if invalid > self.max_invalid_frac * len(window):
            return None
        valid = [s for s in window if s.valid]
        if len(valid) < 2:
            return None
        cx = sum(s.x for s in valid) / len(valid)
        cy = sum(s.y for s in valid) / len(valid)
        if any(math.hypot(s.x - cx, s.y - cy) > self.radius for s in valid):
            return None
        self._last_event_t = sample.t
        window.clear()
        region = None
        if self.grid is not None and 0 <= cx <= self.grid.width and 0 <= cy <= self.grid.height:
            region = self.grid.region_of(cx, cy)
        return SelectionEvent(sample.t, cx, cy, region)


def capture_trajectory(
    samples: Iterable[GazeSample], start_t: float, stop_t: float
) -> np.ndarray:
    """Valid points inside [start, stop], consecutive near-duplicates dropped."""
    if stop_t <= start_t:
        raise ValueError("capture stop must come after start")
    points: list[tuple[float, float]] = []
    for s in samples:
        if not (s.valid and start_t <= s.t <= stop_t):
            continue
        if points and math.hypot(s.x - points[-1][0], s.y - points[-1][1]) < DEDUP_DISTANCE_M:
            continue
        points.append((s.x, s.y))
    if len(points) < MIN_FIT_POINTS:
        raise TrajectoryTooShort(
            f"only {len(points)} usable points captured; need {MIN_FIT_POINTS}"
        )
    return np.asarray(points)


def _moving_average(points: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    half = window // 2
    n = len(points)
    out = np.empty_like(points)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        out[i] = points[lo:hi].mean(axis=0)
    return out


def _resample_uniform(points: np.ndarray, count: int) -> np.ndarray:
    """Resample a polyline to `count` points uniformly spaced in chord length."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        raise TrajectoryTooShort("captured points are all coincident")
    targets = np.linspace(0.0, total, count)
    x = np.interp(targets, cum, points[:, 0])
    y = np.interp(targets, cum, points[:, 1])
    return np.column_stack([x, y])


def _catmull_rom_segment(p0, p1, p2, p3, n_samples: int, alpha: float = 0.5) -> np.ndarray:
    """Centripetal Catmull-Rom arc from p1 to p2 (p2 excluded)."""
    def tj(ti, a, b):
        d = float(np.linalg.norm(b - a))
        return ti + max(d, 1e-12) ** alpha

    t0 = 0.0
    t1 = tj(t0, p0, p1)
    t2 = tj(t1, p1, p2)
    t3 = tj(t2, p2, p3)
    t = np.linspace(t1, t2, n_samples, endpoint=False)[:, None]
    a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1
    a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2
    a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3
    b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2
    b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3
    return (t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2


@dataclass(frozen=True)
class FittedPath:
    """Arc-length parameterized smooth path through the resampled knots."""

    knots: np.ndarray        # K x 2 interpolated control points
    points: np.ndarray       # dense polyline, spacing <= table resolution
    arc_lengths: np.ndarray  # cumulative length per dense point

    @property
    def length(self) -> float:
        return float(self.arc_lengths[-1])

    def sample(self, s: float) -> tuple[np.ndarray, np.ndarray, bool]:
        """Point and unit tangent at arc length s; clamps and flags if s is
        outside [0, length]."""
        clamped = not (0.0 <= s <= self.length)
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.arc_lengths, s, side="right")) - 1
        i = min(max(i, 0), len(self.points) - 2)
        s0, s1 = self.arc_lengths[i], self.arc_lengths[i + 1]
        frac = 0.0 if s1 == s0 else (s - s0) / (s1 - s0)
        point = self.points[i] + frac * (self.points[i + 1] - self.points[i])
        direction = self.points[i + 1] - self.points[i]
        norm = float(np.linalg.norm(direction))
        if norm == 0:
            direction, norm = np.array([1.0, 0.0]), 1.0
        return point, direction / norm, clamped


def sample_path(path: FittedPath, s: float) -> tuple[np.ndarray, np.ndarray, bool]:
    return path.sample(s)


def path_from_knots(knots: np.ndarray) -> FittedPath:
    """Centripetal Catmull-Rom through given knots plus its arc-length table.

    This is the spline stage alone (no smoothing or resampling), so a path
    serialized as its knot list reconstructs to the identical curve.
    """
    knots = np.asarray(knots, dtype=float)
    if len(knots) < MIN_FIT_POINTS:
        raise TrajectoryTooShort(f"need {MIN_FIT_POINTS} knots, got {len(knots)}")
    # mirrored phantom endpoints keep the spline interpolating at both ends
    first = 2 * knots[0] - knots[1]
    last = 2 * knots[-1] - knots[-2]
    control = np.vstack([first, knots, last])

    dense: list[np.ndarray] = []
    for i in range(1, len(control) - 2):
        p0, p1, p2, p3 = control[i - 1], control[i], control[i + 1], control[i + 2]
        chord = float(np.linalg.norm(p2 - p1))
        n_samples = max(8, int(math.ceil(chord / (TABLE_RESOLUTION_M / 2))))
        dense.append(_catmull_rom_segment(p0, p1, p2, p3, n_samples))
    dense.append(knots[-1][None, :])
    points = np.vstack(dense)

    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    return FittedPath(knots=knots, points=points, arc_lengths=arc)


def fit_trajectory(raw_points: np.ndarray) -> FittedPath:
    """Smooth + resample + spline + arc-length table, per the pipeline above."""
    raw_points = np.asarray(raw_points, dtype=float)
    if len(raw_points) < MIN_FIT_POINTS:
        raise TrajectoryTooShort(f"need {MIN_FIT_POINTS} points, got {len(raw_points)}")
    smoothed = _moving_average(raw_points)
    n_knots = max(16, len(smoothed) // 4)
    knots = _resample_uniform(smoothed, n_knots)
    return path_from_knots(knots)


def synthetic_gaze(
    track: Callable[[float], tuple[float, float]],
    duration: float,
    rng: np.random.Generator,
    start_t: float = 0.0,
    rate: float = GAZE_RATE_HZ,
    tremor_sigma: float = TREMOR_SIGMA_M,
) -> list[GazeSample]:
    """Simulated eye-tracker output following `track(t)` with tremor noise."""
    n = int(round(duration * rate))
    samples = []
    for k in range(n):
        t = start_t + k / rate
        x, y = track(t - start_t)
        nx, ny = rng.normal(0.0, tremor_sigma, size=2)
        samples.append(GazeSample(t, x + nx, y + ny, True))
    return samples


def fixation_track(x: float, y: float) -> Callable[[float], tuple[float, float]]:
    return lambda _t: (x, y)


def semicircle_track(
    cx: float, cy: float, radius: float, duration: float
) -> Callable[[float], tuple[float, float]]:
    """Half circle swept at constant angular rate over `duration` seconds."""
    def track(t: float) -> tuple[float, float]:
        phase = math.pi * min(max(t / duration, 0.0), 1.0)
        return (cx + radius * math.cos(phase), cy - radius * math.sin(phase))

    return track
