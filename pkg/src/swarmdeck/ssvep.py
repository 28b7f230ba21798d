"""SSVEP decoding: flicker frequency table, canonical correlation, synthesis.

Each of the 40 selection regions flickers at its own frequency, 8.0 Hz to
15.8 Hz in 0.2 Hz steps (the nominal 8-16 Hz band holds 41 such values; the
16.0 Hz endpoint is the one dropped). A recorded window is scored against
sinusoidal references at every table frequency with canonical correlation
analysis, and the region with the highest correlation wins. Correlations
are turned into a probability vector with a softmax over beta * rho.

There is no EEG hardware here: `synthesize_eeg` plays the subject, emitting
a seeded multichannel window that contains the attended region's frequency
(fundamental plus half-amplitude second harmonic, random phase per channel)
buried in unit Gaussian noise at a chosen amplitude ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

REGION_COUNT = 40
BASE_FREQ_HZ = 8.0
FREQ_STEP_HZ = 0.2

DEFAULT_FS = 250.0
DEFAULT_CHANNELS = 8
DEFAULT_WINDOW_S = 2.0
DEFAULT_HARMONICS = 2
DEFAULT_SOFTMAX_BETA = 40.0

RIDGE_EPS = 1e-8


class CcaError(ValueError):
    """Inputs violate the CCA preconditions (size, rank)."""


def stimulus_table(
    count: int = REGION_COUNT, base: float = BASE_FREQ_HZ, step: float = FREQ_STEP_HZ
) -> tuple[float, ...]:
    """Flicker frequency of each region, index k (1-based) at base + step*(k-1)."""
    return tuple(base + step * k for k in range(count))


@dataclass(frozen=True)
class EegWindow:
    """One multichannel decoding window, channels x samples."""

    samples: np.ndarray
    fs: float = DEFAULT_FS

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ValueError("samples must be channels x time")
        if not np.isfinite(arr).all():
            raise ValueError("samples contain NaN or infinity")
        if self.fs <= 0:
            raise ValueError("sampling rate must be positive")
        object.__setattr__(self, "samples", arr)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class SsvepDecision:
    """Decoded selection: winning region plus the full evidence vectors."""

    region: int
    probabilities: np.ndarray
    correlations: np.ndarray


@lru_cache(maxsize=256)
def _reference_cached(f: float, fs: float, n: int, harmonics: int) -> np.ndarray:
    t = np.arange(n) / fs
    rows = []
    for h in range(1, harmonics + 1):
        w = 2 * math.pi * h * f * t
        rows.append(np.sin(w))
        rows.append(np.cos(w))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def reference_signals(f: float, fs: float, n: int, harmonics: int = DEFAULT_HARMONICS) -> np.ndarray:
    """Sin/cos reference matrix (2*harmonics x n) for one stimulus frequency."""
    if harmonics < 1:
        raise ValueError("need at least one harmonic")
    if f <= 0:
        raise ValueError("frequency must be positive")
    if f * harmonics >= fs / 2:
        raise ValueError(
            f"harmonic {harmonics} of {f} Hz is {f * harmonics} Hz, "
            f"at or above Nyquist ({fs / 2} Hz)"
        )
    return _reference_cached(float(f), float(fs), int(n), int(harmonics))


def _standardized(M: np.ndarray, name: str) -> np.ndarray:
    """Center and unit-scale each row; CCA is invariant to this, and it makes
    the ridge term genuinely scale-free."""
    Z = M - M.mean(axis=1, keepdims=True)
    norms = np.sqrt((Z * Z).mean(axis=1, keepdims=True))
    if not norms.any():
        raise CcaError(f"{name} is constant; covariance is rank deficient")
    nz = norms[:, 0] > 0
    Z[nz] /= norms[nz]
    return Z


def cca_rho(X: np.ndarray, Y: np.ndarray, ridge: float = RIDGE_EPS) -> float:
    """Maximum canonical correlation between two multichannel signals.

    Solves the symmetric eigenproblem of
    Cxx^{-1/2} Cxy Cyy^{-1} Cyx Cxx^{-1/2}; the largest eigenvalue is
    rho^2. Covariance blocks get a relative ridge so near-collinear
    channels cannot blow up the whitening. Result clipped to [0, 1].
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.ndim != 2:
        raise CcaError("X and Y must be 2-D (channels x samples)")
    p, n = X.shape
    q, ny = Y.shape
    if n != ny:
        raise CcaError(f"sample counts differ: {n} vs {ny}")
    if n <= p + q:
        raise CcaError(f"need more samples than channels: n={n}, p+q={p + q}")
    if not (np.isfinite(X).all() and np.isfinite(Y).all()):
        raise CcaError("inputs contain NaN or infinity")

    Zx = _standardized(X, "X")
    Zy = _standardized(Y, "Y")
    Cxx = Zx @ Zx.T / n + ridge * np.eye(p)
    Cyy = Zy @ Zy.T / n + ridge * np.eye(q)
    Cxy = Zx @ Zy.T / n

    wx, Vx = np.linalg.eigh(Cxx)
    if wx[0] <= 0:
        raise CcaError("Cxx rank deficient after regularization")
    inv_sqrt_x = Vx @ np.diag(1.0 / np.sqrt(wx)) @ Vx.T
    try:
        T = Cxy @ np.linalg.solve(Cyy, Cxy.T)
    except np.linalg.LinAlgError as exc:
        raise CcaError("Cyy rank deficient after regularization") from exc
    M = inv_sqrt_x @ T @ inv_sqrt_x
    M = (M + M.T) / 2
    lam = float(np.linalg.eigvalsh(M)[-1])
    return float(np.sqrt(min(max(lam, 0.0), 1.0)))


def softmax(scores: np.ndarray, beta: float) -> np.ndarray:
    z = beta * np.asarray(scores, dtype=float)
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def classify_ssvep(
    window: EegWindow,
    table: tuple[float, ...] | None = None,
    harmonics: int = DEFAULT_HARMONICS,
    beta: float = DEFAULT_SOFTMAX_BETA,
) -> SsvepDecision:
    """Score a window against every table frequency; highest correlation wins."""
    table = stimulus_table() if table is None else table
    if window.n_samples < window.fs:
        raise ValueError("need at least one second of data to decode")
    rhos = np.empty(len(table))
    for k, f in enumerate(table):
        refs = reference_signals(f, window.fs, window.n_samples, harmonics)
        rhos[k] = cca_rho(window.samples, refs)
    region = int(np.argmax(rhos)) + 1
    return SsvepDecision(region=region, probabilities=softmax(rhos, beta), correlations=rhos)


def synthesize_eeg(
    region: int,
    snr: float,
    rng: np.random.Generator,
    table: tuple[float, ...] | None = None,
    channels: int = DEFAULT_CHANNELS,
    fs: float = DEFAULT_FS,
    duration: float = DEFAULT_WINDOW_S,
    harmonics: int = DEFAULT_HARMONICS,
) -> EegWindow:
    """Simulated evoked response: per-channel random-phase flicker component
    of amplitude `snr` (relative to unit noise), plus optional 2nd harmonic
    at half amplitude. snr = 0 yields pure noise."""
    table = stimulus_table() if table is None else table
    if not 1 <= region <= len(table):
        raise ValueError(f"region {region} outside 1..{len(table)}")
    if snr < 0:
        raise ValueError("snr must be >= 0")
    f = table[region - 1]
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    data = rng.standard_normal((channels, n))
    if snr > 0:
        phases = rng.uniform(0, 2 * math.pi, size=channels)
        for c in range(channels):
            wave = np.sin(2 * math.pi * f * t + phases[c])
            if harmonics >= 2:
                wave = wave + 0.5 * np.sin(2 * math.pi * 2 * f * t + 2 * phases[c])
            data[c] += snr * wave
    return EegWindow(samples=data, fs=fs)
