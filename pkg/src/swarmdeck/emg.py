"""EMG gesture pipeline: synthetic wristband signals, RMS features, a small
neural classifier trained in-repo, and the stability debounce.

Five gestures map to five swarm commands (stop, up, down, left, right).
Signals are 8-channel, 1 kHz; classification runs on sliding 200 ms windows
hopped every 100 ms, and a command is emitted only after the same label has
held for five consecutive hops, which puts the post-transition latency at
0.5 s by construction.

The per-(gesture, channel) activation amplitudes below are a fixed artifact
asset, not a physiological claim: rows are distinct, pairwise cosine
similarity stays under 0.7, and the idle "stop" row is uniformly low so its
mean RMS sits below every active gesture.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

GESTURES = ("stop", "up", "down", "left", "right")

N_CHANNELS = 8
FS_HZ = 1000.0
WINDOW_S = 0.2
HOP_S = 0.1
WINDOW_SAMPLES = int(WINDOW_S * FS_HZ)

BAND_LOW_HZ = 20.0
BAND_HIGH_HZ = 450.0

# Activation template: rows = gestures, columns = channels (unit RMS scale).
ACTIVATION_TEMPLATE = np.array(
    [
        [0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15],  # stop
        [1.20, 0.90, 0.20, 0.10, 0.10, 0.10, 0.10, 0.20],  # up
        [0.10, 0.20, 1.20, 0.90, 0.20, 0.10, 0.10, 0.10],  # down
        [0.10, 0.10, 0.10, 0.20, 1.20, 0.90, 0.20, 0.10],  # left
        [0.20, 0.10, 0.10, 0.10, 0.10, 0.20, 1.20, 0.90],  # right
    ]
)

COMMON_MODE_AMPLITUDE = 0.02
AMPLITUDE_JITTER = 0.08

MODEL_FORMAT = "swarmdeck-emg-mlp"
MODEL_VERSION = 1


class EmgError(ValueError):
    pass


class GradientCheckError(RuntimeError):
    """Backprop disagreed with finite differences; the model is untrustworthy."""


def _bandlimited_noise(n: int, fs: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-RMS Gaussian noise restricted to the surface-EMG band."""
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    spectrum[(freqs < BAND_LOW_HZ) | (freqs > BAND_HIGH_HZ)] = 0.0
    x = np.fft.irfft(spectrum, n)
    rms = math.sqrt(float(np.mean(x * x)))
    return x / rms if rms > 0 else x


def synthesize_emg(
    gesture: str,
    rng: np.random.Generator,
    duration: float = WINDOW_S,
    fs: float = FS_HZ,
) -> np.ndarray:
    """Multichannel surface-EMG stand-in for one held gesture.

    Each channel is band-limited noise scaled by the gesture's activation
    amplitude (with mild per-window jitter), plus a small common-mode
    component shared across channels. Seeded and deterministic.
    """
    if gesture not in GESTURES:
        raise EmgError(f"unknown gesture {gesture!r}")
    n = int(round(duration * fs))
    if n < WINDOW_SAMPLES:
        raise EmgError(f"duration {duration}s is shorter than one window")
    amplitudes = ACTIVATION_TEMPLATE[GESTURES.index(gesture)]
    common = COMMON_MODE_AMPLITUDE * _bandlimited_noise(n, fs, rng)
    data = np.empty((N_CHANNELS, n))
    for c in range(N_CHANNELS):
        gain = max(0.2, 1.0 + AMPLITUDE_JITTER * rng.standard_normal())
        data[c] = amplitudes[c] * gain * _bandlimited_noise(n, fs, rng) + common
    return data


def extract_features(window: np.ndarray) -> np.ndarray:
    """Per-channel RMS over one window."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[0] != N_CHANNELS:
        raise EmgError(f"window must be {N_CHANNELS} x samples")
    if not np.isfinite(window).all():
        raise EmgError("window contains NaN or infinity")
    return np.sqrt(np.mean(window * window, axis=1))


def make_dataset(
    n_per_class: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Feature/label arrays with `n_per_class` synthetic windows per gesture."""
    X = np.empty((n_per_class * len(GESTURES), N_CHANNELS))
    y = np.empty(n_per_class * len(GESTURES), dtype=int)
    row = 0
    for label, gesture in enumerate(GESTURES):
        for _ in range(n_per_class):
            X[row] = extract_features(synthesize_emg(gesture, rng))
            y[row] = label
            row += 1
    return X, y


def _softmax_rows(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    e = np.exp(Z)
    return e / e.sum(axis=1, keepdims=True)


class MlpGestureClassifier:
    """Input-hidden-output network (8 -> 16 -> 5), rectifier hidden units,
    softmax output, trained by full-batch gradient descent with momentum.

    Follows the usual estimator surface: fit / predict / predict_proba /
    get_params / set_params. Features are standardized with statistics
    stored on the model. `fit` runs a mandatory backprop-vs-finite-difference
    self-check on a fixed batch before descending; a model whose gradients
    ever disagree is refused outright.
    """

    def __init__(
        self,
        hidden: int = 16,
        epochs: int = 300,
        learning_rate: float = 0.1,
        momentum: float = 0.9,
        seed: int = 0,
        grad_check: bool = True,
        grad_check_tol: float = 1e-4,
    ):
        self.hidden = hidden
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.seed = seed
        self.grad_check = grad_check
        self.grad_check_tol = grad_check_tol

    # -- estimator plumbing -------------------------------------------------

    _PARAM_NAMES = (
        "hidden", "epochs", "learning_rate", "momentum", "seed",
        "grad_check", "grad_check_tol",
    )

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._PARAM_NAMES}

    def set_params(self, **params) -> "MlpGestureClassifier":
        for key, value in params.items():
            if key not in self._PARAM_NAMES:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    # -- internals ----------------------------------------------------------

    def _forward(self, Xs, weights):
        W1, b1, W2, b2 = weights
        H = np.maximum(Xs @ W1 + b1, 0.0)
        P = _softmax_rows(H @ W2 + b2)
        return H, P

    def _loss(self, Xs, Y, weights):
        _, P = self._forward(Xs, weights)
        return float(-np.mean(np.log(P[np.arange(len(Y)), Y] + 1e-300)))

    def _gradients(self, Xs, Y, weights):
        W1, b1, W2, b2 = weights
        n = len(Y)
        H, P = self._forward(Xs, weights)
        dZ2 = P.copy()
        dZ2[np.arange(n), Y] -= 1.0
        dZ2 /= n
        gW2 = H.T @ dZ2
        gb2 = dZ2.sum(axis=0)
        dH = dZ2 @ W2.T
        dH[H <= 0] = 0.0
        gW1 = Xs.T @ dH
        gb1 = dH.sum(axis=0)
        return [gW1, gb1, gW2, gb2]

    def _check_gradients(self, Xs, Y, weights, step=1e-5):
        analytic = self._gradients(Xs, Y, weights)
        for layer, (W, G) in enumerate(zip(weights, analytic)):
            numeric = np.zeros_like(W)
            flat_w = W.ravel()
            flat_g = numeric.ravel()
            for i in range(flat_w.size):
                orig = flat_w[i]
                flat_w[i] = orig + step
                hi = self._loss(Xs, Y, weights)
                flat_w[i] = orig - step
                lo = self._loss(Xs, Y, weights)
                flat_w[i] = orig
                flat_g[i] = (hi - lo) / (2 * step)
            denom = np.linalg.norm(G) + np.linalg.norm(numeric) + 1e-12
            rel = np.linalg.norm(G - numeric) / denom
            if rel > self.grad_check_tol:
                raise GradientCheckError(
                    f"layer {layer}: backprop disagrees with finite differences "
                    f"(relative error {rel:.3e} > {self.grad_check_tol})"
                )

    # -- public API ----------------------------------------------------------

    def fit(self, X, y) -> "MlpGestureClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if X.ndim != 2 or len(X) != len(y):
            raise EmgError("X must be n x features with matching labels")
        classes = np.unique(y)
        if not np.array_equal(classes, np.arange(len(GESTURES))):
            missing = sorted(set(range(len(GESTURES))) - set(classes.tolist()))
            raise EmgError(f"dataset is missing classes {missing}")
        counts = np.bincount(y, minlength=len(GESTURES))
        if counts.min() < 20:
            raise EmgError(f"need >=20 examples per class, got {counts.tolist()}")

        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0)
        self.scale_[self.scale_ == 0] = 1.0
        Xs = (X - self.mean_) / self.scale_

        rng = np.random.default_rng(self.seed)
        n_in, n_out = X.shape[1], len(GESTURES)
        weights = [
            rng.normal(0, math.sqrt(2.0 / n_in), size=(n_in, self.hidden)),
            np.zeros(self.hidden),
            rng.normal(0, math.sqrt(2.0 / self.hidden), size=(self.hidden, n_out)),
            np.zeros(n_out),
        ]

        if self.grad_check:
            batch = min(32, len(Xs))
            self._check_gradients(Xs[:batch], y[:batch], weights)

        velocity = [np.zeros_like(w) for w in weights]
        self.loss_curve_ = []
        for _ in range(self.epochs):
            grads = self._gradients(Xs, y, weights)
            for w, v, g in zip(weights, velocity, grads):
                v *= self.momentum
                v -= self.learning_rate * g
                w += v
            self.loss_curve_.append(self._loss(Xs, y, weights))
        self.weights_ = weights
        return self

    def predict_proba(self, X) -> np.ndarray:
        if not hasattr(self, "weights_"):
            raise EmgError("classifier is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Xs = (X - self.mean_) / self.scale_
        _, P = self._forward(Xs, self.weights_)
        return P

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def classify(self, features) -> tuple[str, np.ndarray]:
        """Single-window convenience: (gesture name, score vector).

        Ties resolve to the lowest class index via argmax.
        """
        scores = self.predict_proba(features)[0]
        return GESTURES[int(np.argmax(scores))], scores

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        def pack(arr):
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            return {
                "shape": list(arr.shape),
                "data": base64.b64encode(arr.tobytes()).decode("ascii"),
            }

        doc = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "classes": list(GESTURES),
            "params": self.get_params(),
            "standardize": {"mean": pack(self.mean_), "scale": pack(self.scale_)},
            "weights": [pack(w) for w in self.weights_],
        }
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))

    @classmethod
    def load(cls, path) -> "MlpGestureClassifier":
        doc = json.loads(Path(path).read_text())
        if doc.get("format") != MODEL_FORMAT:
            raise EmgError(f"not an EMG model file: {path}")
        if doc.get("version") != MODEL_VERSION:
            raise EmgError(f"unsupported model version {doc.get('version')}")

        def unpack(entry):
            arr = np.frombuffer(base64.b64decode(entry["data"]), dtype=np.float64)
            return arr.reshape(entry["shape"]).copy()

        model = cls(**doc["params"])
        model.mean_ = unpack(doc["standardize"]["mean"])
        model.scale_ = unpack(doc["standardize"]["scale"])
        model.weights_ = [unpack(w) for w in doc["weights"]]
        return model


def train_classifier(
    X, y, epochs: int = 300, learning_rate: float = 0.1, seed: int = 0
) -> MlpGestureClassifier:
    return MlpGestureClassifier(epochs=epochs, learning_rate=learning_rate, seed=seed).fit(X, y)


@dataclass
class Debouncer:
    """Emit a command only after N identical consecutive labels, never the
    same command twice in a row. With the 100 ms hop and N=5 this realizes
    the intended 0.5 s post-transition latency."""

    n_required: int = 5
    last_label: Optional[str] = None
    run_length: int = 0
    last_emitted: Optional[str] = None

    def push(self, label: str) -> Optional[str]:
        if label == self.last_label:
            self.run_length += 1
        else:
            self.last_label = label
            self.run_length = 1
        if self.run_length >= self.n_required and label != self.last_emitted:
            self.last_emitted = label
            return label
        return None
