import math

import numpy as np
import pytest

from swarmdeck.emg import (
    ACTIVATION_TEMPLATE,
    GESTURES,
    Debouncer,
    EmgError,
    GradientCheckError,
    MlpGestureClassifier,
    extract_features,
    make_dataset,
    synthesize_emg,
    train_classifier,
)


# ----------------------------------------------------------------- template


def test_template_rows_distinct_and_dissimilar():
    T = ACTIVATION_TEMPLATE
    assert T.shape == (5, 8)
    norms = np.linalg.norm(T, axis=1)
    for i in range(5):
        for j in range(i + 1, 5):
            cos = float(T[i] @ T[j] / (norms[i] * norms[j]))
            assert cos <= 0.7, (GESTURES[i], GESTURES[j], cos)
            assert not np.array_equal(T[i], T[j])


def test_stop_row_is_uniformly_low():
    stop = ACTIVATION_TEMPLATE[0]
    others = ACTIVATION_TEMPLATE[1:]
    assert stop.mean() < others.mean(axis=1).min()
    assert np.allclose(stop, stop[0])


# ---------------------------------------------------------------- synthesis


def test_synthesis_deterministic():
    a = synthesize_emg("up", np.random.default_rng(5))
    b = synthesize_emg("up", np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_synthesis_rejects_unknown_gesture():
    with pytest.raises(EmgError):
        synthesize_emg("wave", np.random.default_rng(0))


def test_stop_mean_rms_below_active_gestures():
    rng = np.random.default_rng(1)
    means = {}
    for gesture in GESTURES:
        rms = [extract_features(synthesize_emg(gesture, rng)).mean() for _ in range(50)]
        means[gesture] = float(np.mean(rms))
    for gesture in GESTURES[1:]:
        assert means["stop"] < means[gesture]


def test_rms_sample_means_match_template_within_5pct():
    rng = np.random.default_rng(2)
    windows = 1000
    for label, gesture in enumerate(GESTURES):
        acc = np.zeros(8)
        for _ in range(windows):
            acc += extract_features(synthesize_emg(gesture, rng))
        mean_rms = acc / windows
        rel = np.abs(mean_rms - ACTIVATION_TEMPLATE[label]) / ACTIVATION_TEMPLATE[label]
        assert rel.max() <= 0.05, (gesture, rel.max())


# ----------------------------------------------------------------- features


def test_features_zero_window():
    assert np.array_equal(extract_features(np.zeros((8, 200))), np.zeros(8))


def test_features_constant_channel():
    w = np.zeros((8, 200))
    w[3] = -0.7
    f = extract_features(w)
    assert f[3] == pytest.approx(0.7)


def test_features_unit_sinusoid():
    t = np.arange(200) / 1000.0
    w = np.zeros((8, 200))
    w[0] = np.sin(2 * math.pi * 50 * t)  # 10 whole periods in 200 ms
    f = extract_features(w)
    assert f[0] == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_features_permutation_equivariant():
    rng = np.random.default_rng(3)
    w = rng.standard_normal((8, 200))
    perm = rng.permutation(8)
    assert np.allclose(extract_features(w[perm]), extract_features(w)[perm])


def test_features_validate_shape():
    with pytest.raises(EmgError):
        extract_features(np.zeros((4, 200)))


# ------------------------------------------------------------------ training


def toy_separable_dataset(rng, n_per_class=30, spread=0.01):
    centers = np.eye(5) @ np.arange(1, 6)[:, None] * np.ones((5, 8)) * 0.1
    centers = centers + np.arange(8) * 0.02  # make columns informative too
    X, y = [], []
    for label in range(5):
        X.append(centers[label] + spread * rng.standard_normal((n_per_class, 8)))
        y.extend([label] * n_per_class)
    return np.vstack(X), np.array(y)


def test_training_reaches_100pct_on_separable_toy_set():
    rng = np.random.default_rng(4)
    X, y = toy_separable_dataset(rng)
    model = MlpGestureClassifier(epochs=200, seed=1).fit(X, y)
    assert (model.predict(X) == y).mean() == 1.0
    assert model.loss_curve_[-1] < model.loss_curve_[0]


def test_zero_epochs_returns_initialized_model():
    rng = np.random.default_rng(4)
    X, y = toy_separable_dataset(rng)
    trained = MlpGestureClassifier(epochs=0, seed=7).fit(X, y)
    rng2 = np.random.default_rng(7)
    expected_w1 = rng2.normal(0, math.sqrt(2.0 / 8), size=(8, 16))
    assert np.allclose(trained.weights_[0], expected_w1)
    assert np.array_equal(trained.weights_[1], np.zeros(16))


def test_training_is_deterministic_per_seed():
    rng = np.random.default_rng(8)
    X, y = toy_separable_dataset(rng)
    m1 = MlpGestureClassifier(epochs=50, seed=3).fit(X, y)
    m2 = MlpGestureClassifier(epochs=50, seed=3).fit(X, y)
    for a, b in zip(m1.weights_, m2.weights_):
        assert np.array_equal(a, b)


def test_missing_class_rejected():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((80, 8))
    y = np.repeat(np.arange(4), 20)  # class 4 missing
    with pytest.raises(EmgError, match="missing"):
        MlpGestureClassifier().fit(X, y)


def test_too_few_examples_rejected():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((5 * 10, 8))
    y = np.repeat(np.arange(5), 10)
    with pytest.raises(EmgError, match=">=20"):
        MlpGestureClassifier().fit(X, y)


def test_gradient_check_runs_and_detects_breakage():
    rng = np.random.default_rng(10)
    X, y = toy_separable_dataset(rng)

    class Broken(MlpGestureClassifier):
        def _gradients(self, Xs, Y, weights):
            grads = super()._gradients(Xs, Y, weights)
            grads[0] = grads[0] * 1.01  # corrupt one layer by 1%
            return grads

    with pytest.raises(GradientCheckError):
        Broken(epochs=1).fit(X, y)
    # and the honest implementation passes its own check
    MlpGestureClassifier(epochs=1).fit(X, y)


def test_gradient_check_all_layers_tight():
    rng = np.random.default_rng(11)
    X, y = make_dataset(25, rng)
    model = MlpGestureClassifier(epochs=0, seed=2, grad_check=False).fit(X, y)
    Xs = (X - model.mean_) / model.scale_
    batch = slice(0, 32)
    analytic = model._gradients(Xs[batch], y[batch], model.weights_)
    step = 1e-5
    for layer, (W, G) in enumerate(zip(model.weights_, analytic)):
        numeric = np.zeros_like(W)
        flat_w, flat_n = W.ravel(), numeric.ravel()
        for i in range(flat_w.size):
            orig = flat_w[i]
            flat_w[i] = orig + step
            hi = model._loss(Xs[batch], y[batch], model.weights_)
            flat_w[i] = orig - step
            lo = model._loss(Xs[batch], y[batch], model.weights_)
            flat_w[i] = orig
            flat_n[i] = (hi - lo) / (2 * step)
        rel = np.linalg.norm(G - numeric) / (np.linalg.norm(G) + np.linalg.norm(numeric) + 1e-12)
        assert rel <= 1e-4, f"layer {layer}: {rel}"


def test_classify_templates_after_training():
    rng = np.random.default_rng(12)
    X, y = make_dataset(40, rng)
    model = train_classifier(X, y, seed=5)
    for label, gesture in enumerate(GESTURES):
        predicted, scores = model.classify(ACTIVATION_TEMPLATE[label])
        assert predicted == gesture
        assert scores.sum() == pytest.approx(1.0, abs=1e-9)


def test_scores_sum_to_one_random_inputs():
    rng = np.random.default_rng(13)
    X, y = make_dataset(25, rng)
    model = train_classifier(X, y, seed=5)
    P = model.predict_proba(rng.uniform(0, 2, size=(50, 8)))
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
    assert (P >= 0).all()


def test_held_out_accuracy_at_least_90pct():
    rng = np.random.default_rng(14)
    X_train, y_train = make_dataset(60, rng)
    model = train_classifier(X_train, y_train, seed=6)
    X_test, y_test = make_dataset(100, rng)  # 500 held-out windows
    acc = float((model.predict(X_test) == y_test).mean())
    assert acc >= 0.90, acc


def test_estimator_params_round_trip():
    model = MlpGestureClassifier(hidden=12, epochs=10)
    params = model.get_params()
    assert params["hidden"] == 12
    clone = MlpGestureClassifier().set_params(**params)
    assert clone.get_params() == params
    with pytest.raises(ValueError):
        model.set_params(bogus=1)


def test_model_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(15)
    X, y = make_dataset(25, rng)
    model = train_classifier(X, y, seed=9)
    path = tmp_path / "gestures.model.json"
    model.save(path)
    loaded = MlpGestureClassifier.load(path)
    probe = rng.uniform(0, 1.5, size=(20, 8))
    assert np.allclose(model.predict_proba(probe), loaded.predict_proba(probe))


# ----------------------------------------------------------------- debounce


def test_debounce_emits_on_fifth_hop():
    d = Debouncer()
    out = [d.push("up") for _ in range(5)]
    assert out == [None, None, None, None, "up"]


def test_debounce_restart_on_interruption():
    d = Debouncer()
    labels = ["up", "up", "left", "up", "up", "up", "up", "up"]
    out = [d.push(label) for label in labels]
    assert out[:7] == [None] * 7
    assert out[7] == "up"


def test_debounce_emits_once_for_stable_stream():
    d = Debouncer()
    out = [d.push("up") for _ in range(20)]
    assert out.count("up") == 1


def test_debounce_no_consecutive_duplicates_and_min_gap():
    rng = np.random.default_rng(16)
    d = Debouncer()
    emitted = []
    last_change = 0
    labels = []
    label = "stop"
    for i in range(2000):
        if rng.random() < 0.1:
            label = GESTURES[rng.integers(0, 5)]
        labels.append(label)
    for i, label in enumerate(labels):
        if i > 0 and labels[i - 1] != label:
            last_change = i
        cmd = d.push(label)
        if cmd is not None:
            emitted.append((i, cmd))
            assert i - last_change >= d.n_required - 1
    for (_, a), (_, b) in zip(emitted, emitted[1:]):
        assert a != b
