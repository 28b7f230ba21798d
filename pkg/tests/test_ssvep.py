import math

import numpy as np
import pytest

from swarmdeck.ssvep import (
    CcaError,
    EegWindow,
    cca_rho,
    classify_ssvep,
    reference_signals,
    softmax,
    stimulus_table,
    synthesize_eeg,
)


# ------------------------------------------------------------ frequency table


def test_stimulus_table_spacing_and_range():
    table = stimulus_table()
    assert len(table) == 40
    assert table[0] == pytest.approx(8.0)
    assert table[-1] == pytest.approx(15.8)
    diffs = np.diff(table)
    assert np.allclose(diffs, 0.2)
    assert (diffs > 0).all()


# ------------------------------------------------------------ reference signals


def test_reference_first_samples():
    refs = reference_signals(10.0, 250.0, 500, harmonics=1)
    assert refs.shape == (2, 500)
    assert refs[0, 0] == 0.0
    assert refs[1, 0] == 1.0


def test_reference_rows_zero_mean_over_integer_periods():
    # 2 s of 10 Hz at 250 Hz = 20 whole periods
    refs = reference_signals(10.0, 250.0, 500, harmonics=2)
    assert np.allclose(refs.mean(axis=1), 0.0, atol=1e-12)


def test_reference_nyquist_guard():
    with pytest.raises(ValueError):
        reference_signals(70.0, 250.0, 500, harmonics=2)  # 140 > 125
    reference_signals(62.0, 250.0, 500, harmonics=2)  # 124 < 125 is fine


# ------------------------------------------------------------------- CCA core


from cca_oracle import grid_max_correlation, grid_max_correlation_naive


def random_instance(rng, correlated=True):
    X = rng.standard_normal((2, 200))
    if correlated:
        mix = rng.standard_normal((2, 2))
        Y = mix @ X + rng.standard_normal((2, 200)) * rng.uniform(0.2, 2.0)
    else:
        Y = rng.standard_normal((2, 200))
    return X, Y


def test_oracle_fast_path_equals_naive_definition():
    rng = np.random.default_rng(99)
    for i in range(5):
        X, Y = random_instance(rng, correlated=bool(i % 2))
        naive = grid_max_correlation_naive(X, Y)
        fast = grid_max_correlation(X, Y)
        assert abs(naive - fast) <= 1e-12


def test_cca_matches_angle_grid_oracle():
    rng = np.random.default_rng(2024)
    for i in range(10):
        X, Y = random_instance(rng, correlated=bool(i % 2))
        assert cca_rho(X, Y) == pytest.approx(grid_max_correlation(X, Y), abs=1e-4)


def test_cca_self_correlation_is_one():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((3, 100))
    assert cca_rho(X, X) == pytest.approx(1.0, abs=1e-6)


def test_cca_orthogonal_sinusoids_near_zero():
    t = np.arange(500) / 250.0
    X = np.sin(2 * math.pi * 10 * t)[None, :]
    Y = np.cos(2 * math.pi * 10 * t)[None, :]
    assert cca_rho(X, Y) <= 1e-6


def test_cca_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(20):
        X, Y = random_instance(rng)
        assert abs(cca_rho(X, Y) - cca_rho(Y, X)) <= 1e-10


def test_cca_scale_and_offset_invariance():
    rng = np.random.default_rng(7)
    X, Y = random_instance(rng)
    base = cca_rho(X, Y)
    scales = rng.uniform(0.1, 10.0, size=2)[:, None]
    offsets = rng.uniform(-5, 5, size=2)[:, None]
    assert abs(cca_rho(X * scales + offsets, Y) - base) <= 1e-9
    assert abs(cca_rho(10.0 * X, Y) - base) <= 1e-9


def test_cca_rho_always_in_unit_interval():
    rng = np.random.default_rng(8)
    for _ in range(50):
        X, Y = random_instance(rng, correlated=bool(rng.integers(0, 2)))
        rho = cca_rho(X, Y)
        assert 0.0 <= rho <= 1.0


def test_cca_input_validation():
    rng = np.random.default_rng(9)
    with pytest.raises(CcaError):
        cca_rho(rng.standard_normal((4, 7)), rng.standard_normal((4, 7)))  # n <= p+q
    with pytest.raises(CcaError):
        cca_rho(np.zeros((2, 100)), rng.standard_normal((2, 100)))  # rank deficient
    with pytest.raises(CcaError):
        cca_rho(rng.standard_normal((2, 100)), rng.standard_normal((2, 99)))


# ------------------------------------------------------------- classification


def test_matched_window_recovers_region_26():
    rng = np.random.default_rng(26)
    window = synthesize_eeg(region=26, snr=1000.0, rng=rng)
    decision = classify_ssvep(window)
    assert decision.region == 26
    assert decision.correlations[25] > 0.99
    assert decision.region == int(np.argmax(decision.probabilities)) + 1


def test_probabilities_sum_to_one_and_follow_rho():
    rng = np.random.default_rng(3)
    window = synthesize_eeg(region=5, snr=1.0, rng=rng)
    d = classify_ssvep(window)
    assert d.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
    assert (d.probabilities >= 0).all()
    order_rho = np.argsort(d.correlations)
    order_p = np.argsort(d.probabilities)
    assert (order_rho == order_p).all()


def test_window_scaling_leaves_decision_unchanged():
    rng = np.random.default_rng(4)
    window = synthesize_eeg(region=13, snr=2.0, rng=rng)
    d1 = classify_ssvep(window)
    d2 = classify_ssvep(EegWindow(window.samples * 10.0, window.fs))
    assert d1.region == d2.region
    assert np.max(np.abs(d1.correlations - d2.correlations)) <= 1e-9


def test_per_channel_affine_rescaling_invariance():
    rng = np.random.default_rng(12)
    window = synthesize_eeg(region=8, snr=1.0, rng=rng)
    gains = rng.uniform(0.5, 3.0, size=(window.n_channels, 1))
    offsets = rng.uniform(-2, 2, size=(window.n_channels, 1))
    d1 = classify_ssvep(window)
    d2 = classify_ssvep(EegWindow(window.samples * gains + offsets, window.fs))
    assert d1.region == d2.region
    assert np.max(np.abs(d1.correlations - d2.correlations)) <= 1e-9


def test_short_window_rejected():
    rng = np.random.default_rng(1)
    w = EegWindow(rng.standard_normal((8, 100)), fs=250.0)
    with pytest.raises(ValueError):
        classify_ssvep(w)


def test_synthesis_determinism_and_noise():
    a = synthesize_eeg(3, 1.5, np.random.default_rng(99))
    b = synthesize_eeg(3, 1.5, np.random.default_rng(99))
    assert np.array_equal(a.samples, b.samples)
    pure = synthesize_eeg(3, 0.0, np.random.default_rng(1))
    # snr 0 windows are noise: no frequency should dominate reliably
    assert abs(pure.samples.mean()) < 0.05


def test_closed_loop_snr10_all_regions():
    rng = np.random.default_rng(1234)
    for region in range(1, 41):
        window = synthesize_eeg(region, 10.0, rng)
        assert classify_ssvep(window).region == region


def test_noise_argmax_unbiased_chi_square():
    rng = np.random.default_rng(2718)
    counts = np.zeros(40)
    trials = 500
    for _ in range(trials):
        window = synthesize_eeg(1, 0.0, rng)
        counts[classify_ssvep(window).region - 1] += 1
    expected = trials / 40
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # chi-square critical value, 39 dof, 5% significance
    assert chi2 <= 54.572
    rng2 = np.random.default_rng(2718)
    noise_max = max(
        classify_ssvep(synthesize_eeg(1, 0.0, rng2)).correlations.max() for _ in range(20)
    )
    matched = classify_ssvep(synthesize_eeg(7, 10.0, np.random.default_rng(0)))
    assert matched.correlations[6] > noise_max


def test_accuracy_monotone_in_snr():
    trials = 50
    accs = []
    for snr in (0.1, 0.3, 1.0, 3.0):
        rng = np.random.default_rng(777)
        hits = 0
        for _ in range(trials):
            region = int(rng.integers(1, 41))
            window = synthesize_eeg(region, snr, rng)
            hits += classify_ssvep(window).region == region
        accs.append(hits / trials)
    assert all(b >= a for a, b in zip(accs, accs[1:])), accs


def test_softmax_monotone():
    rng = np.random.default_rng(0)
    scores = rng.uniform(0, 1, size=40)
    p = softmax(scores, 40.0)
    assert p.sum() == pytest.approx(1.0)
    order = np.argsort(scores)
    assert (np.diff(p[order]) >= 0).all()
