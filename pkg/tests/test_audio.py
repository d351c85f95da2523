import math

import numpy as np
import pytest

from adworkbench.audio import (
    AudioStream,
    MfccFrames,
    load_wav,
    mfcc,
    save_wav,
    snr,
    window_features,
)
from adworkbench.audio.classify import SegmentLabels, merge_and_strip
from adworkbench.audio.mfcc import (
    FRAME_LEN,
    HOP,
    LOG_FLOOR,
    N_COEFF,
    N_MELS,
    WINDOW_SAMPLES,
    _DCT_FULL,
    _frames_of,
    _mfcc_of_frames,
    frame_count,
    mel_filterbank,
    mfcc_with_grad_context,
)
from adworkbench.audio.stream import SAMPLE_RATE


def test_frame_count_formula():
    for n in (400, 401, 560, 64000, 64240):
        assert frame_count(n) == (n - FRAME_LEN) // HOP + 1


def test_zero_stream_floors_and_uniform():
    stream = AudioStream(np.zeros(SAMPLE_RATE))
    frames = mfcc(stream)
    # every frame's log-mel energies sit at the floor -> identical frames
    assert np.allclose(frames.coeffs, frames.coeffs[0])
    windowed = _frames_of(stream.samples) * 0.0
    assert frames.coeffs.shape[1] == N_COEFF


def test_sine_peaks_at_nearest_mel_filter_and_naive_dft_oracle():
    rng = np.random.default_rng(0)
    t = np.arange(FRAME_LEN) / SAMPLE_RATE
    tone = 0.5 * np.sin(2 * np.pi * 1000.0 * t)
    frames = tone[None, :]
    coeffs, (spec, mel_e) = _mfcc_of_frames(frames)
    # naive O(N^2) DFT oracle
    win = frames[0] * (0.54 - 0.46 * np.cos(2 * np.pi * np.arange(FRAME_LEN) / (FRAME_LEN - 1)))
    naive = np.zeros(FRAME_LEN // 2 + 1, dtype=complex)
    for k in range(len(naive)):
        acc = 0.0 + 0.0j
        for n in range(FRAME_LEN):
            acc += win[n] * np.exp(-2j * np.pi * k * n / FRAME_LEN)
        naive[k] = acc
    power_naive = naive.real**2 + naive.imag**2
    power_mine = spec.real[0] ** 2 + spec.imag[0] ** 2
    # relative to the spectrum scale; zero bins are numerically zero both ways
    assert np.max(np.abs(power_mine - power_naive)) / power_naive.max() < 1e-9
    # the mel filter whose center is nearest 1 kHz carries the peak energy
    fb = mel_filterbank()
    centers = np.array([np.argmax(row) for row in fb]) * SAMPLE_RATE / FRAME_LEN
    nearest = int(np.argmin(np.abs(centers - 1000.0)))
    assert int(np.argmax(mel_e[0])) == nearest


def test_dct_orthonormal_round_trip():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(N_MELS)
    c = _DCT_FULL @ v
    back = _DCT_FULL.T @ c
    assert np.max(np.abs(back - v)) < 1e-9


def test_mfcc_gradient_matches_fd():
    rng = np.random.default_rng(5)
    samples = 0.3 * rng.standard_normal(FRAME_LEN + 2 * HOP)
    cot = rng.standard_normal((frame_count(len(samples)), N_COEFF))
    coeffs, vjp = mfcc_with_grad_context(samples)
    grad = vjp(cot)

    def scalar(s):
        c, _ = _mfcc_of_frames(_frames_of(s))
        return float(np.sum(c * cot))

    h = 1e-5
    coords = rng.choice(len(samples), 100, replace=False)
    worst = 0.0
    for i in coords:
        orig = samples[i]
        samples[i] = orig + h
        fp = scalar(samples)
        samples[i] = orig - h
        fm = scalar(samples)
        samples[i] = orig
        fd = (fp - fm) / (2 * h)
        denom = max(abs(fd), 1e-2)
        worst = max(worst, abs(grad[i] - fd) / denom)
    assert worst < 1e-3


def test_window_independence():
    rng = np.random.default_rng(7)
    base = 0.2 * rng.standard_normal(3 * WINDOW_SAMPLES)
    f0 = window_features(AudioStream(base))
    changed = base.copy()
    changed[WINDOW_SAMPLES : 2 * WINDOW_SAMPLES] += 0.05 * rng.standard_normal(WINDOW_SAMPLES)
    f1 = window_features(AudioStream(np.clip(changed, -1, 1)))
    assert np.array_equal(f0[0], f1[0])
    assert np.array_equal(f0[2], f1[2])
    assert not np.array_equal(f0[1], f1[1])
    assert f0.shape == (3, 400, N_COEFF)


def test_twelve_second_stream_gives_three_windows():
    stream = AudioStream(0.1 * np.sin(np.linspace(0, 1000, 12 * SAMPLE_RATE)))
    assert window_features(stream).shape[0] == 3


def test_merge_and_strip_runs():
    probs = np.zeros((5, 3))
    classes = ["music", "music", "ad", "ad", "speech"]
    for i, c in enumerate(classes):
        probs[i, ("music", "speech", "ad").index(c)] = 1.0
    labels = SegmentLabels(probs=probs, classes=classes)
    intervals, keep = merge_and_strip(labels)
    assert intervals == [("music", 0, 8), ("ad", 8, 16), ("speech", 16, 20)]
    assert keep == [("music", 0, 8)[1:], ("speech", 16, 20)[1:]] or keep == [(0, 8), (16, 20)]


def test_merge_single_class_and_alternating():
    mk = lambda cls_list: SegmentLabels(
        probs=np.eye(3)[[("music", "speech", "ad").index(c) for c in cls_list]], classes=list(cls_list)
    )
    intervals, keep = merge_and_strip(mk(["music"] * 4))
    assert intervals == [("music", 0, 16)] and keep == [(0, 16)]
    intervals, _ = merge_and_strip(mk(["music", "ad", "music", "ad"]))
    assert len(intervals) == 4
    # intervals partition the labeled duration
    for (c0, a0, b0), (c1, a1, b1) in zip(intervals, intervals[1:]):
        assert b0 == a1
    assert intervals[0][1] == 0 and intervals[-1][2] == 16


def test_snr_known_values():
    rng = np.random.default_rng(9)
    s = AudioStream(0.5 * rng.standard_normal(1000).clip(-1, 1))
    assert snr(s, s) == math.inf
    doubled = AudioStream(np.clip(2 * s.samples, -1, 1))
    # avoid clipping in the test signal
    small = AudioStream(0.3 * np.sin(np.linspace(0, 50, 1000)))
    assert snr(small, AudioStream(2 * small.samples)) == pytest.approx(0.0, abs=1e-9)
    tenth = AudioStream(small.samples * (1 + 0.1))
    assert snr(small, tenth) == pytest.approx(20.0, abs=1e-9)


def test_wav_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    pcm = np.round(rng.uniform(-1, 1, 5000) * 32767) / 32767
    stream = AudioStream(pcm)
    save_wav(stream, tmp_path / "x.wav")
    back = load_wav(tmp_path / "x.wav")
    assert back.sample_rate == SAMPLE_RATE
    assert np.allclose(back.samples, stream.samples, atol=1e-9)
