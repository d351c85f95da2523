"""MFCC features with an analytic gradient back to the raw samples.

25 ms Hamming frames at a 10 ms hop, power spectrum via DFT, 26 triangular
mel filters over 0-8 kHz, log with a 1e-10 floor, orthonormal DCT-II keeping
13 coefficients. Every stage is linear except the squared magnitude and the
floored log, so the chain rule is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adworkbench.audio.stream import SAMPLE_RATE, AudioStream

FRAME_LEN = 400  # 25 ms at 16 kHz
HOP = 160  # 10 ms
N_MELS = 26
N_COEFF = 13
LOG_FLOOR = 1e-10
N_BINS = FRAME_LEN // 2 + 1


def _hamming(n: int) -> np.ndarray:
    return 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n) / (n - 1))


def _mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_inv(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int = N_MELS, n_fft: int = FRAME_LEN, rate: int = SAMPLE_RATE) -> np.ndarray:
    """(n_mels, n_bins) triangular filters spanning 0 .. rate/2."""
    points = _mel_inv(np.linspace(_mel(0.0), _mel(rate / 2.0), n_mels + 2))
    bins = np.arange(n_fft // 2 + 1) * rate / n_fft
    fb = np.zeros((n_mels, len(bins)))
    for i in range(n_mels):
        lo, mid, hi = points[i], points[i + 1], points[i + 2]
        up = (bins - lo) / (mid - lo)
        down = (hi - bins) / (hi - mid)
        fb[i] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II rows."""
    k = np.arange(n_out)[:, None]
    n = np.arange(n_in)[None, :]
    mat = np.cos(np.pi * k * (2 * n + 1) / (2 * n_in))
    mat *= np.sqrt(2.0 / n_in)
    mat[0] *= np.sqrt(0.5)
    return mat


_WINDOW = _hamming(FRAME_LEN)
_MELFB = mel_filterbank()
_DCT = dct_matrix(N_COEFF, N_MELS)
_DCT_FULL = dct_matrix(N_MELS, N_MELS)
# real-DFT cos/sin matrices for the backward pass
_ARG = 2.0 * np.pi * np.outer(np.arange(N_BINS), np.arange(FRAME_LEN)) / FRAME_LEN
_COS = np.cos(_ARG)
_SIN = -np.sin(_ARG)


@dataclass(frozen=True)
class MfccFrames:
    coeffs: np.ndarray  # (frames, N_COEFF)
    frame_len: int = FRAME_LEN
    hop: int = HOP

    def __post_init__(self):
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != N_COEFF:
            raise ValueError(f"bad coefficient array {self.coeffs.shape}")


def frame_count(n_samples: int) -> int:
    if n_samples < FRAME_LEN:
        return 0
    return (n_samples - FRAME_LEN) // HOP + 1


def _frames_of(samples: np.ndarray) -> np.ndarray:
    n = frame_count(len(samples))
    idx = np.arange(FRAME_LEN)[None, :] + HOP * np.arange(n)[:, None]
    return samples[idx]


def _mfcc_of_frames(frames: np.ndarray):
    """coeffs plus the intermediates needed by the backward pass."""
    windowed = frames * _WINDOW
    spec = np.fft.rfft(windowed, axis=1)
    power = spec.real**2 + spec.imag**2
    mel_e = power @ _MELFB.T
    log_mel = np.log(np.maximum(mel_e, LOG_FLOOR))
    coeffs = log_mel @ _DCT.T
    return coeffs, (spec, mel_e)


def mfcc(stream: AudioStream) -> MfccFrames:
    if stream.sample_rate != SAMPLE_RATE:
        raise ValueError(f"expected {SAMPLE_RATE} Hz input")
    if len(stream.samples) < FRAME_LEN:
        raise ValueError("stream shorter than one frame")
    coeffs, _ = _mfcc_of_frames(_frames_of(stream.samples))
    return MfccFrames(coeffs=coeffs)


def mfcc_with_grad_context(samples: np.ndarray):
    """(coeffs, vjp) for raw samples: vjp maps a (frames, N_COEFF) cotangent
    back to d/d samples."""
    frames = _frames_of(samples)
    coeffs, (spec, mel_e) = _mfcc_of_frames(frames)

    def vjp(cot: np.ndarray) -> np.ndarray:
        dlog = cot @ _DCT  # (F, N_MELS)
        dmel = np.where(mel_e > LOG_FLOOR, dlog / np.maximum(mel_e, LOG_FLOOR), 0.0)
        dpow = dmel @ _MELFB  # (F, N_BINS)
        dwin = 2.0 * ((dpow * spec.real) @ _COS + (dpow * spec.imag) @ _SIN)
        dframes = dwin * _WINDOW
        grad = np.zeros_like(samples)
        for i in range(dframes.shape[0]):
            start = i * HOP
            grad[start : start + FRAME_LEN] += dframes[i]
        return grad

    return coeffs, vjp


# ---------------------------------------------------------------------------
# 4-second windows (sample-aligned, zero-padded so features never leak
# across window boundaries and each window yields exactly 400 frames)

WINDOW_SAMPLES = 4 * SAMPLE_RATE  # 64000
_WINDOW_PAD = FRAME_LEN + HOP * (WINDOW_SAMPLES // HOP - 1) + (HOP - 1)
WINDOW_PAD = (WINDOW_SAMPLES // HOP - 1) * HOP + FRAME_LEN - WINDOW_SAMPLES  # 240
FRAMES_PER_WINDOW = WINDOW_SAMPLES // HOP  # 400


def window_features(stream: AudioStream) -> np.ndarray:
    """(n_windows, 400, N_COEFF); the trailing partial window is dropped."""
    n_win = len(stream.samples) // WINDOW_SAMPLES
    if n_win == 0:
        raise ValueError("stream shorter than one 4-second window")
    out = np.empty((n_win, FRAMES_PER_WINDOW, N_COEFF))
    for i in range(n_win):
        block = stream.samples[i * WINDOW_SAMPLES : (i + 1) * WINDOW_SAMPLES]
        padded = np.concatenate([block, np.zeros(WINDOW_PAD)])
        coeffs, _ = _mfcc_of_frames(_frames_of(padded))
        out[i] = coeffs
    return out


def mfcc_window_grad(block: np.ndarray, cot: np.ndarray) -> np.ndarray:
    """d <cot, features(block)> / d block for one 4-second sample block."""
    padded = np.concatenate([block, np.zeros(WINDOW_PAD)])
    _, vjp = mfcc_with_grad_context(padded)
    return vjp(cot)[: len(block)]
