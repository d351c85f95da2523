"""Mono audio streams, 16-bit WAV I/O, and SNR."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class AudioStream:
    samples: np.ndarray  # mono float in [-1, 1]
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("samples must be a non-empty 1-d array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite samples")
        if np.max(np.abs(arr)) > 1.0 + 1e-9:
            raise ValueError("samples outside [-1, 1]")
        arr = np.clip(arr, -1.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def save_wav(stream: AudioStream, path) -> None:
    pcm = np.clip(np.round(stream.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(stream.sample_rate)
        fh.writeframes(pcm.tobytes())


def load_wav(path) -> AudioStream:
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError("expected 16-bit mono WAV")
        rate = fh.getframerate()
        pcm = np.frombuffer(fh.readframes(fh.getnframes()), dtype="<i2")
    return AudioStream(samples=pcm.astype(np.float64) / 32767.0, sample_rate=rate)


def snr(original: AudioStream, perturbed: AudioStream) -> float:
    """10 log10(signal energy / noise energy) in dB; +inf when noise is zero."""
    if len(original.samples) != len(perturbed.samples):
        raise ValueError("length mismatch")
    noise = original.samples - perturbed.samples
    noise_energy = float(np.sum(noise**2))
    if noise_energy == 0.0:
        return float("inf")
    signal_energy = float(np.sum(original.samples**2))
    return 10.0 * np.log10(signal_energy / noise_energy)
