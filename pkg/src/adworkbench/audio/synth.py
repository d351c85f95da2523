"""Procedural audio textures: tonal music, formant-like speech, and
jingle-plus-voiceover ads."""

from __future__ import annotations

import numpy as np

from adworkbench.audio.stream import SAMPLE_RATE, AudioStream


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed))


def _t(n):
    return np.arange(n) / SAMPLE_RATE


def music(seed: int, seconds: float) -> np.ndarray:
    """Slow chords built from harmonics of a minor-pentatonic-ish scale."""
    rng = _rng((seed, 0x3A5))
    n = int(seconds * SAMPLE_RATE)
    t = _t(n)
    out = np.zeros(n)
    scale = 220.0 * 2.0 ** (np.array([0, 3, 5, 7, 10, 12]) / 12.0)
    pos = 0
    while pos < n:
        dur = int(SAMPLE_RATE * (1.0 + rng.random()))
        hi = min(pos + dur, n)
        chord = rng.choice(scale, size=3, replace=False)
        seg = np.zeros(hi - pos)
        ts = t[pos:hi]
        for f in chord:
            for h in range(1, 5):
                seg += (0.5 / h) * np.sin(2 * np.pi * f * h * ts + rng.random() * 6.28)
        env = np.minimum(np.arange(hi - pos) / (0.05 * SAMPLE_RATE), 1.0)
        out[pos:hi] = seg * env
        pos = hi
    out += 0.02 * rng.standard_normal(n)  # room noise, shared across classes
    gain = 0.14 + 0.1 * rng.random()
    out *= gain / (np.sqrt(np.mean(out**2)) + 1e-9)
    return np.clip(out, -1.0, 1.0)


def speech(seed: int, seconds: float) -> np.ndarray:
    """Voiced syllable bursts: low pitch harmonics shaped by formant bands."""
    rng = _rng((seed, 0x5BE))
    n = int(seconds * SAMPLE_RATE)
    t = _t(n)
    f0 = 105.0 + 40.0 * rng.random()
    formants = (500 + 150 * rng.random(), 1400 + 300 * rng.random())
    voiced = np.zeros(n)
    for h in range(1, 18):
        f = f0 * h
        w = sum(np.exp(-((f - fo) ** 2) / (2 * 250.0**2)) for fo in formants) + 0.08
        voiced += w * np.sin(2 * np.pi * f * t + rng.random() * 6.28)
    # syllabic envelope with pauses
    env = np.zeros(n)
    pos = 0
    while pos < n:
        if rng.random() < 0.18:  # pause
            pos += int(SAMPLE_RATE * (0.2 + 0.3 * rng.random()))
            continue
        dur = int(SAMPLE_RATE * (0.09 + 0.12 * rng.random()))
        hi = min(pos + dur, n)
        ramp = np.sin(np.linspace(0, np.pi, hi - pos)) ** 0.7
        env[pos:hi] = ramp
        pos = hi + int(SAMPLE_RATE * 0.04)
    out = voiced * env + 0.02 * rng.standard_normal(n)
    if rng.random() < 0.3:  # faint music bed under some speech
        out += 0.15 * music((seed, 0xBED), seconds)
    gain = 0.12 + 0.1 * rng.random()
    out *= gain / (np.sqrt(np.mean(out**2)) + 1e-9)
    return np.clip(out, -1.0, 1.0)


def ad(seed: int, seconds: float) -> np.ndarray:
    """Bright fast jingle over a compressed voiceover: denser spectrum and
    hotter level than the other classes."""
    rng = _rng((seed, 0xAD))
    n = int(seconds * SAMPLE_RATE)
    t = _t(n)
    jingle = np.zeros(n)
    notes = 900.0 * 2.0 ** (np.array([0, 4, 7, 12, 7, 4]) / 12.0)
    note_len = int(SAMPLE_RATE * 0.125)
    for i, pos in enumerate(range(0, n, note_len)):
        hi = min(pos + note_len, n)
        f = notes[i % len(notes)] * (1.0 + 0.02 * rng.standard_normal())
        ts = t[pos:hi]
        env = np.exp(-np.arange(hi - pos) / (0.05 * SAMPLE_RATE))
        jingle[pos:hi] = env * (np.sin(2 * np.pi * f * ts) + 0.4 * np.sin(2 * np.pi * 2 * f * ts))
    voice = speech((seed, 1), seconds)
    out = (0.4 + 0.3 * rng.random()) * jingle + 0.8 * voice + 0.02 * rng.standard_normal(n)
    out = np.tanh(2.5 * out)  # broadcast compression
    gain = 0.2 + 0.12 * rng.random()
    out *= gain / (np.sqrt(np.mean(out**2)) + 1e-9)
    return np.clip(out, -1.0, 1.0)


GENERATORS = {"music": music, "speech": speech, "ad": ad}


def build_stream(seed: int, plan) -> tuple[AudioStream, list]:
    """Concatenate labeled segments; plan is [(class, seconds), ...] with
    4-second-multiple durations. Returns (stream, per-window labels)."""
    parts = []
    labels = []
    for i, (cls, seconds) in enumerate(plan):
        if seconds % 4:
            raise ValueError("segment durations must be multiples of 4 s")
        parts.append(GENERATORS[cls]((seed, i), seconds))
        labels.extend([cls] * (int(seconds) // 4))
    return AudioStream(np.concatenate(parts)), labels


def random_plan(seed: int, total_seconds: int = 60) -> list:
    """A segment plan mixing all three classes, ads guaranteed present."""
    rng = _rng((seed, 0x91A))
    plan = []
    remaining = total_seconds
    classes = ["music", "speech", "ad"]
    while remaining > 0:
        cls = classes[int(rng.integers(0, 3))] if remaining > 8 else "ad"
        if not any(c == "ad" for c, _ in plan) and remaining <= 12:
            cls = "ad"
        dur = int(rng.choice([4, 8, 12]))
        dur = min(dur, remaining)
        plan.append((cls, dur))
        remaining -= dur
    return plan
