"""Window classification (music / speech / ad) and run-length post-processing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adworkbench.audio.mfcc import FRAMES_PER_WINDOW, N_COEFF, window_features
from adworkbench.audio.stream import AudioStream
from adworkbench.diffnet.layers import Dense, ReLU, Softmax
from adworkbench.diffnet.network import Network

CLASSES = ("music", "speech", "ad")
AD = CLASSES.index("ad")
WINDOW_SECONDS = 4


@dataclass
class SegmentLabels:
    probs: np.ndarray  # (windows, 3), rows sum to 1
    classes: list  # class name per window
    window_seconds: float = WINDOW_SECONDS

    def __post_init__(self):
        if not np.allclose(self.probs.sum(axis=1), 1.0, atol=1e-6):
            raise ValueError("window probabilities must sum to 1")


def build_audio_classifier(seed: int = 0) -> Network:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xAD10)))
    return Network(
        [
            Dense.create(FRAMES_PER_WINDOW * N_COEFF, 64, rng),
            ReLU(),
            Dense.create(64, 3, rng),
        ]
    )


def normalize_features(feats: np.ndarray, stats: dict) -> np.ndarray:
    """Per-coefficient standardization with training-time statistics."""
    mean = np.asarray(stats["mean"])
    std = np.asarray(stats["std"])
    return (feats - mean) / std


def feature_stats(feats: np.ndarray) -> dict:
    flat = feats.reshape(-1, feats.shape[-1])
    return {"mean": flat.mean(axis=0).tolist(), "std": (flat.std(axis=0) + 1e-8).tolist()}


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def classify_segments(net: Network, stream: AudioStream, stats: dict) -> SegmentLabels:
    """Non-overlapping 4 s windows; softmax class probabilities per window."""
    feats = normalize_features(window_features(stream), stats)
    logits = net.forward(feats.reshape(len(feats), -1).astype(np.float32))
    probs = _softmax(logits.astype(np.float64))
    classes = [CLASSES[i] for i in probs.argmax(axis=1)]
    return SegmentLabels(probs=probs, classes=classes)


def merge_and_strip(labels: SegmentLabels):
    """Run-length merge of consecutive equal classes; the censor plan removes
    ad intervals. Returns (intervals, keep_plan) with second timestamps."""
    intervals = []
    for i, cls in enumerate(labels.classes):
        t0 = i * labels.window_seconds
        t1 = t0 + labels.window_seconds
        if intervals and intervals[-1][0] == cls:
            prev = intervals.pop()
            intervals.append((cls, prev[1], t1))
        else:
            intervals.append((cls, t0, t1))
    keep_plan = [(t0, t1) for cls, t0, t1 in intervals if cls != "ad"]
    return intervals, keep_plan
