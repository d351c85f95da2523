"""PGD on the raw waveform against the window classifier.

Gradients flow through the MFCC chain; the perturbation support is limited to
windows currently classified as ads, so all other samples stay bit-identical.
"""

from __future__ import annotations

import numpy as np

from adworkbench.audio.classify import AD, CLASSES, classify_segments, normalize_features
from adworkbench.audio.mfcc import WINDOW_SAMPLES, mfcc_window_grad, window_features
from adworkbench.audio.stream import AudioStream
from adworkbench.diffnet.network import Network
from adworkbench.attacks.core import AttackConfig, AttackResult, PerturbationBudget


def _ad_margin_and_grad(net: Network, block: np.ndarray, stats: dict):
    """Ad-vs-best-other logit margin of one 4 s block and its sample gradient.

    The margin is the attack surrogate for the ad confidence: the softmax
    probability itself saturates to 1.0 on this classifier and its gradient
    vanishes, while the margin's gradient never does. The window flips class
    exactly when the margin goes negative.
    """
    feats = window_features(AudioStream(np.clip(block, -1, 1)))[0]
    normed = normalize_features(feats, stats)
    x = normed.reshape(1, -1).astype(np.float64)
    y, caches = net.forward_with_caches(x)
    logits = y[0]
    others = [i for i in range(len(CLASSES)) if i != AD]
    best_other = others[int(np.argmax(logits[others]))]
    margin = float(logits[AD] - logits[best_other])
    dlogits = np.zeros_like(y)
    dlogits[0, AD] = 1.0
    dlogits[0, best_other] = -1.0
    dx, _ = net.backward(dlogits, caches)
    dfeats = dx.reshape(feats.shape) / np.asarray(stats["std"])
    grad = mfcc_window_grad(block, dfeats)
    return margin, grad, CLASSES[int(np.argmax(logits))]


def audio_attack(net: Network, stream: AudioStream, budget: PerturbationBudget, cfg: AttackConfig, stats: dict):
    """Flip every ad window below the others; returns (perturbed stream,
    AttackResult). linf budget on samples; delta is zero outside ad windows."""
    if budget.norm != "linf":
        raise ValueError("audio attack uses an linf sample budget")
    labels = classify_segments(net, stream, stats)
    ad_windows = [i for i, c in enumerate(labels.classes) if c == "ad"]
    if not ad_windows:
        raise ValueError("no ad windows to attack")
    samples = np.array(stream.samples)
    trace = []
    for i in ad_windows:
        lo, hi = i * WINDOW_SAMPLES, (i + 1) * WINDOW_SAMPLES
        x = samples[lo:hi].copy()
        delta = np.zeros_like(x)
        momentum = np.zeros_like(x)
        for _ in range(cfg.steps):
            margin, grad, cls = _ad_margin_and_grad(net, x + delta, stats)
            trace.append(margin)
            if cls != "ad" and margin < -0.5:  # small slack against quantization
                break
            momentum = 0.9 * momentum + grad / (np.abs(grad).mean() + 1e-12)
            delta = np.clip(delta - cfg.step_size * np.sign(momentum), -budget.epsilon, budget.epsilon)
            delta = np.clip(x + delta, -1.0, 1.0) - x
        samples[lo:hi] = x + delta
    perturbed = AudioStream(samples, stream.sample_rate)
    after = classify_segments(net, perturbed, stats)
    success = all(c != "ad" for c in after.classes)
    delta_full = perturbed.samples - stream.samples
    return perturbed, AttackResult(
        delta=delta_full,
        success=bool(success),
        loss_trace=trace,
        queries=0,
        achieved_norm=float(np.max(np.abs(delta_full))),
        info={"ad_windows": ad_windows, "classes_after": after.classes},
    )
