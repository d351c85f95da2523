"""Frame-level ad/non-ad classifier on 64x64 RGB tiles."""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import Image, resize_array_bilinear
from adworkbench.diffnet.layers import Conv2D, Dense, Flatten, ReLU, sigmoid
from adworkbench.diffnet.network import Network

FRAME_SIZE = 64


def build_frame_classifier(seed: int = 0) -> Network:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF7A)))
    return Network(
        [
            Conv2D.create(3, 3, 8, rng, stride=2, pad=1),
            ReLU(),
            Conv2D.create(3, 8, 16, rng, stride=2, pad=1),
            ReLU(),
            Conv2D.create(3, 16, 32, rng, stride=2, pad=1),
            ReLU(),
            Flatten(),
            Dense.create(8 * 8 * 32, 64, rng),
            ReLU(),
            Dense.create(64, 1, rng),
        ]
    )


def frame_input(frame: Image) -> np.ndarray:
    arr = frame.rgb()
    if arr.shape[0] != FRAME_SIZE or arr.shape[1] != FRAME_SIZE:
        arr = resize_array_bilinear(arr, FRAME_SIZE, FRAME_SIZE)
    return arr.astype(np.float32)


def classify_frame(net: Network, frame: Image) -> float:
    """Ad probability in [0,1]; the network outputs the logit."""
    logit = net.forward(frame_input(frame)[None])[0, 0]
    return float(sigmoid(np.array([logit]))[0])
