"""SGD with momentum, seeded and order-fixed for bit-reproducibility."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adworkbench.diffnet.network import Network

MOMENTUM = 0.9
BATCH_SIZE = 16


@dataclass
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.01
    seed: int = 0
    batch_size: int = BATCH_SIZE
    momentum: float = MOMENTUM
    lr_decay: float = 1.0  # multiplicative per-epoch decay


def train(net: Network, inputs, target_factory, cfg: TrainConfig):
    """Train in place on (inputs, per-batch loss closures) and return the loss trace.

    `target_factory(idx)` returns a loss adapter y -> (value, grad) for the
    minibatch with dataset indices `idx`; inputs is an (N, ...) array.
    Deterministic given cfg.seed: fixed shuffle, fixed accumulation order.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xD1FF)))
    velocity = {id(p): np.zeros_like(p, dtype=np.float64) for _, _, p in net.parameters()}
    trace = []
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x = inputs[idx]
            loss = target_factory(idx)
            y, caches = net.forward_with_caches(x)
            value, dy = loss(y)
            _, grads = net.backward(dy, caches)
            for layer, layer_grads in zip(net.layers, grads):
                for name, g in layer_grads.items():
                    p = layer.params[name]
                    v = velocity[id(p)]
                    v *= cfg.momentum
                    v -= lr * g.astype(np.float64)
                    layer.params[name] = (p.astype(np.float64) + v).astype(p.dtype)
                    velocity[id(layer.params[name])] = velocity.pop(id(p))
            epoch_loss += value
            n_batches += 1
        trace.append(epoch_loss / max(n_batches, 1))
        lr *= cfg.lr_decay
    return trace
