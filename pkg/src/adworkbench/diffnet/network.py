"""Network container, loss adapters, input gradients, and weight-file I/O.

Weight files are JSON: a layer manifest plus base64-encoded little-endian
float32 blobs, bit-exact on round trip.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from adworkbench.diffnet.layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sigmoid, Softmax

WEIGHT_FILE_VERSION = 1


class Network:
    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x, _ = layer.forward(x)
        return x

    def forward_with_caches(self, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, dy, caches):
        """Backprop a cotangent; returns (dx, [param_grads per layer])."""
        grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            dy, g = self.layers[i].backward(dy, caches[i])
            grads[i] = g
        return dy, grads

    def parameters(self):
        for layer in self.layers:
            for name, value in layer.params.items():
                yield layer, name, value

    def copy(self) -> "Network":
        return load_manifest(save_manifest(self))


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Deterministic layer-by-layer evaluation; the network is not mutated."""
    return net.forward(x)


def input_gradient(net: Network, loss, x: np.ndarray):
    """Analytic d(loss)/dx. `loss` maps the network output to (value, grad)."""
    y, caches = net.forward_with_caches(x)
    value, dy = loss(y)
    dx, _ = net.backward(dy, caches)
    return value, dx


# ---------------------------------------------------------------------------
# loss adapters: y -> (value, dvalue/dy)


def sum_loss(y):
    return float(np.sum(y, dtype=np.float64)), np.ones_like(y)


def bce_with_logits_loss(targets):
    """Mean binary cross-entropy on logits; targets in {0,1}, shape matching y."""

    def loss(y):
        t = targets.reshape(y.shape)
        # stable log(1+exp): max(y,0) - y*t + log1p(exp(-|y|))
        val = np.maximum(y, 0) - y * t + np.log1p(np.exp(-np.abs(y)))
        n = y.size
        p = 1.0 / (1.0 + np.exp(-y))
        return float(np.sum(val, dtype=np.float64) / n), ((p - t) / n).astype(y.dtype)

    return loss


def ce_with_logits_loss(labels):
    """Mean softmax cross-entropy on logits (N, C); integer labels (N,)."""

    def loss(y):
        z = y - y.max(axis=-1, keepdims=True)
        logsumexp = np.log(np.sum(np.exp(z), axis=-1, keepdims=True))
        logp = z - logsumexp
        n = y.shape[0]
        val = -float(np.sum(logp[np.arange(n), labels], dtype=np.float64) / n)
        grad = np.exp(logp)
        grad[np.arange(n), labels] -= 1.0
        return val, (grad / n).astype(y.dtype)

    return loss


# ---------------------------------------------------------------------------
# serialization


def _encode(arr: np.ndarray) -> dict:
    a = np.ascontiguousarray(arr, dtype="<f4")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(blob: dict) -> np.ndarray:
    raw = base64.b64decode(blob["data"])
    return np.frombuffer(raw, dtype="<f4").reshape(blob["shape"]).astype(np.float32)


def save_manifest(net: Network) -> dict:
    layers = []
    for layer in net.layers:
        entry = layer.spec()
        if layer.params:
            entry["weights"] = {name: _encode(value) for name, value in layer.params.items()}
        layers.append(entry)
    return {"version": WEIGHT_FILE_VERSION, "layers": layers}


def load_manifest(manifest: dict) -> Network:
    if manifest.get("version") != WEIGHT_FILE_VERSION:
        raise ValueError(f"unsupported weight file version {manifest.get('version')}")
    layers = []
    for entry in manifest["layers"]:
        kind = entry["type"]
        weights = {name: _decode(blob) for name, blob in entry.get("weights", {}).items()}
        if kind == "conv2d":
            layers.append(Conv2D(weights["w"], weights["b"], entry["stride"], entry["pad"]))
        elif kind == "dense":
            layers.append(Dense(weights["w"], weights["b"]))
        elif kind == "relu":
            layers.append(ReLU())
        elif kind == "sigmoid":
            layers.append(Sigmoid())
        elif kind == "softmax":
            layers.append(Softmax())
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "maxpool2d":
            layers.append(MaxPool2D(entry["k"]))
        else:
            raise ValueError(f"unknown layer type {kind!r}")
    return Network(layers)


def save_network(net: Network, path, extra: dict | None = None) -> None:
    manifest = save_manifest(net)
    if extra:
        manifest["extra"] = extra
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True)
        fh.write("\n")


def load_network(path, with_extra: bool = False):
    with open(path) as fh:
        manifest = json.load(fh)
    net = load_manifest(manifest)
    if with_extra:
        return net, manifest.get("extra", {})
    return net
