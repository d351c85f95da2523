"""Layers with analytic forward/backward passes.

Conventions: batched inputs, images as (N, H, W, C), vectors as (N, D).
forward returns (y, cache); backward takes (dy, cache) and returns
(dx, param_grads). Parameters live in `.params` keyed by name.

Subgradient choices (pinned for finite-difference tests): relu'(0) = 0,
maxpool ties resolve to the first index in row-major window order.
"""

from __future__ import annotations

import numpy as np


class Layer:
    params: dict

    def __init__(self):
        self.params = {}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dy, cache):
        raise NotImplementedError

    def spec(self) -> dict:
        return {"type": type(self).__name__.lower()}


class ReLU(Layer):
    def forward(self, x):
        mask = x > 0
        return x * mask, mask

    def backward(self, dy, cache):
        return dy * cache, {}


class Sigmoid(Layer):
    def forward(self, x):
        y = sigmoid(x)
        return y, y

    def backward(self, dy, cache):
        return dy * cache * (1.0 - cache), {}


class Softmax(Layer):
    """Softmax over the last axis."""

    def forward(self, x):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        return y, y

    def backward(self, dy, cache):
        y = cache
        dot = np.sum(dy * y, axis=-1, keepdims=True)
        return y * (dy - dot), {}


class Flatten(Layer):
    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dy, cache):
        return dy.reshape(cache), {}


class Dense(Layer):
    def __init__(self, w: np.ndarray, b: np.ndarray):
        super().__init__()
        self.params = {"w": w, "b": b}

    @classmethod
    def create(cls, n_in: int, n_out: int, rng: np.random.Generator, dtype=np.float32):
        scale = np.sqrt(2.0 / n_in)
        w = (rng.standard_normal((n_in, n_out)) * scale).astype(dtype)
        b = np.zeros(n_out, dtype=dtype)
        return cls(w, b)

    def forward(self, x):
        return x @ self.params["w"] + self.params["b"], x

    def backward(self, dy, cache):
        x = cache
        dw = x.T @ dy
        db = np.sum(dy.astype(np.float64), axis=0).astype(dy.dtype)
        dx = dy @ self.params["w"].T
        return dx, {"w": dw, "b": db}

    def spec(self):
        return {"type": "dense"}


class Conv2D(Layer):
    """k x k convolution with symmetric zero padding and square stride."""

    def __init__(self, w: np.ndarray, b: np.ndarray, stride: int = 1, pad: int = 0):
        super().__init__()
        self.params = {"w": w, "b": b}
        self.stride = int(stride)
        self.pad = int(pad)

    @classmethod
    def create(cls, k: int, c_in: int, c_out: int, rng: np.random.Generator, stride=1, pad=0, dtype=np.float32):
        scale = np.sqrt(2.0 / (k * k * c_in))
        w = (rng.standard_normal((k, k, c_in, c_out)) * scale).astype(dtype)
        b = np.zeros(c_out, dtype=dtype)
        return cls(w, b, stride, pad)

    def forward(self, x):
        w = self.params["w"]
        kh, kw, c_in, c_out = w.shape
        s, p = self.stride, self.pad
        if p:
            x_pad = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
        else:
            x_pad = x
        n, hp, wp, _ = x_pad.shape
        oh = (hp - kh) // s + 1
        ow = (wp - kw) // s + 1
        windows = np.lib.stride_tricks.sliding_window_view(x_pad, (kh, kw), axis=(1, 2))
        windows = windows[:, ::s, ::s]  # (N, oh, ow, Cin, kh, kw)
        cols = np.ascontiguousarray(windows.transpose(0, 1, 2, 4, 5, 3)).reshape(n * oh * ow, kh * kw * c_in)
        y = cols @ w.reshape(kh * kw * c_in, c_out) + self.params["b"]
        y = y.reshape(n, oh, ow, c_out)
        return y, (cols, x.shape)

    def backward(self, dy, cache):
        cols, x_shape = cache
        w = self.params["w"]
        kh, kw, c_in, c_out = w.shape
        s, p = self.stride, self.pad
        n, h, win, _ = x_shape
        oh, ow = dy.shape[1], dy.shape[2]
        dy_flat = dy.reshape(n * oh * ow, c_out)
        dw = (cols.T @ dy_flat).reshape(kh, kw, c_in, c_out)
        db = np.sum(dy_flat.astype(np.float64), axis=0).astype(dy.dtype)
        dcols = (dy_flat @ w.reshape(kh * kw * c_in, c_out).T).reshape(n, oh, ow, kh, kw, c_in)
        dx_pad = np.zeros((n, h + 2 * p, win + 2 * p, c_in), dtype=dy.dtype)
        for i in range(kh):
            for j in range(kw):
                dx_pad[:, i : i + oh * s : s, j : j + ow * s : s, :] += dcols[:, :, :, i, j, :]
        dx = dx_pad[:, p : p + h, p : p + win, :] if p else dx_pad
        return dx, {"w": dw, "b": db}

    def spec(self):
        return {"type": "conv2d", "stride": self.stride, "pad": self.pad}


class MaxPool2D(Layer):
    """Non-overlapping k x k max pooling; input dims must be divisible by k."""

    def __init__(self, k: int = 2):
        super().__init__()
        self.k = int(k)

    def forward(self, x):
        k = self.k
        n, h, w, c = x.shape
        if h % k or w % k:
            raise ValueError(f"maxpool input {h}x{w} not divisible by {k}")
        view = x.reshape(n, h // k, k, w // k, k, c).transpose(0, 1, 3, 5, 2, 4)
        flat = view.reshape(n, h // k, w // k, c, k * k)
        idx = np.argmax(flat, axis=-1)  # first max wins on ties
        y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        return y, (idx, x.shape)

    def backward(self, dy, cache):
        idx, x_shape = cache
        k = self.k
        n, h, w, c = x_shape
        dflat = np.zeros((n, h // k, w // k, c, k * k), dtype=dy.dtype)
        np.put_along_axis(dflat, idx[..., None], dy[..., None], axis=-1)
        dx = dflat.reshape(n, h // k, w // k, c, k, k).transpose(0, 1, 4, 2, 5, 3).reshape(n, h, w, c)
        return dx, {}

    def spec(self):
        return {"type": "maxpool2d", "k": self.k}


def sigmoid(x):
    out = np.empty_like(x, dtype=np.asarray(x).dtype)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
