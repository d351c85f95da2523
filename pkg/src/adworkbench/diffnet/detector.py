"""Toy grid detector exposing the YOLO-style output contract.

Single anchor per cell on an 8x8 grid over a 256x256 input: sigmoid
confidence, sigmoid cell-relative center offsets, exponential width/height
scaling. Exactly B = grid^2 boxes regardless of content.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adworkbench.imaging import Image, gaussian_blur, resize_array_bilinear
from adworkbench.diffnet.layers import Conv2D, ReLU, sigmoid
from adworkbench.diffnet.network import Network

INPUT_SIZE = 256
GRID = 8
CONF_THRESHOLD = 0.5
NMS_IOU = 0.5
ANCHOR_W = 0.25
ANCHOR_H = 0.19
LOGIT_CLIP = 8.0  # keeps exp() sane for unconstrained size logits

COORD_WEIGHT = 5.0
NOOBJ_WEIGHT = 0.5


@dataclass(frozen=True)
class DetectorConfig:
    input_size: int = INPUT_SIZE
    grid: int = GRID
    conf_threshold: float = CONF_THRESHOLD
    nms_iou: float = NMS_IOU
    anchor: tuple = (ANCHOR_W, ANCHOR_H)

    def __post_init__(self):
        if not 0.0 < self.conf_threshold < 1.0:
            raise ValueError("conf_threshold must be in (0,1)")

    @property
    def n_boxes(self) -> int:
        return self.grid * self.grid


@dataclass
class DetectorOutput:
    boxes: np.ndarray  # (B, 4) as (cx, cy, w, h), normalized page coordinates
    confidences: np.ndarray  # (B,) in [0,1]

    def __post_init__(self):
        if len(self.boxes) != len(self.confidences):
            raise ValueError("boxes/confidences length mismatch")


@dataclass
class Detection:
    box: np.ndarray
    confidence: float
    index: int


def build_detector(seed: int = 0, cfg: DetectorConfig = DetectorConfig()) -> Network:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xDE7)))
    widths = (8, 16, 32, 64, 96)
    layers = []
    c_in = 3
    for c_out in widths:
        layers.append(Conv2D.create(3, c_in, c_out, rng, stride=2, pad=1))
        layers.append(ReLU())
        c_in = c_out
    layers.append(Conv2D.create(1, c_in, 5, rng, stride=1, pad=0))
    return Network(layers)


def detector_input(page: Image, cfg: DetectorConfig = DetectorConfig()) -> np.ndarray:
    """Bilinear-resized (S, S, 3) float32 network input for a page image."""
    arr = page.rgb()
    if arr.shape[0] != cfg.input_size or arr.shape[1] != cfg.input_size:
        arr = resize_array_bilinear(arr, cfg.input_size, cfg.input_size)
    return arr.astype(np.float32)


def decode_grid(raw: np.ndarray, cfg: DetectorConfig = DetectorConfig()) -> DetectorOutput:
    """Map raw (G, G, 5) logits to boxes + confidences in page coordinates."""
    g = cfg.grid
    if raw.shape != (g, g, 5):
        raise ValueError(f"expected ({g},{g},5) grid output, got {raw.shape}")
    conf = sigmoid(raw[:, :, 0]).ravel()
    cols, rows = np.meshgrid(np.arange(g), np.arange(g))
    cx = (cols.ravel() + sigmoid(raw[:, :, 1]).ravel()) / g
    cy = (rows.ravel() + sigmoid(raw[:, :, 2]).ravel()) / g
    w = cfg.anchor[0] * np.exp(np.clip(raw[:, :, 3].ravel(), -LOGIT_CLIP, LOGIT_CLIP))
    h = cfg.anchor[1] * np.exp(np.clip(raw[:, :, 4].ravel(), -LOGIT_CLIP, LOGIT_CLIP))
    boxes = np.stack([cx, cy, w, h], axis=1)
    return DetectorOutput(boxes=boxes, confidences=conf)


def grid_detect_raw(net: Network, page: Image, cfg: DetectorConfig = DetectorConfig()) -> np.ndarray:
    x = detector_input(page, cfg)[None]
    return net.forward(x)[0].reshape(cfg.grid, cfg.grid, 5)


def grid_detect(net: Network, page: Image, cfg: DetectorConfig = DetectorConfig()) -> DetectorOutput:
    return decode_grid(grid_detect_raw(net, page, cfg), cfg)


# ---------------------------------------------------------------------------
# boxes


def iou(a, b) -> float:
    """Intersection over union for (cx, cy, w, h) boxes; 0 when the union is 0."""
    ax0, ay0 = a[0] - a[2] / 2, a[1] - a[3] / 2
    ax1, ay1 = a[0] + a[2] / 2, a[1] + a[3] / 2
    bx0, by0 = b[0] - b[2] / 2, b[1] - b[3] / 2
    bx1, by1 = b[0] + b[2] / 2, b[1] + b[3] / 2
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = max(a[2], 0) * max(a[3], 0) + max(b[2], 0) * max(b[3], 0) - inter
    if union <= 0:
        return 0.0
    return float(inter / union)


def filter_boxes(out: DetectorOutput, tau: float = CONF_THRESHOLD, nms_iou: float = NMS_IOU):
    """Confidence threshold (strictly above tau) then greedy NMS.

    Deterministic: candidates sorted by descending confidence with ties broken
    by box index.
    """
    keep_idx = np.flatnonzero(out.confidences > tau)
    order = keep_idx[np.argsort(-out.confidences[keep_idx], kind="stable")]
    selected = []
    for i in order:
        if all(iou(out.boxes[i], out.boxes[j]) <= nms_iou for j in selected):
            selected.append(i)
    return [Detection(box=out.boxes[i].copy(), confidence=float(out.confidences[i]), index=int(i)) for i in selected]


# ---------------------------------------------------------------------------
# training targets and loss


def detector_target(gt_boxes, cfg: DetectorConfig = DetectorConfig()):
    """(obj mask, coord targets) for one page; responsibility by box center."""
    g = cfg.grid
    obj = np.zeros((g, g), dtype=bool)
    coords = np.zeros((g, g, 4), dtype=np.float64)
    for box in gt_boxes:
        cx, cy, w, h = box
        col = min(int(cx * g), g - 1)
        row = min(int(cy * g), g - 1)
        obj[row, col] = True
        coords[row, col] = (
            cx * g - col,
            cy * g - row,
            np.log(max(w, 1e-6) / cfg.anchor[0]),
            np.log(max(h, 1e-6) / cfg.anchor[1]),
        )
    return obj, coords


def detector_loss(obj_masks, coord_targets, cfg: DetectorConfig = DetectorConfig()):
    """Loss adapter over raw batched grid logits (N, G, G, 5):
    BCE on confidence (objectness) + squared error on coordinates."""

    def loss(y):
        n = y.shape[0]
        y = y.reshape(n, cfg.grid, cfg.grid, 5)
        obj = obj_masks
        t = coord_targets
        conf_logit = y[:, :, :, 0]
        p = sigmoid(conf_logit)
        tgt = obj.astype(y.dtype)
        weight = np.where(obj, 1.0, NOOBJ_WEIGHT)
        bce = np.maximum(conf_logit, 0) - conf_logit * tgt + np.log1p(np.exp(-np.abs(conf_logit)))
        conf_term = np.sum(weight * bce, dtype=np.float64)
        dconf = weight * (p - tgt)

        sxy = sigmoid(y[:, :, :, 1:3])
        dxy_err = sxy - t[:, :, :, 0:2]
        dwh_err = y[:, :, :, 3:5] - t[:, :, :, 2:4]
        m = obj[:, :, :, None]
        coord_term = COORD_WEIGHT * (np.sum(m * dxy_err**2, dtype=np.float64) + np.sum(m * dwh_err**2, dtype=np.float64))

        grad = np.zeros_like(y)
        grad[:, :, :, 0] = dconf
        grad[:, :, :, 1:3] = 2 * COORD_WEIGHT * m * dxy_err * sxy * (1 - sxy)
        grad[:, :, :, 3:5] = 2 * COORD_WEIGHT * m * dwh_err
        scale = 1.0 / n
        return float((conf_term + coord_term) * scale), (grad * scale).reshape(n, -1).reshape(y.shape).astype(y.dtype)

    return loss


# ---------------------------------------------------------------------------
# saliency


def saliency_map(net: Network, page: Image, cfg: DetectorConfig | None = DetectorConfig(), smooth_sigma: float = 2.0) -> Image:
    """|d(sum of confidences)/d(pixel)|, channel-max, Gaussian-smoothed,
    min-max normalized. With cfg=None the raw output sum is used and the page
    is fed unresized (generic-network mode)."""
    if cfg is not None:
        x = detector_input(page, cfg)[None].astype(np.float64)

        def loss(y):
            yr = y.reshape(1, cfg.grid, cfg.grid, 5)
            p = sigmoid(yr[:, :, :, 0])
            g = np.zeros_like(yr)
            g[:, :, :, 0] = p * (1 - p)
            return float(np.sum(p, dtype=np.float64)), g.reshape(y.shape)

    else:
        # generic mode: sum of raw outputs, page fed flattened and unresized
        x = page.data.reshape(1, -1).astype(np.float64)

        def loss(y):
            return float(np.sum(y, dtype=np.float64)), np.ones_like(y)

    y, caches = net.forward_with_caches(x)
    _, dy = loss(y)
    dx, _ = net.backward(dy, caches)
    sal = np.abs(dx[0]).reshape(page.height, page.width, page.channels) if cfg is None else np.abs(dx[0])
    if sal.ndim == 3:
        sal = sal.max(axis=2)
    if smooth_sigma > 0:
        sal = gaussian_blur(sal, smooth_sigma)
    peak = sal.max()
    if peak > 0:
        sal = sal / peak
    return Image(np.clip(sal, 0.0, 1.0)[:, :, None])
