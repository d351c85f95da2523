"""Page-level attacks against the grid detector: universal perturbations
(tiled overlay or per-region masks), honeypot crafting, and cross-boundary
blocking.

The differentiable chain is page -> apply perturbation -> bilinear resize to
detector input -> network -> confidence loss, with analytic adjoints for
every stage, so PGD reaches the perturbation variable directly.
"""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import (
    Image,
    quantize,
    resize_array_bilinear,
    resize_array_bilinear_adjoint,
)
from adworkbench.diffnet.detector import DetectorConfig, decode_grid, filter_boxes, grid_detect, iou
from adworkbench.diffnet.layers import sigmoid
from adworkbench.diffnet.network import Network
from adworkbench.attacks.core import AttackConfig, AttackResult, PerturbationBudget, project
from adworkbench.attacks.losses import region_cells


# ---------------------------------------------------------------------------
# loss adapters on raw grid logits


def _fn_adapter(cfg: DetectorConfig, tau: float, kappa: float):
    """sum_b max(conf_b - (tau-kappa), 0) on raw logits, with gradient."""

    def adapter(y):
        yr = y.reshape(-1, cfg.grid, cfg.grid, 5)
        p = sigmoid(yr[:, :, :, 0])
        margin = p - (tau - kappa)
        val = float(np.sum(np.maximum(margin, 0.0), dtype=np.float64))
        g = np.zeros_like(yr)
        g[:, :, :, 0] = (margin > 0) * p * (1 - p)
        return val, g.reshape(y.shape).astype(y.dtype)

    return adapter


def _fp_adapter(cfg: DetectorConfig, tau: float, kappa: float, cells: np.ndarray | None):
    """sum over selected cells of max(tau+kappa - conf, 0) on raw logits."""
    mask = np.ones((cfg.grid, cfg.grid), dtype=bool) if cells is None else cells

    def adapter(y):
        yr = y.reshape(-1, cfg.grid, cfg.grid, 5)
        p = sigmoid(yr[:, :, :, 0])
        margin = (tau + kappa) - p
        active = (margin > 0) & mask
        val = float(np.sum(np.where(active, margin, 0.0), dtype=np.float64))
        g = np.zeros_like(yr)
        g[:, :, :, 0] = -active * p * (1 - p)
        return val, g.reshape(y.shape).astype(y.dtype)

    return adapter


def _conf_max_adapter(cfg: DetectorConfig, cells: np.ndarray):
    """Negated sum of selected cells' confidences (maximize via minimizing)."""

    def adapter(y):
        yr = y.reshape(-1, cfg.grid, cfg.grid, 5)
        p = sigmoid(yr[:, :, :, 0])
        val = -float(np.sum(p[:, cells], dtype=np.float64))
        g = np.zeros_like(yr)
        g[:, :, :, 0] = np.where(cells, -(p * (1 - p)), 0.0)
        return val, g.reshape(y.shape).astype(y.dtype)

    return adapter


def detector_page_loss(net: Network, page_arr: np.ndarray, adapter, cfg: DetectorConfig):
    """(value, d value / d page pixels) through the resize and the network."""
    x = resize_array_bilinear(page_arr, cfg.input_size, cfg.input_size)[None].astype(np.float32)
    y, caches = net.forward_with_caches(x)
    val, dy = adapter(y)
    dx, _ = net.backward(dy, caches)
    dpage = resize_array_bilinear_adjoint(dx[0].astype(np.float64), page_arr.shape[0], page_arr.shape[1])
    return val, dpage


# ---------------------------------------------------------------------------
# perturbation variables (forward apply + vjp to the variable)


class TileVariable:
    """A full-range [0,1] tile overlaid at fixed opacity; the page-space
    perturbation is bounded by alpha pointwise by construction."""

    def __init__(self, shape, alpha):
        self.alpha = float(alpha)
        self.value = np.full(shape, 0.5)

    def apply(self, page_arr: np.ndarray) -> np.ndarray:
        h, w = page_arr.shape[:2]
        th, tw = self.value.shape[:2]
        reps = (-(-h // th), -(-w // tw), 1)
        tiled = np.tile(self.value, reps)[:h, :w]
        return (1.0 - self.alpha) * page_arr + self.alpha * tiled

    def vjp(self, page_arr: np.ndarray, cot: np.ndarray) -> np.ndarray:
        h, w = page_arr.shape[:2]
        th, tw = self.value.shape[:2]
        ph = -(-h // th) * th
        pw = -(-w // tw) * tw
        padded = np.zeros((ph, pw, cot.shape[2]))
        padded[:h, :w] = cot
        folded = padded.reshape(ph // th, th, pw // tw, tw, -1).sum(axis=(0, 2))
        return self.alpha * folded

    def step(self, grad: np.ndarray, step_size: float):
        self.value = np.clip(self.value - step_size * np.sign(grad), 0.0, 1.0)

    def page_space_norm(self) -> float:
        return self.alpha


class RegionAddVariable:
    """An additive linf-bounded mask applied inside a (possibly per-page)
    region; application clamps to [0,1]."""

    def __init__(self, shape, budget: PerturbationBudget):
        self.budget = budget
        self.value = np.zeros(shape)

    def apply(self, page_arr: np.ndarray, region) -> np.ndarray:
        x, y, w, h = region
        out = np.array(page_arr)
        out[y : y + h, x : x + w] = np.clip(out[y : y + h, x : x + w] + self.value, 0.0, 1.0)
        return out

    def vjp(self, page_arr: np.ndarray, region, cot: np.ndarray) -> np.ndarray:
        x, y, w, h = region
        raw = page_arr[y : y + h, x : x + w] + self.value
        passthrough = (raw > 0.0) & (raw < 1.0)
        return np.where(passthrough, cot[y : y + h, x : x + w], 0.0)

    def step(self, grad: np.ndarray, step_size: float):
        v = self.value - step_size * np.sign(grad)
        if self.budget.norm == "linf":
            self.value = np.clip(v, -self.budget.epsilon, self.budget.epsilon)
        else:
            n = np.sqrt(np.sum(v**2))
            self.value = v * (self.budget.epsilon / n) if n > self.budget.epsilon else v

    def page_space_norm(self) -> float:
        return self.budget.norm_of(self.value)


def universal_perturbation(
    net: Network,
    pages,
    budget: PerturbationBudget,
    cfg: AttackConfig,
    encoding: str,
    regions=None,
    tile_shape=(64, 64, 3),
    alpha: float = 0.01,
    tau: float | None = None,
    det_cfg: DetectorConfig = DetectorConfig(),
    batch_size: int = 8,
) -> AttackResult:
    """Minimize the detector FN loss summed over pages for one shared
    perturbation. cfg.steps counts minibatch update steps; the dataset is
    reshuffled every epoch from cfg.seed. encoding: "tiled_overlay" (a tile at
    `alpha` opacity) or "region_add" (a mask added inside regions[i] of page i).
    """
    if not pages:
        raise ValueError("empty page dataset")
    tau = det_cfg.conf_threshold if tau is None else tau
    arrs = [p.rgb() if isinstance(p, Image) else np.asarray(p) for p in pages]
    if encoding == "tiled_overlay":
        var = TileVariable(tile_shape, alpha)
    elif encoding == "region_add":
        if regions is None or len(regions) != len(arrs):
            raise ValueError("region_add needs one region per page")
        x0, y0, w0, h0 = regions[0]
        var = RegionAddVariable((h0, w0, 3), budget)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    adapter = _fn_adapter(det_cfg, tau, cfg.kappa)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x0417)))
    n = len(arrs)
    order = rng.permutation(n)
    cursor = 0
    trace = []
    for _ in range(cfg.steps):
        if cursor >= n:
            order = rng.permutation(n)
            cursor = 0
        idx = order[cursor : cursor + batch_size]
        cursor += batch_size
        total = 0.0
        grad = np.zeros_like(var.value)
        for i in idx:
            if encoding == "tiled_overlay":
                page = var.apply(arrs[i])
                val, dpage = detector_page_loss(net, page, adapter, det_cfg)
                grad += var.vjp(arrs[i], dpage)
            else:
                page = var.apply(arrs[i], regions[i])
                val, dpage = detector_page_loss(net, page, adapter, det_cfg)
                grad += var.vjp(arrs[i], regions[i], dpage)
            total += val
        var.step(grad / max(len(idx), 1), cfg.step_size)
        trace.append(total / max(len(idx), 1))
    delta = var.value
    if cfg.quantize:
        delta = quantize(delta) if encoding == "tiled_overlay" else np.round(delta * 255.0) / 255.0
        var.value = delta
    return AttackResult(
        delta=delta,
        success=False,  # evaluated on held-out pages by the caller
        loss_trace=trace,
        queries=0,
        achieved_norm=var.page_space_norm(),
        info={"encoding": encoding, "alpha": alpha},
    )


# ---------------------------------------------------------------------------
# honeypots and cross-boundary blocking


def _px_region_to_norm(region, width, height):
    x, y, w, h = region
    return ((x + w / 2) / width, (y + h / 2) / height, w / width, h / height)


def craft_honeypot(
    net: Network,
    page: Image,
    block_region,
    budget: PerturbationBudget,
    cfg: AttackConfig,
    det_cfg: DetectorConfig = DetectorConfig(),
    min_iou: float = 0.3,
) -> AttackResult:
    """Perturb a uniform block (local background color) inside block_region so
    the detector fires on it. Success: a filtered detection with IoU >=
    min_iou against the block."""
    x, y, w, h = block_region
    if x < 0 or y < 0 or x + w > page.width or y + h > page.height:
        raise ValueError(f"block region {block_region} outside page")
    arr = page.rgb()
    base_color = np.median(arr[y : y + h, x : x + w].reshape(-1, 3), axis=0)
    base = np.array(arr)
    base[y : y + h, x : x + w] = base_color
    norm_region = _px_region_to_norm(block_region, page.width, page.height)
    cells = region_cells(norm_region, det_cfg, rule="overlap")
    adapter = _fp_adapter(det_cfg, det_cfg.conf_threshold, cfg.kappa, cells)
    var = RegionAddVariable((h, w, 3), budget)

    def objective():
        return detector_page_loss(net, var.apply(base, block_region), adapter, det_cfg)

    def succeeded(candidate):
        dets = filter_boxes(grid_detect(net, Image(np.clip(candidate, 0, 1)), det_cfg), det_cfg.conf_threshold)
        return any(iou(d.box, np.array(norm_region)) >= min_iou for d in dets)

    val, _ = objective()
    trace = [val]
    success = succeeded(base if cfg.steps == 0 else var.apply(base, block_region))
    for _ in range(cfg.steps):
        val, dpage = objective()
        grad = var.vjp(base, block_region, dpage)
        var.step(grad, cfg.step_size)
        if cfg.quantize:
            var.value = np.round(var.value * 255.0) / 255.0
        trace.append(val)
        success = succeeded(var.apply(base, block_region))
        if success:
            break
    perturbed = var.apply(base, block_region)
    delta_page = perturbed - base
    return AttackResult(
        delta=var.value,
        success=bool(success),
        loss_trace=trace,
        queries=0,
        achieved_norm=float(np.max(np.abs(delta_page))),
        info={"region": tuple(block_region), "base_color": base_color.tolist(), "page": perturbed},
    )


def cross_boundary_attack(
    net: Network,
    page: Image,
    attacker_region,
    victim_region,
    budget: PerturbationBudget,
    cfg: AttackConfig,
    det_cfg: DetectorConfig = DetectorConfig(),
    min_iou: float = 0.5,
) -> AttackResult:
    """Perturb only attacker_region to maximize confidence of cells inside
    victim_region. Success: a detection box with IoU >= min_iou over the
    victim region while every pixel outside the attacker region is unchanged.
    """
    ax, ay, aw, ah = attacker_region
    vx, vy, vw, vh = victim_region
    if (min(ax + aw, vx + vw) > max(ax, vx)) and (min(ay + ah, vy + vh) > max(ay, vy)):
        raise ValueError("attacker and victim regions overlap")
    for region in (attacker_region, victim_region):
        x, y, w, h = region
        if x < 0 or y < 0 or x + w > page.width or y + h > page.height:
            raise ValueError(f"region {region} outside page")
    arr = page.rgb()
    norm_victim = _px_region_to_norm(victim_region, page.width, page.height)
    cells = region_cells(norm_victim, det_cfg, rule="center")
    if not cells.any():
        cells = region_cells(norm_victim, det_cfg, rule="overlap")
    adapter = _conf_max_adapter(det_cfg, cells)
    var = RegionAddVariable((ah, aw, 3), budget)

    def succeeded(candidate):
        dets = filter_boxes(grid_detect(net, Image(np.clip(candidate, 0, 1)), det_cfg), det_cfg.conf_threshold)
        return any(iou(d.box, np.array(norm_victim)) >= min_iou for d in dets)

    trace = []
    success = succeeded(var.apply(arr, attacker_region))
    for _ in range(cfg.steps):
        if success:
            break
        val, dpage = detector_page_loss(net, var.apply(arr, attacker_region), adapter, det_cfg)
        grad = var.vjp(arr, attacker_region, dpage)
        var.step(grad, cfg.step_size)
        if cfg.quantize:
            var.value = np.round(var.value * 255.0) / 255.0
        trace.append(val)
        success = succeeded(var.apply(arr, attacker_region))
    perturbed = var.apply(arr, attacker_region)
    outside_mask = np.ones(arr.shape[:2], dtype=bool)
    outside_mask[ay : ay + ah, ax : ax + aw] = False
    untouched = bool(np.array_equal(perturbed[outside_mask], arr[outside_mask]))
    return AttackResult(
        delta=var.value,
        success=bool(success and untouched),
        loss_trace=trace,
        queries=0,
        achieved_norm=float(np.max(np.abs(var.value))),
        info={"page": perturbed, "outside_untouched": untouched, "victim_cells": int(cells.sum())},
    )
