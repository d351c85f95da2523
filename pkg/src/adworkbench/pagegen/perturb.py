"""The x (.) delta operator: perturbation encodings applied to rendered pages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adworkbench.imaging import Image, ImagingError, composite_over


@dataclass(frozen=True)
class PerturbationEncoding:
    """mode tiled_overlay: `payload` is a tile Image repeated over the page at
    `alpha` opacity. mode region_add: `payload` is a signed delta array added
    inside `region` (x, y, w, h px) with [0,1] clamping. mode region_replace:
    `payload` replaces the region."""

    mode: str
    payload: object
    region: tuple | None = None
    alpha: float = 1.0

    def __post_init__(self):
        if self.mode not in ("tiled_overlay", "region_add", "region_replace"):
            raise ValueError(f"unknown encoding mode {self.mode!r}")
        if self.mode in ("region_add", "region_replace") and self.region is None:
            raise ValueError(f"{self.mode} needs a region")


def tiled_overlay_encoding(tile: Image, alpha: float) -> PerturbationEncoding:
    return PerturbationEncoding(mode="tiled_overlay", payload=tile, alpha=alpha)


def region_add_encoding(delta: np.ndarray, region) -> PerturbationEncoding:
    return PerturbationEncoding(mode="region_add", payload=delta, region=tuple(region))


def region_replace_encoding(content: np.ndarray, region) -> PerturbationEncoding:
    return PerturbationEncoding(mode="region_replace", payload=content, region=tuple(region))


def _check_region(page: Image, region):
    x, y, w, h = region
    if x < 0 or y < 0 or x + w > page.width or y + h > page.height or w <= 0 or h <= 0:
        raise ImagingError(f"region {region} outside page {page.width}x{page.height}")
    return x, y, w, h


def apply_perturbation(page: Image, enc: PerturbationEncoding) -> Image:
    if enc.mode == "tiled_overlay":
        return composite_over(page, enc.payload, opacity=enc.alpha, tiled=True)
    x, y, w, h = _check_region(page, enc.region)
    payload = np.asarray(enc.payload, dtype=np.float64)
    if payload.shape[:2] != (h, w):
        raise ImagingError(f"payload shape {payload.shape} does not match region {enc.region}")
    arr = np.array(page.data)
    if enc.mode == "region_add":
        arr[y : y + h, x : x + w, :3] = np.clip(arr[y : y + h, x : x + w, :3] + payload[:, :, :3], 0.0, 1.0)
    else:
        arr[y : y + h, x : x + w, :3] = np.clip(payload[:, :, :3], 0.0, 1.0)
    return Image(arr)
