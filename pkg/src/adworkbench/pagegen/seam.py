"""Content-aware resizing by removal or duplication of minimum-energy seams.

Energy is |forward difference x| + |forward difference y| of the grayscale
image with a replicate border; the DP uses 8-connected steps and leftmost
tie-breaking. Horizontal seams go through the transpose trick.
"""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import Image, to_grayscale


class SeamError(ValueError):
    pass


def energy_map(arr: np.ndarray) -> np.ndarray:
    """|dx| + |dy| with forward differences and replicate border; arr is 2-d."""
    dx = np.abs(np.diff(arr, axis=1, append=arr[:, -1:]))
    dy = np.abs(np.diff(arr, axis=0, append=arr[-1:, :]))
    return dx + dy


def cumulative_energy(energy: np.ndarray) -> np.ndarray:
    h, w = energy.shape
    m = energy.copy()
    for i in range(1, h):
        prev = m[i - 1]
        left = np.concatenate(([np.inf], prev[:-1]))
        right = np.concatenate((prev[1:], [np.inf]))
        m[i] += np.minimum(np.minimum(left, prev), right)
    return m


def find_vertical_seam(energy: np.ndarray) -> np.ndarray:
    """Column index per row of the minimum cumulative-energy vertical seam."""
    m = cumulative_energy(energy)
    h, w = m.shape
    seam = np.empty(h, dtype=int)
    seam[-1] = int(np.argmin(m[-1]))  # leftmost minimum
    for i in range(h - 2, -1, -1):
        j = seam[i + 1]
        lo = max(j - 1, 0)
        hi = min(j + 1, w - 1)
        window = m[i, lo : hi + 1]
        seam[i] = lo + int(np.argmin(window))
    return seam


def _remove_vertical_seam(arr: np.ndarray, seam: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    mask = np.ones((h, w), dtype=bool)
    mask[np.arange(h), seam] = False
    return arr[mask].reshape(h, w - 1, *arr.shape[2:])


def _duplicate_vertical_seam(arr: np.ndarray, seam: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    out = np.empty((h, w + 1, *arr.shape[2:]), dtype=arr.dtype)
    for i in range(h):
        j = seam[i]
        out[i, : j + 1] = arr[i, : j + 1]
        out[i, j + 1] = arr[i, j]
        out[i, j + 2 :] = arr[i, j + 1 :]
    return out


def _carve_width(arr: np.ndarray, target_w: int) -> np.ndarray:
    while arr.shape[1] != target_w:
        gray = _gray2d(arr)
        seam = find_vertical_seam(energy_map(gray))
        if arr.shape[1] > target_w:
            arr = _remove_vertical_seam(arr, seam)
        else:
            arr = _duplicate_vertical_seam(arr, seam)
    return arr


def _gray2d(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return arr
    return to_grayscale(Image(np.clip(arr, 0.0, 1.0))).data[:, :, 0]


def seam_carve(img: Image, target_w: int, target_h: int) -> Image:
    """Resize by vertical seams first (width), then horizontal via transpose.

    Targets are limited to +/-50% of the source per dimension; each removal
    changes the corresponding dimension by exactly 1 and never the other.
    """
    if target_w <= 0 or target_h <= 0:
        raise SeamError(f"degenerate seam-carve target {target_w}x{target_h}")
    if not (0.5 * img.width <= target_w <= 1.5 * img.width) or not (0.5 * img.height <= target_h <= 1.5 * img.height):
        raise SeamError("seam-carve target outside +/-50% of the source size")
    arr = np.array(img.data)
    arr = _carve_width(arr, target_w)
    arr = _carve_width(arr.transpose(1, 0, 2), target_h).transpose(1, 0, 2)
    return Image(np.clip(arr, 0.0, 1.0))
