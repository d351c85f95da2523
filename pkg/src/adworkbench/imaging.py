"""Raster images: float [0,1] pixels, resampling, alpha compositing, PNG I/O.

Pixel domain is floating point in [0,1]; 8-bit PNG values map by v/255 on
load and round(v*255) on save. Images are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image as _PILImage
from scipy import ndimage as _ndimage

# ITU-R BT.601 luma weights (fixed choice; see to_grayscale).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

VALID_CHANNELS = (1, 3, 4)


class ImagingError(ValueError):
    pass


@dataclass(frozen=True)
class Image:
    """H x W x C raster with values in [0,1]. C is 1 (gray), 3 (RGB) or 4 (RGBA).

    The backing array is made read-only; all operations return new images.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in VALID_CHANNELS:
            raise ImagingError(f"bad image shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ImagingError(f"empty image {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ImagingError("non-finite pixel values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ImagingError("pixel values outside [0,1]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def rgb(self) -> np.ndarray:
        """Color planes only (alpha dropped, gray broadcast to 3 channels)."""
        if self.channels == 1:
            return np.repeat(self.data, 3, axis=2)
        return self.data[:, :, :3]

    def alpha(self) -> np.ndarray:
        """Alpha plane, all-ones if the image has none."""
        if self.channels == 4:
            return self.data[:, :, 3]
        return np.ones(self.data.shape[:2])


def constant(height: int, width: int, color) -> Image:
    color = np.atleast_1d(np.asarray(color, dtype=np.float64))
    return Image(np.broadcast_to(color, (height, width, color.size)).copy())


# ---------------------------------------------------------------------------
# resampling


def _area_weights(n_in: int, n_out: int):
    """Per-output-pixel (start index, tap weights) for 1-d area averaging."""
    scale = n_in / n_out
    starts = []
    weights = []
    for i in range(n_out):
        lo = i * scale
        hi = (i + 1) * scale
        first = int(np.floor(lo))
        last = min(int(np.ceil(hi)), n_in)
        w = np.empty(last - first)
        for j in range(first, last):
            w[j - first] = min(hi, j + 1) - max(lo, j)
        starts.append(first)
        weights.append(w / scale)
    return starts, weights


def _resize_axis_area(arr: np.ndarray, n_out: int) -> np.ndarray:
    n_in = arr.shape[0]
    if n_in == n_out:
        return arr
    if n_in % n_out == 0:
        f = n_in // n_out
        # exact block mean, same summation order as a per-block mean oracle
        shaped = arr.reshape(n_out, f, *arr.shape[1:])
        return np.moveaxis(shaped, 1, -1).mean(axis=-1)
    starts, weights = _area_weights(n_in, n_out)
    out = np.empty((n_out, *arr.shape[1:]))
    for i, (s, w) in enumerate(zip(starts, weights)):
        chunk = arr[s : s + len(w)]
        out[i] = np.tensordot(w, chunk, axes=(0, 0))
    return out


def bilinear_taps(n_in: int, n_out: int):
    """Half-pixel-center bilinear sampling taps: (idx0, idx1, weight1) arrays."""
    coords = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    coords = np.clip(coords, 0.0, n_in - 1.0)
    i0 = np.floor(coords).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    w1 = coords - i0
    return i0, i1, w1


def _resize_axis_bilinear(arr: np.ndarray, n_out: int) -> np.ndarray:
    n_in = arr.shape[0]
    i0, i1, w1 = bilinear_taps(n_in, n_out)
    w1 = w1.reshape((-1,) + (1,) * (arr.ndim - 1))
    return arr[i0] * (1.0 - w1) + arr[i1] * w1


def _resize_axis_nearest(arr: np.ndarray, n_out: int) -> np.ndarray:
    n_in = arr.shape[0]
    idx = np.minimum((np.floor((np.arange(n_out) + 0.5) * n_in / n_out)).astype(int), n_in - 1)
    return arr[idx]

_AXIS_RESIZERS = {
    "area_average": _resize_axis_area,
    "bilinear": _resize_axis_bilinear,
    "nearest": _resize_axis_nearest,
}


def resize(img: Image, out_w: int, out_h: int, method: str = "area_average") -> Image:
    """Separable resize. area_average of an integer downscale is an exact block mean."""
    if out_w < 1 or out_h < 1:
        raise ImagingError(f"zero-dimension resize request ({out_w}x{out_h})")
    if method not in _AXIS_RESIZERS:
        raise ImagingError(f"unknown resize method {method!r}")
    h, w = img.height, img.width
    if method == "area_average" and h % out_h == 0 and w % out_w == 0:
        # single-reduction block mean: bit-identical to a per-block mean oracle
        fh, fw = h // out_h, w // out_w
        blocks = img.data.reshape(out_h, fh, out_w, fw, img.channels)
        arr = blocks.transpose(0, 2, 4, 1, 3).reshape(out_h, out_w, img.channels, fh * fw).mean(axis=-1)
        return Image(np.clip(arr, 0.0, 1.0))
    axis_resize = _AXIS_RESIZERS[method]
    arr = axis_resize(img.data, out_h)
    arr = np.moveaxis(axis_resize(np.moveaxis(arr, 1, 0), out_w), 0, 1)
    return Image(np.clip(arr, 0.0, 1.0))


def resize_array_bilinear(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize on a raw (H,W,...) array, no [0,1] clamp. Linear map."""
    out = _resize_axis_bilinear(arr, out_h)
    return np.moveaxis(_resize_axis_bilinear(np.moveaxis(out, 1, 0), out_w), 0, 1)


def resize_array_bilinear_adjoint(cot: np.ndarray, in_h: int, in_w: int) -> np.ndarray:
    """Adjoint of resize_array_bilinear: scatter a (out_h,out_w,...) cotangent back."""
    out_h, out_w = cot.shape[:2]
    i0, i1, w1 = bilinear_taps(in_h, out_h)
    mid = np.zeros((in_h,) + cot.shape[1:])
    wcol = w1.reshape((-1,) + (1,) * (cot.ndim - 1))
    np.add.at(mid, i0, cot * (1.0 - wcol))
    np.add.at(mid, i1, cot * wcol)
    j0, j1, v1 = bilinear_taps(in_w, out_w)
    out = np.zeros((in_h, in_w) + cot.shape[2:])
    vrow = v1.reshape((1, -1) + (1,) * (cot.ndim - 2))
    np.add.at(out, (slice(None), j0), mid * (1.0 - vrow))
    np.add.at(out, (slice(None), j1), mid * vrow)
    return out


# ---------------------------------------------------------------------------
# color


def to_grayscale(img: Image) -> Image:
    """BT.601 luma; RGBA is pre-composited against white first."""
    if img.channels == 1:
        return img
    rgb = img.data[:, :, :3]
    if img.channels == 4:
        a = img.data[:, :, 3:4]
        rgb = a * rgb + (1.0 - a)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    # written so gray pixels (v,v,v) map to exactly v
    luma = r + (g - r) * LUMA_WEIGHTS[1] + (b - r) * LUMA_WEIGHTS[2]
    return Image(np.clip(luma, 0.0, 1.0)[:, :, None])


def composite_over(
    background: Image,
    foreground: Image,
    origin: tuple[int, int] = (0, 0),
    opacity: float = 1.0,
    tiled: bool = False,
) -> Image:
    """Straight-alpha "over": out = (1 - a*a_fg)*bg + a*a_fg*fg, CSS-opacity style.

    When tiled, the foreground repeats from (0,0) to cover the background and
    origin is ignored. Otherwise the foreground is clipped to the background.
    """
    if background.channels not in (3, 4):
        raise ImagingError("background must be RGB or RGBA")
    if not 0.0 <= opacity <= 1.0:
        raise ImagingError("opacity outside [0,1]")
    bg = np.array(background.data)
    fg_rgb = foreground.rgb()
    fg_a = foreground.alpha()
    if tiled:
        reps_y = -(-background.height // foreground.height)
        reps_x = -(-background.width // foreground.width)
        fg_rgb = np.tile(fg_rgb, (reps_y, reps_x, 1))[: background.height, : background.width]
        fg_a = np.tile(fg_a, (reps_y, reps_x))[: background.height, : background.width]
        y0 = x0 = 0
        h, w = background.height, background.width
    else:
        x0, y0 = origin
        if not (0 <= x0 < background.width and 0 <= y0 < background.height):
            raise ImagingError(f"origin {origin} outside background")
        h = min(foreground.height, background.height - y0)
        w = min(foreground.width, background.width - x0)
        fg_rgb = fg_rgb[:h, :w]
        fg_a = fg_a[:h, :w]
    eff = opacity * fg_a[:, :, None]
    region = bg[y0 : y0 + h, x0 : x0 + w]
    region[:, :, :3] = (1.0 - eff) * region[:, :, :3] + eff * fg_rgb
    if background.channels == 4:
        region[:, :, 3] = (1.0 - eff[:, :, 0]) * region[:, :, 3] + eff[:, :, 0]
    return Image(np.clip(bg, 0.0, 1.0))


def gaussian_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian on a raw 2-d array, replicate border, 4-sigma truncation."""
    if sigma <= 0:
        return np.array(arr)
    return _ndimage.gaussian_filter(arr, sigma=sigma, mode="nearest", truncate=4.0)


# ---------------------------------------------------------------------------
# 8-bit quantization and PNG I/O

def quantize(arr: np.ndarray) -> np.ndarray:
    """Round to the 8-bit representable grid, staying in float [0,1]."""
    return np.round(np.clip(arr, 0.0, 1.0) * 255.0) / 255.0


def to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)


_PIL_MODES = {1: "L", 3: "RGB", 4: "RGBA"}


def save_png(img: Image, path) -> None:
    arr = to_uint8(img.data)
    if img.channels == 1:
        arr = arr[:, :, 0]
    _PILImage.fromarray(arr, mode=_PIL_MODES[img.channels]).save(path, format="PNG")


def load_png(path) -> Image:
    with _PILImage.open(path) as pil:
        if pil.mode not in ("L", "RGB", "RGBA"):
            pil = pil.convert("RGBA" if "A" in pil.mode or "P" in pil.mode else "RGB")
        arr = np.asarray(pil, dtype=np.uint8)
    return Image(arr.astype(np.float64) / 255.0)
