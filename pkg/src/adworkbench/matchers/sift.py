"""Difference-of-Gaussians keypoints with 128-d gradient-histogram descriptors.

Standard Lowe constants, pinned for reproducibility: 4 octaves, 3 scales per
octave, base sigma 1.6, contrast threshold 0.03, edge ratio 10. The input is
upsampled 2x for the base octave; reported coordinates are in input pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from adworkbench.imaging import Image, gaussian_blur, to_grayscale

SIGMA = 1.6
INTERVALS = 3
OCTAVES = 4
ASSUMED_BLUR = 0.5
CONTRAST_THRESHOLD = 0.03
EDGE_RATIO = 10.0
BORDER = 5
MIN_DIMENSION = 16

ORI_BINS = 36
ORI_SIGMA_FACTOR = 1.5
ORI_RADIUS_FACTOR = 3.0
ORI_PEAK_RATIO = 0.8

DESCR_WIDTH = 4
DESCR_ORI_BINS = 8
DESCR_SCALE_FACTOR = 3.0
DESCR_CLAMP = 0.2


@dataclass
class Keypoint:
    """x/y are subpixel input-image coordinates; descriptor is 128-d, unit norm."""

    x: float
    y: float
    scale: float
    orientation: float
    descriptor: np.ndarray = field(repr=False)
    response: float = 0.0

    def vector(self) -> np.ndarray:
        """Positional values + descriptor as one 132-d vector."""
        return np.concatenate(([self.x, self.y, self.scale, self.orientation], self.descriptor))


# ---------------------------------------------------------------------------
# pyramids


def _upsample2(arr: np.ndarray) -> np.ndarray:
    # bilinear doubling; pixel repetition would create exact ties that defeat
    # the strict extremum test on synthetic inputs
    from adworkbench.imaging import resize_array_bilinear

    h, w = arr.shape
    return resize_array_bilinear(arr[:, :, None], 2 * h, 2 * w)[:, :, 0]


def gaussian_pyramid(gray: np.ndarray, octaves: int = OCTAVES):
    """List of octaves, each an array (INTERVALS+3, H, W)."""
    k = 2.0 ** (1.0 / INTERVALS)
    base = _upsample2(gray)
    delta = np.sqrt(max(SIGMA**2 - (2.0 * ASSUMED_BLUR) ** 2, 0.01))
    base = gaussian_blur(base, delta)
    sigmas = [SIGMA * k**i for i in range(INTERVALS + 3)]
    increments = [np.sqrt(sigmas[i] ** 2 - sigmas[i - 1] ** 2) for i in range(1, len(sigmas))]
    pyramid = []
    current = base
    for _ in range(octaves):
        levels = [current]
        for inc in increments:
            levels.append(gaussian_blur(levels[-1], inc))
        octave = np.stack(levels)
        pyramid.append(octave)
        nxt = octave[INTERVALS][::2, ::2]
        if min(nxt.shape) < 2 * BORDER + 3:
            break
        current = nxt
    return pyramid


def dog_pyramid(gauss_pyramid):
    return [g[1:] - g[:-1] for g in gauss_pyramid]


def scan_extrema(dog_octave: np.ndarray, threshold: float):
    """(layer, y, x) of 26-neighbourhood extrema in the interior layers.

    Plateau-tolerant: a point counts when it is >= (<=) every neighbour and
    strictly beats at least one, so exactly-symmetric synthetic inputs whose
    peak straddles a pixel boundary are still found. Constant regions yield
    nothing.
    """
    footprint = np.ones((3, 3, 3), dtype=bool)
    footprint[1, 1, 1] = False
    neigh_max = ndimage.maximum_filter(dog_octave, footprint=footprint, mode="constant", cval=-np.inf)
    neigh_min = ndimage.minimum_filter(dog_octave, footprint=footprint, mode="constant", cval=np.inf)
    strong = np.abs(dog_octave) > threshold
    not_flat = neigh_max > neigh_min
    is_ext = strong & not_flat & ((dog_octave >= neigh_max) | (dog_octave <= neigh_min))
    is_ext[0] = False
    is_ext[-1] = False
    is_ext[:, : BORDER + 1, :] = False
    is_ext[:, -(BORDER + 1) :, :] = False
    is_ext[:, :, : BORDER + 1] = False
    is_ext[:, :, -(BORDER + 1) :] = False
    return np.argwhere(is_ext)


def _merge_plateau_candidates(dog_octave: np.ndarray, candidates):
    """Keep one candidate per equal-valued plateau (26-connected component)."""
    accepted = []
    taken = set()
    for layer, y, x in candidates:
        v = dog_octave[layer, y, x]
        dup = False
        for dl in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    key = (layer + dl, y + dy, x + dx)
                    if key in taken and dog_octave[key] == v:
                        dup = True
        if not dup:
            accepted.append((layer, y, x))
        taken.add((int(layer), int(y), int(x)))
    return accepted


def _localize(dog_octave: np.ndarray, layer: int, y: int, x: int):
    """3-d quadratic refinement; returns (layer, y, x, dl, dy, dx, value) or None.

    Convergence radius is 0.6 per axis. Scale moves are clamped at the octave
    boundary and revisiting a sample point (plateau oscillation on symmetric
    inputs) terminates with the current fit instead of rejecting.
    """
    n_layers, h, w = dog_octave.shape
    visited = {(layer, y, x)}
    for _ in range(5):
        patch = dog_octave[layer - 1 : layer + 2, y - 1 : y + 2, x - 1 : x + 2]
        dx = 0.5 * (patch[1, 1, 2] - patch[1, 1, 0])
        dy = 0.5 * (patch[1, 2, 1] - patch[1, 0, 1])
        dl = 0.5 * (patch[2, 1, 1] - patch[0, 1, 1])
        dxx = patch[1, 1, 2] - 2 * patch[1, 1, 1] + patch[1, 1, 0]
        dyy = patch[1, 2, 1] - 2 * patch[1, 1, 1] + patch[1, 0, 1]
        dll = patch[2, 1, 1] - 2 * patch[1, 1, 1] + patch[0, 1, 1]
        dxy = 0.25 * (patch[1, 2, 2] - patch[1, 2, 0] - patch[1, 0, 2] + patch[1, 0, 0])
        dxl = 0.25 * (patch[2, 1, 2] - patch[2, 1, 0] - patch[0, 1, 2] + patch[0, 1, 0])
        dyl = 0.25 * (patch[2, 2, 1] - patch[2, 0, 1] - patch[0, 2, 1] + patch[0, 0, 1])
        hess = np.array([[dxx, dxy, dxl], [dxy, dyy, dyl], [dxl, dyl, dll]])
        grad = np.array([dx, dy, dl])
        try:
            offset = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        converged = np.max(np.abs(offset)) <= 0.6
        if not converged:
            ny = y + int(round(offset[1]))
            nx = x + int(round(offset[0]))
            nlayer = int(np.clip(layer + int(round(offset[2])), 1, n_layers - 2))
            if not (BORDER < ny < h - BORDER - 1 and BORDER < nx < w - BORDER - 1):
                return None
            if (nlayer, ny, nx) in visited:
                converged = True
            else:
                layer, y, x = nlayer, ny, nx
                visited.add((layer, y, x))
                continue
        offset = np.clip(offset, -0.6, 0.6)
        value = patch[1, 1, 1] + 0.5 * grad @ offset
        if abs(value) < CONTRAST_THRESHOLD / INTERVALS:
            return None
        tr = dxx + dyy
        det = dxx * dyy - dxy * dxy
        if det <= 0 or tr * tr * EDGE_RATIO >= (EDGE_RATIO + 1) ** 2 * det:
            return None
        return layer, y, x, offset[2], offset[1], offset[0], value
    return None


# ---------------------------------------------------------------------------
# orientation and descriptor


def _gradients(img: np.ndarray):
    gy, gx = np.gradient(img)
    mag = np.sqrt(gx * gx + gy * gy)
    ang = np.arctan2(gy, gx)
    return mag, ang


def _orientation_peaks_batch(mag: np.ndarray, ang: np.ndarray, ys, xs, sigmas):
    """Orientation histogram peaks for a batch of keypoints sharing one
    gaussian layer. Returns a list of theta lists."""
    k = len(ys)
    if k == 0:
        return []
    radii = np.round(ORI_RADIUS_FACTOR * ORI_SIGMA_FACTOR * sigmas).astype(int)
    rmax = int(radii.max())
    pad_mag = np.pad(mag, rmax, mode="constant")  # zero magnitude = no contribution
    pad_ang = np.pad(ang, rmax, mode="constant")
    yi = np.round(ys).astype(int)
    xi = np.round(xs).astype(int)
    grid = np.arange(-rmax, rmax + 1)
    gy = grid[:, None]
    gx = grid[None, :]
    rows = (yi[:, None, None] + rmax) + gy[None]
    cols = (xi[:, None, None] + rmax) + gx[None]
    m = pad_mag[rows, cols]
    window = (np.abs(gy)[None] <= radii[:, None, None]) & (np.abs(gx)[None] <= radii[:, None, None])
    ks, ps, qs = np.nonzero(window & (m > 0))
    if len(ks) == 0:
        return [[] for _ in range(k)]
    m = m[ks, ps, qs]
    a = pad_ang[yi[ks] + ps, xi[ks] + qs]
    dy = (ps - rmax) + (yi - ys)[ks]
    dx = (qs - rmax) + (xi - xs)[ks]
    sig = (ORI_SIGMA_FACTOR * sigmas)[ks]
    weight = np.exp(-(dy**2 + dx**2) / (2 * sig**2))
    wm = m * weight
    bins = np.floor((a + np.pi) / (2 * np.pi) * ORI_BINS).astype(int) % ORI_BINS
    hists = np.bincount(ks * ORI_BINS + bins, weights=wm, minlength=k * ORI_BINS).reshape(k, ORI_BINS)
    for _ in range(2):  # circular smoothing
        hists = (np.roll(hists, 1, axis=1) + hists + np.roll(hists, -1, axis=1)) / 3.0
    out = []
    for i in range(k):
        hist = hists[i]
        peak = hist.max()
        if peak <= 0:
            out.append([])
            continue
        left = np.roll(hist, 1)
        right = np.roll(hist, -1)
        is_peak = (hist >= ORI_PEAK_RATIO * peak) & (hist > left) & (hist > right)
        thetas = []
        for j in np.flatnonzero(is_peak):
            denom = left[j] - 2 * hist[j] + right[j]
            interp = j + 0.5 * (left[j] - right[j]) / denom if denom != 0 else float(j)
            thetas.append((interp / ORI_BINS) * 2 * np.pi - np.pi)
        out.append(thetas)
    return out


def _descriptor_batch(mag: np.ndarray, ang: np.ndarray, ys, xs, sigmas, thetas):
    """Descriptors for keypoints sharing one gaussian layer; None entries for
    degenerate ones. Exact per-keypoint window semantics via masks."""
    k = len(ys)
    if k == 0:
        return []
    hist_widths = DESCR_SCALE_FACTOR * sigmas
    radii = np.round(hist_widths * np.sqrt(2) * (DESCR_WIDTH + 1) * 0.5).astype(int)
    h, w = mag.shape
    radii = np.minimum(radii, int(np.sqrt(h * h + w * w)))
    rmax = int(radii.max())
    pad_mag = np.pad(mag, rmax, mode="constant")
    pad_ang = np.pad(ang, rmax, mode="constant")
    yi = np.round(ys).astype(int)
    xi = np.round(xs).astype(int)
    grid = np.arange(-rmax, rmax + 1)
    gy = grid[:, None]
    gx = grid[None, :]
    rows = (yi[:, None, None] + rmax) + gy[None]
    cols = (xi[:, None, None] + rmax) + gx[None]
    m = pad_mag[rows, cols]
    # compact to contributing samples: inside the per-keypoint window and with
    # nonzero gradient magnitude (flat regions and padding add nothing)
    window = (np.abs(gy)[None] <= radii[:, None, None]) & (np.abs(gx)[None] <= radii[:, None, None])
    ks, ps, qs = np.nonzero(window & (m > 0))
    if len(ks) == 0:
        return [None] * k
    m = m[ks, ps, qs]
    a = pad_ang[yi[ks] + ps, xi[ks] + qs]
    dy = gy[ps, 0] + (yi - ys)[ks]
    dx = gx[0, qs] + (xi - xs)[ks]
    cos_t = np.cos(thetas)[ks]
    sin_t = np.sin(thetas)[ks]
    hw = hist_widths[ks]
    r_rot = (-sin_t * dx + cos_t * dy) / hw
    c_rot = (cos_t * dx + sin_t * dy) / hw
    rbin = r_rot + DESCR_WIDTH / 2 - 0.5
    cbin = c_rot + DESCR_WIDTH / 2 - 0.5
    inside = (rbin > -1) & (rbin < DESCR_WIDTH) & (cbin > -1) & (cbin < DESCR_WIDTH)
    if not np.any(inside):
        return [None] * k
    ks, m, a = ks[inside], m[inside], a[inside]
    rbin, cbin = rbin[inside], cbin[inside]
    r_rot, c_rot = r_rot[inside], c_rot[inside]
    weight = np.exp(-(r_rot**2 + c_rot**2) / (0.5 * DESCR_WIDTH**2))
    obin = ((a - thetas[ks] + 2 * np.pi) % (2 * np.pi)) / (2 * np.pi) * DESCR_ORI_BINS
    wm = m * weight

    side = DESCR_WIDTH + 2
    r0 = np.floor(rbin).astype(int)
    c0 = np.floor(cbin).astype(int)
    o0 = np.floor(obin).astype(int)
    fr, fc, fo = rbin - r0, cbin - c0, obin - o0
    per_k = side * side * DESCR_ORI_BINS
    base_idx = ks * per_k
    idx_parts = []
    w_parts = []
    for dr in (0, 1):
        wr = wm * (fr if dr else 1 - fr)
        for dc in (0, 1):
            wc = wr * (fc if dc else 1 - fc)
            row = r0 + dr + 1
            col = c0 + dc + 1
            for do in (0, 1):
                idx_parts.append(base_idx + (row * side + col) * DESCR_ORI_BINS + (o0 + do) % DESCR_ORI_BINS)
                w_parts.append(wc * (fo if do else 1 - fo))
    flat = np.bincount(np.concatenate(idx_parts), weights=np.concatenate(w_parts), minlength=k * per_k)
    hists = flat.reshape(k, side, side, DESCR_ORI_BINS)
    vecs = hists[:, 1:-1, 1:-1, :].reshape(k, -1)
    out = []
    for i in range(k):
        vec = vecs[i]
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            out.append(None)
            continue
        vec = np.minimum(vec / norm, DESCR_CLAMP)
        norm = np.linalg.norm(vec)
        out.append(vec / norm if norm >= 1e-12 else None)
    return out


# ---------------------------------------------------------------------------
# top level


def sift_keypoints(img: Image) -> list[Keypoint]:
    """Detect keypoints and descriptors. Images below 16px minimum dimension
    yield an empty list."""
    gray = to_grayscale(img).data[:, :, 0]
    if min(gray.shape) < MIN_DIMENSION:
        return []
    gauss = gaussian_pyramid(gray)
    dogs = dog_pyramid(gauss)
    prefilter = 0.5 * CONTRAST_THRESHOLD / INTERVALS
    k = 2.0 ** (1.0 / INTERVALS)
    keypoints = []
    for o, dog in enumerate(dogs):
        octave_scale = 2.0 ** (o - 1)  # octave 0 is the 2x-upsampled base
        by_layer = {}
        for layer, y, x in _merge_plateau_candidates(dog, scan_extrema(dog, prefilter)):
            loc = _localize(dog, int(layer), int(y), int(x))
            if loc is None:
                continue
            by_layer.setdefault(loc[0], []).append(loc)
        for layer, items in sorted(by_layer.items()):
            mag, ang = _gradients(gauss[o][layer])
            ys = np.array([it[1] + it[4] for it in items])
            xs = np.array([it[2] + it[5] for it in items])
            sigmas = SIGMA * k ** (layer + np.array([it[3] for it in items]))
            values = np.array([abs(it[6]) for it in items])
            theta_lists = _orientation_peaks_batch(mag, ang, ys, xs, sigmas)
            exp_idx = [i for i, thetas in enumerate(theta_lists) for _ in thetas]
            exp_thetas = np.array([t for thetas in theta_lists for t in thetas])
            if not exp_idx:
                continue
            exp_idx = np.array(exp_idx)
            descs = _descriptor_batch(mag, ang, ys[exp_idx], xs[exp_idx], sigmas[exp_idx], exp_thetas)
            for j, desc in enumerate(descs):
                if desc is None:
                    continue
                i = exp_idx[j]
                keypoints.append(
                    Keypoint(
                        x=xs[i] * octave_scale,
                        y=ys[i] * octave_scale,
                        scale=sigmas[i] * octave_scale,
                        orientation=float(exp_thetas[j]),
                        descriptor=desc,
                        response=float(values[i]),
                    )
                )
    return _dedup_keypoints(keypoints)


def _dedup_keypoints(keypoints):
    """Merge refinements of the same feature: keep the strongest response among
    keypoints closer than 0.5 px with similar scale and orientation."""
    keypoints.sort(key=lambda kp: (-kp.response, kp.y, kp.x, kp.scale, kp.orientation))
    kept = []
    for kp in keypoints:
        dup = any(
            abs(kp.x - other.x) < 0.5
            and abs(kp.y - other.y) < 0.5
            and max(kp.scale, other.scale) < 1.3 * min(kp.scale, other.scale)
            and abs((kp.orientation - other.orientation + np.pi) % (2 * np.pi) - np.pi) < 0.25
            for other in kept
        )
        if not dup:
            kept.append(kp)
    kept.sort(key=lambda kp: (kp.y, kp.x, kp.scale, kp.orientation))
    return kept
