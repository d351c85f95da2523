"""Procedural content: ads, text/photo blocks, and ad-disclosure logos.

All non-placeholder colors are clipped into [0.02, 0.97] so the reserved
placeholder palette (g=0, b=1) can never collide with generated content.
"""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import Image

INK_LO, INK_HI = 0.02, 0.97


def _clip(arr):
    return np.clip(arr, INK_LO, INK_HI)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def text_block(rng: np.random.Generator, w: int, h: int, bg=None) -> np.ndarray:
    """Noise-striped paragraph texture (procedural stand-in for rendered text)."""
    bg = bg if bg is not None else 0.93 + 0.04 * rng.random()
    arr = np.full((h, w, 3), _clip(np.array([bg, bg, bg])))
    line_h = int(rng.integers(8, 13))
    gap = int(rng.integers(5, 9))
    ink = _clip(0.1 + 0.25 * rng.random())
    y = int(rng.integers(2, 8))
    while y + line_h < h - 2:
        length = int(w * (0.55 + 0.43 * rng.random()))
        x0 = int(rng.integers(0, max(w - length, 1)))
        stripe = ink + 0.15 * rng.random((line_h, length, 1))
        # broken into word-ish runs
        word_mask = (rng.random(length) > 0.12).astype(float)
        run = np.maximum.accumulate(word_mask * np.arange(1, length + 1))  # noqa: F841 (texture detail)
        stripe = stripe * word_mask[None, :, None] + (1 - word_mask[None, :, None]) * bg
        arr[y : y + line_h, x0 : x0 + length] = _clip(stripe)
        y += line_h + gap
    return _clip(arr)


def photo_block(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    """Smooth colored blobs, a stand-in for article photos."""
    yy, xx = np.mgrid[0:h, 0:w]
    arr = np.zeros((h, w, 3))
    base = rng.random(3) * 0.5 + 0.25
    arr[:] = base
    for _ in range(int(rng.integers(3, 7))):
        cx, cy = rng.random() * w, rng.random() * h
        s = (0.15 + 0.35 * rng.random()) * min(w, h)
        color = rng.random(3) - 0.5
        bump = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
        arr += 0.6 * bump[:, :, None] * color
    return _clip(arr)


def make_ad(rng: np.random.Generator, w: int, h: int) -> Image:
    """A synthetic display ad: saturated gradient, border, headline bars, CTA."""
    top = _clip(np.array([rng.random(), rng.random(), rng.random()]) * 0.7 + 0.3)
    bot = _clip(top[::-1] * (0.5 + 0.5 * rng.random()))
    t = np.linspace(0.0, 1.0, h)[:, None, None]
    arr = (1 - t) * top + t * bot
    arr = np.broadcast_to(arr, (h, w, 3)).copy()
    # headline bars
    bar_color = _clip(np.where(top.mean() > 0.5, 0.06, 0.94) + 0.05 * rng.random(3))
    n_bars = int(rng.integers(1, 4))
    y = int(h * 0.15)
    for _ in range(n_bars):
        bh = max(int(h * (0.08 + 0.1 * rng.random())), 3)
        bw = int(w * (0.3 + 0.5 * rng.random()))
        x_lo = max(int(w * 0.05), 1)
        x0 = int(rng.integers(x_lo, max(w - bw - 2, x_lo + 1)))
        arr[y : y + bh, x0 : x0 + bw] = bar_color
        y += bh + max(int(h * 0.06), 2)
        if y > h * 0.6:
            break
    # CTA button
    bw, bh = max(int(w * (0.18 + 0.15 * rng.random())), 8), max(int(h * 0.18), 6)
    bx = int(rng.integers(int(w * 0.08), max(w - bw - int(w * 0.08), int(w * 0.08) + 1)))
    by = int(h * 0.68)
    button = _clip(np.array([0.9, 0.3 + 0.4 * rng.random(), 0.1]))
    if by + bh < h:
        arr[by : by + bh, bx : bx + bw] = button
        arr[by + 1 : by + bh - 1, bx + 2 : bx + bw - 2] = _clip(button * 0.85)
    # border
    border = _clip(np.array([0.1, 0.1, 0.1]) + 0.1 * rng.random(3))
    arr[:2] = border
    arr[-2:] = border
    arr[:, :2] = border
    arr[:, -2:] = border
    return Image(_clip(arr))


def make_nonad_tile(rng: np.random.Generator, w: int, h: int) -> Image:
    if rng.random() < 0.5:
        return Image(text_block(rng, w, h))
    return Image(photo_block(rng, w, h))


# ---------------------------------------------------------------------------
# ad-disclosure logos


def make_logo(seed: int) -> Image:
    """An AdChoices-style disclosure logo: play-triangle icon plus glyph-bar
    "text", RGBA with a transparent background."""
    rng = _rng((seed, 0x106))
    h = int(rng.integers(18, 24))
    w = int(rng.integers(56, 76))
    rgb = np.ones((h, w, 3))
    alpha = np.zeros((h, w))
    hue = rng.choice([0, 1, 2])
    palettes = [
        np.array([0.05, 0.35, 0.75]),  # blue
        np.array([0.05, 0.5, 0.25]),  # green
        np.array([0.15, 0.15, 0.2]),  # dark gray
    ]
    ink = _clip(palettes[hue] + 0.12 * (rng.random(3) - 0.5))
    # icon: triangle in a ring
    icon_r = h // 2 - 2
    cx = cy = h // 2
    yy, xx = np.mgrid[0:h, 0:w]
    ring = np.abs(np.hypot(yy - cy, xx - cx) - icon_r) < 1.6
    tri = (xx >= cx - icon_r // 2) & (xx <= cx + icon_r // 2 + 1)
    tri &= np.abs(yy - cy) <= (xx - (cx - icon_r // 2)) * 0.5 + 0.5
    icon = ring | tri
    rgb[icon] = ink
    alpha[icon] = 1.0
    # glyph bars: text-like strokes with per-glyph variation
    x = h + int(rng.integers(3, 6))
    base = h - 4
    glyphs = 0
    while x < w - 7 and glyphs < 6:
        gw = int(rng.integers(5, 9))
        gh = int(rng.integers(int(h * 0.45), int(h * 0.7)))
        top = base - gh
        rgb[top:base, x : x + gw] = ink
        alpha[top:base, x : x + gw] = 1.0
        if rng.random() < 0.25 and x + gw + 2 < w - 7:  # ascender dot
            rgb[top - 3 : top - 1, x : x + 2] = ink
            alpha[top - 3 : top - 1, x : x + 2] = 1.0
        x += gw + int(rng.integers(4, 7))
        glyphs += 1
    arr = np.concatenate([_clip(rgb), alpha[:, :, None]], axis=2)
    return Image(arr)


def make_nonlogo(seed: int) -> Image:
    """Small benign page icons (badges, avatars) for false-positive evaluation."""
    rng = _rng((seed, 0x4E6))
    h = int(rng.integers(20, 34))
    w = int(rng.integers(20, 110))
    kind = rng.choice(["badge", "avatar", "button"])
    rgb = np.ones((h, w, 3))
    alpha = np.ones((h, w))
    if kind == "badge":
        rgb[:] = _clip(rng.random(3) * 0.6 + 0.2)
        rgb[2:-2, 2:-2] = _clip(rng.random(3) * 0.5 + 0.4)
    elif kind == "avatar":
        yy, xx = np.mgrid[0:h, 0:w]
        c = np.hypot(yy - h / 2, xx - w / 2) < min(h, w) / 2 - 1
        rgb[:] = 0.9
        rgb[c] = _clip(rng.random(3) * 0.7 + 0.15)
        alpha = c.astype(float)
    else:
        rgb[:] = _clip(np.array([0.2, 0.45, 0.8]) + 0.2 * (rng.random(3) - 0.5))
        rgb[h // 3 : 2 * h // 3, w // 6 : 5 * w // 6] = 0.95
    arr = np.concatenate([_clip(rgb), alpha[:, :, None]], axis=2)
    return Image(arr)
