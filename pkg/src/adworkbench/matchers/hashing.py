"""Average hashing with Hamming matching, plus the transparent-padding evasion.

The hash pipeline: composite transparent pixels on white, convert to
grayscale, area-average down to the 8x8 grid, then set bit i when pixel i is
strictly above the mean of the 64 downsampled values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adworkbench.imaging import Image, resize, to_grayscale

HASH_GRID = 8
HAMMING_THRESHOLD = 8  # default match threshold in bits; 0 gives exact-digest matching


@dataclass(frozen=True)
class HashDigest:
    """64 bits, 8x8 grid row-major."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if len(bits) != HASH_GRID * HASH_GRID:
            raise ValueError(f"digest must have {HASH_GRID * HASH_GRID} bits")
        object.__setattr__(self, "bits", bits)

    def popcount(self) -> int:
        return sum(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    def hex(self) -> str:
        val = 0
        for b in self.bits:
            val = (val << 1) | int(b)
        return f"{val:016x}"


def average_hash(img: Image) -> HashDigest:
    gray = to_grayscale(img)
    small = resize(gray, HASH_GRID, HASH_GRID, "area_average").data[:, :, 0]
    mean = small.mean()
    return HashDigest(tuple((small > mean).ravel()))


def hamming_distance(a: HashDigest, b: HashDigest) -> int:
    return int(np.count_nonzero(a.as_array() != b.as_array()))


def hamming_match(a: HashDigest, b: HashDigest, threshold: int = HAMMING_THRESHOLD):
    """(matched, distance); matched iff distance <= threshold."""
    d = hamming_distance(a, b)
    return d <= threshold, d


# ---------------------------------------------------------------------------
# structural evasion: up to 3 transparent rows/columns


@dataclass
class PaddingAttackResult:
    success: bool
    padded: Image | None
    rows: int
    cols: int
    corner: tuple[str, str]  # (top|bottom, left|right)
    min_distance: int  # smallest distance to any template digest


_CORNERS = (("top", "left"), ("top", "right"), ("bottom", "left"), ("bottom", "right"))


def pad_transparent(logo: Image, rows: int, cols: int, corner=("top", "left")) -> Image:
    """Append fully transparent rows/columns on the given sides of an RGBA logo."""
    if logo.channels != 4:
        raise ValueError("padding attack requires an RGBA logo")
    arr = logo.data
    if rows:
        band = np.zeros((rows, arr.shape[1], 4))
        arr = np.vstack([band, arr]) if corner[0] == "top" else np.vstack([arr, band])
    if cols:
        band = np.zeros((arr.shape[0], cols, 4))
        arr = np.hstack([band, arr]) if corner[1] == "left" else np.hstack([arr, band])
    return Image(arr)


def transparent_padding_attack(
    logo: Image,
    template_digests,
    max_pad: int = 3,
    threshold: int = HAMMING_THRESHOLD,
) -> PaddingAttackResult:
    """Search paddings (r, c) in {0..max_pad}^2 x 4 corners, first one whose
    hash clears every template digest by more than `threshold` bits wins.

    The rendered composite of a winner equals the original render translated
    by at most max_pad pixels.
    """
    if max_pad > 3:
        raise ValueError("max_pad is capped at 3 per side")
    template_digests = list(template_digests)
    if not template_digests:
        raise ValueError("no template digests to evade")
    best = PaddingAttackResult(False, None, 0, 0, _CORNERS[0], 0)
    for r in range(max_pad + 1):
        for c in range(max_pad + 1):
            corners = _CORNERS if (r or c) else _CORNERS[:1]
            for corner in corners:
                candidate = pad_transparent(logo, r, c, corner)
                digest = average_hash(candidate)
                dmin = min(hamming_distance(digest, t) for t in template_digests)
                if dmin > threshold:
                    return PaddingAttackResult(True, candidate, r, c, corner, dmin)
    return best
