"""Proxy losses: keypoint-matcher evasion and the detector FN/FP sums.

The keypoint loss sums d2/d1 over currently matched keypoints, so minimizing
it pushes each ratio d1/d2 up through the ratio test and ejects keypoints
from the match set. The detector losses hinge every box confidence against
tau -/+ kappa.
"""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import Image
from adworkbench.matchers import RATIO_TAU, ratio_test_match, sift_keypoints
from adworkbench.diffnet.detector import DetectorConfig, DetectorOutput

D1_FLOOR = 1e-8


def loss_sift(img: Image, template_keypoints, tau: float = RATIO_TAU):
    """(loss, MatchResult) for an image against template keypoints.

    loss = sum over matched keypoints of d2 / max(d1, 1e-8); 0 when nothing
    matches.
    """
    kps = sift_keypoints(img)
    res = ratio_test_match(kps, template_keypoints, tau)
    if res.matched_count == 0:
        return 0.0, res
    d1 = np.maximum(res.d1[res.matched], D1_FLOOR)
    d2 = res.d2[res.matched]
    return float(np.sum(d2 / d1, dtype=np.float64)), res


def loss_sift_fp(img: Image, template_keypoints, tau: float = RATIO_TAU):
    """False-positive variant: sum of d1/d2 over unmatched keypoints, so
    minimizing drags ratios below the test and creates matches."""
    kps = sift_keypoints(img)
    res = ratio_test_match(kps, template_keypoints, tau)
    un = ~res.matched
    if not np.any(un) or len(res.d2) == 0 or np.any(np.isnan(res.d2)):
        return 0.0, res
    d2 = np.maximum(res.d2[un], D1_FLOOR)
    return float(np.sum(res.d1[un] / d2, dtype=np.float64)), res


def region_cells(region, cfg: DetectorConfig, rule: str = "center") -> np.ndarray:
    """Boolean (G, G) mask of grid cells selected by a normalized region box.

    rule "center": the cell's center lies inside the region (the documented
    default). rule "overlap": the cell's area intersects the region; thin
    regions such as footers contain no cell centers, so the honeypot attack
    selects with this rule.
    """
    g = cfg.grid
    x0, y0, x1, y1 = _region_corners(region)
    mask = np.zeros((g, g), dtype=bool)
    for row in range(g):
        for col in range(g):
            if rule == "center":
                cx, cy = (col + 0.5) / g, (row + 0.5) / g
                mask[row, col] = x0 <= cx <= x1 and y0 <= cy <= y1
            elif rule == "overlap":
                gx0, gy0, gx1, gy1 = col / g, row / g, (col + 1) / g, (row + 1) / g
                mask[row, col] = (min(gx1, x1) > max(gx0, x0)) and (min(gy1, y1) > max(gy0, y0))
            else:
                raise ValueError(f"unknown cell rule {rule!r}")
    return mask


def _region_corners(region):
    cx, cy, w, h = region
    return cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2


def loss_detector_fn(out: DetectorOutput, tau: float, kappa: float) -> float:
    """sum_b max(conf_b - (tau - kappa), 0): zero iff every box confidence is
    at or below tau - kappa, which empties filter_boxes at threshold tau."""
    return float(np.sum(np.maximum(out.confidences - (tau - kappa), 0.0), dtype=np.float64))


def loss_detector_fp(
    out: DetectorOutput,
    tau: float,
    kappa: float,
    region=None,
    cfg: DetectorConfig = DetectorConfig(),
    rule: str = "center",
) -> float:
    """sum over selected boxes of max(tau + kappa - conf_b, 0). Selection is
    all B boxes (the exact published form, the default for conformance) or,
    with a region, the boxes of cells chosen by `rule`."""
    conf = out.confidences
    if region is not None:
        conf = conf[region_cells(region, cfg, rule).ravel()]
    return float(np.sum(np.maximum(tau + kappa - conf, 0.0), dtype=np.float64))
