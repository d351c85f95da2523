"""Nearest-neighbour descriptor matching with Lowe's ratio test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RATIO_TAU = 0.6
MATCH_MIN = 5  # matched keypoints needed to declare a template hit


@dataclass(frozen=True)
class MatcherConfig:
    ratio_tau: float = RATIO_TAU
    hamming_threshold: int = 8
    match_min: int = MATCH_MIN

    def __post_init__(self):
        if not 0.0 < self.ratio_tau < 1.0:
            raise ValueError("ratio_tau must be in (0,1)")
        if not 0 <= self.hamming_threshold <= 64:
            raise ValueError("hamming_threshold must be in [0,64]")


@dataclass
class MatchResult:
    d1: np.ndarray  # nearest template distance per query keypoint
    d2: np.ndarray  # second-nearest distance per query keypoint
    matched: np.ndarray  # bool per query keypoint

    @property
    def matched_count(self) -> int:
        return int(np.count_nonzero(self.matched))


def descriptor_matrix(keypoints) -> np.ndarray:
    """(n, 128) descriptor stack; accepts Keypoint lists or a raw array."""
    if isinstance(keypoints, np.ndarray):
        return keypoints.reshape(len(keypoints), -1) if len(keypoints) else keypoints.reshape(0, 0)
    if not keypoints:
        return np.zeros((0, 128))
    return np.stack([kp.descriptor for kp in keypoints])


def nearest_two(query: np.ndarray, template: np.ndarray):
    """Exact brute-force nearest two distances plus the nearest index.

    Ties break by template keypoint index (stable sort).
    """
    diff = query[:, None, :] - template[None, :, :]
    dists = np.sqrt(np.sum(diff * diff, axis=-1))
    order = np.argsort(dists, axis=1, kind="stable")
    d1 = np.take_along_axis(dists, order[:, :1], axis=1)[:, 0]
    d2 = np.take_along_axis(dists, order[:, 1:2], axis=1)[:, 0]
    return d1, d2, order[:, 0]


def ratio_test_match(query, template, tau: float = RATIO_TAU) -> MatchResult:
    """Per query keypoint: matched iff d1/d2 < tau, with 0/0 counted a match.

    Templates with fewer than two keypoints produce no matches (d2 undefined).
    """
    q = descriptor_matrix(query)
    t = descriptor_matrix(template)
    n = len(q)
    if n == 0:
        return MatchResult(np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))
    if len(t) < 2:
        d1 = np.full(n, np.nan)
        if len(t) == 1:
            d1 = np.sqrt(np.sum((q - t[0]) ** 2, axis=-1))
        return MatchResult(d1, np.full(n, np.nan), np.zeros(n, dtype=bool))
    d1, d2, _ = nearest_two(q, t)
    matched = (d1 < tau * d2) | (d2 == 0.0)
    return MatchResult(d1, d2, matched)


def template_hit(query, template, tau: float = RATIO_TAU, match_min: int = MATCH_MIN) -> bool:
    """An image contains the template iff at least match_min keypoints match."""
    return ratio_test_match(query, template, tau).matched_count >= match_min
