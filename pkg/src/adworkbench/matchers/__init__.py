"""Element-based ad-disclosure classifiers: average hashing and SIFT matching."""

from adworkbench.matchers.hashing import (
    HASH_GRID,
    HAMMING_THRESHOLD,
    HashDigest,
    PaddingAttackResult,
    average_hash,
    hamming_distance,
    hamming_match,
    transparent_padding_attack,
)
from adworkbench.matchers.matching import (
    MATCH_MIN,
    RATIO_TAU,
    MatchResult,
    MatcherConfig,
    descriptor_matrix,
    ratio_test_match,
    template_hit,
)
from adworkbench.matchers.sift import Keypoint, sift_keypoints
from adworkbench.matchers.templates import TemplateBundle, bundled_logo_dir

__all__ = [
    "HASH_GRID",
    "HAMMING_THRESHOLD",
    "HashDigest",
    "PaddingAttackResult",
    "average_hash",
    "hamming_distance",
    "hamming_match",
    "transparent_padding_attack",
    "MATCH_MIN",
    "RATIO_TAU",
    "MatchResult",
    "MatcherConfig",
    "descriptor_matrix",
    "ratio_test_match",
    "template_hit",
    "Keypoint",
    "sift_keypoints",
    "TemplateBundle",
    "bundled_logo_dir",
]
