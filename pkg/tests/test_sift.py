import numpy as np
import pytest

from adworkbench.imaging import Image
from adworkbench.matchers import ratio_test_match, sift_keypoints
from adworkbench.matchers.sift import (
    BORDER,
    dog_pyramid,
    gaussian_pyramid,
    scan_extrema,
)


def square_image(size=4, canvas=64):
    arr = np.zeros((canvas, canvas, 1))
    lo = (canvas - size) // 2
    arr[lo : lo + size, lo : lo + size, 0] = 1.0
    corners = [(lo, lo), (lo, lo + size - 1), (lo + size - 1, lo), (lo + size - 1, lo + size - 1)]
    return Image(arr), corners


def test_constant_image_has_no_keypoints():
    assert sift_keypoints(Image(np.full((48, 48, 1), 0.5))) == []


def test_tiny_image_yields_empty_list():
    assert sift_keypoints(Image(np.full((8, 8, 1), 0.5))) == []


def test_descriptor_invariants():
    rng = np.random.default_rng(23)
    img = Image(rng.random((48, 64, 1)))
    kps = sift_keypoints(img)
    assert len(kps) > 0
    for kp in kps:
        assert kp.descriptor.shape == (128,)
        assert np.all(kp.descriptor >= 0)
        assert np.linalg.norm(kp.descriptor) == pytest.approx(1.0, abs=1e-6)
        assert 0 <= kp.x < img.width
        assert 0 <= kp.y < img.height
        assert kp.vector().shape == (132,)


def test_corner_pattern_keypoints():
    # DoG responds to the square as a compact blob, so keypoints cluster on it;
    # with a 4px square every corner is within 3px of the detections
    img, corners = square_image(size=4)
    kps = sift_keypoints(img)
    within = [kp for kp in kps if min(np.hypot(kp.x - cx, kp.y - cy) for cy, cx in corners) <= 3.0]
    assert len(within) >= 4
    for cy, cx in corners:
        assert min(np.hypot(kp.x - cx, kp.y - cy) for kp in kps) <= 3.0


def test_extrema_scan_matches_bruteforce_oracle():
    img, _ = square_image(size=4)
    rng = np.random.default_rng(5)
    noisy = Image(np.clip(img.data + 0.08 * rng.random((64, 64, 1)), 0.0, 1.0))
    gray = noisy.data[:, :, 0]
    threshold = 0.005
    for dog in dog_pyramid(gaussian_pyramid(gray)):
        got = {tuple(v) for v in scan_extrema(dog, threshold)}
        # exhaustive scan, explicit loops
        expected = set()
        n_layers, h, w = dog.shape
        for l in range(1, n_layers - 1):
            for y in range(BORDER + 1, h - BORDER - 1):
                for x in range(BORDER + 1, w - BORDER - 1):
                    v = dog[l, y, x]
                    if abs(v) <= threshold:
                        continue
                    neigh = []
                    for dl in (-1, 0, 1):
                        for dy in (-1, 0, 1):
                            for dx in (-1, 0, 1):
                                if dl == dy == dx == 0:
                                    continue
                                neigh.append(dog[l + dl, y + dy, x + dx])
                    hi, lo = max(neigh), min(neigh)
                    if hi == lo:
                        continue
                    if v >= hi or v <= lo:
                        expected.add((l, y, x))
        assert got == expected


def test_self_match_has_zero_distances():
    rng = np.random.default_rng(31)
    img = Image(rng.random((40, 56, 1)))
    kps = sift_keypoints(img)
    assert len(kps) >= 2
    res = ratio_test_match(kps, kps)
    assert np.allclose(res.d1, 0.0)
    assert res.matched.all()


def test_detection_is_deterministic():
    rng = np.random.default_rng(37)
    arr = rng.random((32, 48, 1))
    a = sift_keypoints(Image(arr))
    b = sift_keypoints(Image(arr))
    assert len(a) == len(b)
    for ka, kb in zip(a, b):
        assert (ka.x, ka.y, ka.scale, ka.orientation) == (kb.x, kb.y, kb.scale, kb.orientation)
        assert np.array_equal(ka.descriptor, kb.descriptor)
