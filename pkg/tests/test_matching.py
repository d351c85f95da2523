import numpy as np
import pytest

from adworkbench.matchers import MatcherConfig, ratio_test_match
from adworkbench.matchers.matching import nearest_two


def test_self_match_all_matched():
    rng = np.random.default_rng(1)
    desc = rng.random((6, 128))
    desc /= np.linalg.norm(desc, axis=1, keepdims=True)
    res = ratio_test_match(desc, desc, tau=0.6)
    assert res.matched.all()
    assert res.matched_count == 6
    assert np.allclose(res.d1, 0.0)


def test_toy_descriptor_hand_arithmetic():
    template = np.array([[1.0, 0.0], [0.0, 1.0]])
    query = np.array([[0.8, 0.0]])
    res = ratio_test_match(query, template, tau=0.6)
    assert res.d1[0] == pytest.approx(0.2)
    assert res.d2[0] == pytest.approx(np.sqrt(1.64))
    assert res.d1[0] / res.d2[0] == pytest.approx(0.15617, abs=1e-4)
    assert res.matched[0]


def test_equidistant_query_not_matched():
    template = np.array([[1.0, 0.0], [0.0, 1.0]])
    query = np.array([[0.5, 0.5]])
    res = ratio_test_match(query, template, tau=0.6)
    assert res.d1[0] == pytest.approx(res.d2[0])
    assert not res.matched[0]


def test_small_template_produces_no_matches():
    query = np.random.default_rng(0).random((4, 128))
    for t in (np.zeros((0, 128)), query[:1]):
        res = ratio_test_match(query, t)
        assert res.matched_count == 0


def test_d1_le_d2_and_bruteforce_equality():
    rng = np.random.default_rng(9)
    q = rng.random((20, 128))
    t = rng.random((15, 128))
    d1, d2, _ = nearest_two(q, t)
    assert np.all(d1 <= d2)
    # independent brute-force scan, one pair at a time
    for i in range(len(q)):
        dists = []
        for j in range(len(t)):
            dists.append(np.sqrt(np.sum((q[i] - t[j]) ** 2)))
        s = sorted(dists)
        assert d1[i] == s[0]
        assert d2[i] == s[1]


def test_matched_count_monotone_in_tau():
    rng = np.random.default_rng(11)
    q = rng.random((30, 16))
    t = rng.random((12, 16))
    taus = np.linspace(0.05, 0.95, 10)
    counts = [ratio_test_match(q, t, tau=tau).matched_count for tau in taus]
    assert counts == sorted(counts)


def test_matcher_config_validation():
    with pytest.raises(ValueError):
        MatcherConfig(ratio_tau=1.5)
    with pytest.raises(ValueError):
        MatcherConfig(hamming_threshold=65)
