import numpy as np
import pytest

from adworkbench.diffnet import (
    Dense,
    DetectorConfig,
    DetectorOutput,
    Network,
    build_detector,
    detector_target,
    filter_boxes,
    grid_detect,
    iou,
    saliency_map,
)
from adworkbench.diffnet.detector import decode_grid, detector_loss
from adworkbench.imaging import Image


def test_iou_identity_disjoint_hand():
    a = np.array([0.5, 0.5, 0.2, 0.2])
    assert iou(a, a) == pytest.approx(1.0)
    b = np.array([0.9, 0.9, 0.1, 0.1])
    assert iou(a, b) == 0.0
    # corner boxes (0,0)-(2,2) and (1,1)-(3,3) -> 1/7
    c = np.array([1.0, 1.0, 2.0, 2.0])
    d = np.array([2.0, 2.0, 2.0, 2.0])
    assert iou(c, d) == pytest.approx(1 / 7)


def test_iou_symmetric_bounded():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.random(4)
        b = rng.random(4)
        v = iou(a, b)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(iou(b, a))


def test_degenerate_union_is_zero():
    z = np.array([0.5, 0.5, 0.0, 0.0])
    assert iou(z, z) == 0.0


def test_grid_detect_contract():
    cfg = DetectorConfig()
    net = build_detector(seed=1)
    rng = np.random.default_rng(2)
    page = Image(rng.random((300, 280, 3)))
    out = grid_detect(net, page, cfg)
    assert len(out.boxes) == 64
    assert len(out.confidences) == 64
    assert np.all((out.confidences >= 0) & (out.confidences <= 1))
    # purity: repeated evaluation is bit-identical
    out2 = grid_detect(net, page, cfg)
    assert np.array_equal(out.boxes, out2.boxes)
    assert np.array_equal(out.confidences, out2.confidences)


def test_forced_low_confidence_logits():
    net = build_detector(seed=3)
    # slam the confidence bias to -10
    head = net.layers[-1]
    head.params["w"][:] = 0
    head.params["b"][:] = 0
    head.params["b"][0] = -10.0
    page = Image(np.random.default_rng(4).random((256, 256, 3)))
    out = grid_detect(net, page)
    assert np.all(out.confidences < 0.01)


def test_filter_boxes_threshold_semantics():
    boxes = np.array([[0.2, 0.2, 0.1, 0.1], [0.8, 0.8, 0.1, 0.1]])
    out = DetectorOutput(boxes=boxes, confidences=np.array([0.6, 0.4]))
    dets = filter_boxes(out, tau=0.5)
    assert len(dets) == 1 and dets[0].index == 0
    out_low = DetectorOutput(boxes=boxes, confidences=np.array([0.3, 0.4]))
    assert filter_boxes(out_low, tau=0.5) == []


def test_filter_boxes_nms():
    boxes = np.array([[0.5, 0.5, 0.4, 0.4], [0.52, 0.52, 0.4, 0.4], [0.9, 0.1, 0.1, 0.1]])
    conf = np.array([0.9, 0.7, 0.8])
    assert iou(boxes[0], boxes[1]) > 0.5
    dets = filter_boxes(DetectorOutput(boxes=boxes, confidences=conf), tau=0.5)
    kept = [d.index for d in dets]
    assert kept == [0, 2]


def test_filter_boxes_subset_and_monotone():
    rng = np.random.default_rng(5)
    out = DetectorOutput(boxes=rng.random((64, 4)), confidences=rng.random(64))
    sizes = []
    for tau in np.linspace(0.1, 0.9, 9):
        dets = filter_boxes(out, tau=tau)
        sizes.append(len(dets))
        for d in dets:
            assert d.confidence > tau
    assert sizes == sorted(sizes, reverse=True)


def test_detector_loss_gradient_vs_fd():
    cfg = DetectorConfig()
    rng = np.random.default_rng(6)
    obj = np.zeros((2, 8, 8), dtype=bool)
    obj[0, 3, 4] = True
    obj[1, 1, 1] = True
    coords = rng.random((2, 8, 8, 4))
    loss = detector_loss(obj, coords, cfg)
    y = rng.standard_normal((2, 8, 8, 5))
    val, grad = loss(y)
    h = 1e-5
    flat = y.ravel()
    for i in rng.choice(y.size, 60, replace=False):
        orig = flat[i]
        flat[i] = orig + h
        vp, _ = loss(y)
        flat[i] = orig - h
        vm, _ = loss(y)
        flat[i] = orig
        fd = (vp - vm) / (2 * h)
        assert grad.ravel()[i] == pytest.approx(fd, rel=1e-3, abs=1e-7)


def test_detector_target_assignment():
    cfg = DetectorConfig()
    obj, coords = detector_target([(0.5, 0.5, 0.2, 0.1)], cfg)
    assert obj[4, 4]
    assert obj.sum() == 1
    cx_off, cy_off, tw, th = coords[4, 4]
    assert cx_off == pytest.approx(0.0)
    assert tw == pytest.approx(np.log(0.2 / cfg.anchor[0]))


def test_decode_grid_round_trip_of_targets():
    # targets built from a box decode back to that box
    cfg = DetectorConfig()
    box = (0.53, 0.22, 0.3, 0.12)
    obj, coords = detector_target([box], cfg)
    row, col = np.argwhere(obj)[0]
    raw = np.zeros((8, 8, 5))
    raw[:, :, 0] = -10
    eps = 1e-9

    def logit(p):
        p = min(max(p, eps), 1 - eps)
        return np.log(p / (1 - p))

    raw[row, col] = (10, logit(coords[row, col][0]), logit(coords[row, col][1]), coords[row, col][2], coords[row, col][3])
    out = decode_grid(raw, cfg)
    dets = filter_boxes(out, 0.5)
    assert len(dets) == 1
    assert iou(dets[0].box, np.array(box)) > 0.999


def test_saliency_constant_network_is_zero():
    # zero-weight dense network -> all-zero map stays all-zero after normalization
    net = Network([Dense(np.zeros((12, 3)), np.zeros(3))])
    page = Image(np.random.default_rng(7).random((2, 2, 3)))
    sal = saliency_map(net, Image(page.data.reshape(2, 2, 3)), cfg=None, smooth_sigma=0.0)
    assert np.array_equal(sal.data, np.zeros((2, 2, 1)))


def test_saliency_linear_network_is_abs_weights():
    rng = np.random.default_rng(8)
    w = rng.standard_normal((4, 1))
    net = Network([Dense(w, np.zeros(1))])
    page = Image(rng.random((2, 2, 1)))
    sal = saliency_map(net, page, cfg=None, smooth_sigma=0.0)
    expected = np.abs(w).reshape(2, 2)
    expected = expected / expected.max()
    assert np.allclose(sal.data[:, :, 0], expected)


def test_saliency_detector_mode_dims_and_range():
    net = build_detector(seed=9)
    page = Image(np.random.default_rng(10).random((256, 256, 3)))
    sal = saliency_map(net, page)
    assert (sal.height, sal.width, sal.channels) == (256, 256, 1)
    assert sal.data.min() >= 0.0 and sal.data.max() <= 1.0
