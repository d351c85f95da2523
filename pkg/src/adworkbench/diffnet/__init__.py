"""Minimal differentiable-network core with analytic gradients.

Fixed layer set (conv2d, relu, maxpool2d, flatten, dense, sigmoid, softmax),
a feed-forward Network container, SGD-with-momentum training, and the toy
grid detector that exposes the YOLO-style output contract.
"""

from adworkbench.diffnet.layers import (
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    ReLU,
    Sigmoid,
    Softmax,
)
from adworkbench.diffnet.network import (
    Network,
    bce_with_logits_loss,
    ce_with_logits_loss,
    forward,
    input_gradient,
    load_network,
    save_network,
    sum_loss,
)
from adworkbench.diffnet.train import TrainConfig, train
from adworkbench.diffnet.detector import (
    DetectorConfig,
    DetectorOutput,
    Detection,
    build_detector,
    detector_input,
    detector_target,
    filter_boxes,
    grid_detect,
    grid_detect_raw,
    iou,
    saliency_map,
)
from adworkbench.diffnet.frame import FRAME_SIZE, build_frame_classifier, classify_frame, frame_input

__all__ = [
    "Conv2D",
    "Dense",
    "Flatten",
    "MaxPool2D",
    "ReLU",
    "Sigmoid",
    "Softmax",
    "Network",
    "forward",
    "input_gradient",
    "save_network",
    "load_network",
    "sum_loss",
    "bce_with_logits_loss",
    "ce_with_logits_loss",
    "TrainConfig",
    "train",
    "DetectorConfig",
    "DetectorOutput",
    "Detection",
    "build_detector",
    "detector_input",
    "detector_target",
    "filter_boxes",
    "grid_detect",
    "grid_detect_raw",
    "iou",
    "saliency_map",
    "FRAME_SIZE",
    "build_frame_classifier",
    "classify_frame",
    "frame_input",
]
