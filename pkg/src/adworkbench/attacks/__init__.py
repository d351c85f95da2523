"""Adversarial-example engine: projections, PGD, black-box NES, the keypoint
and detector proxy losses, universal perturbations, honeypots, and the
cross-boundary attack."""

from adworkbench.attacks.core import (
    AttackConfig,
    AttackResult,
    PerturbationBudget,
    pgd,
    project,
)
from adworkbench.attacks.nes import black_box_attack, nes_gradient
from adworkbench.attacks.losses import (
    loss_detector_fn,
    loss_detector_fp,
    loss_sift,
    loss_sift_fp,
    region_cells,
)
from adworkbench.attacks.pages import (
    craft_honeypot,
    cross_boundary_attack,
    detector_page_loss,
    universal_perturbation,
)

__all__ = [
    "AttackConfig",
    "AttackResult",
    "PerturbationBudget",
    "pgd",
    "project",
    "black_box_attack",
    "nes_gradient",
    "loss_detector_fn",
    "loss_detector_fp",
    "loss_sift",
    "loss_sift_fp",
    "region_cells",
    "craft_honeypot",
    "cross_boundary_attack",
    "detector_page_loss",
    "universal_perturbation",
]
