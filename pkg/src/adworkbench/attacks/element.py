"""Element-classifier attacks: black-box keypoint-matcher evasion on logos."""

from __future__ import annotations

import numpy as np

from adworkbench.imaging import Image, composite_over, constant
from adworkbench.matchers import MATCH_MIN, RATIO_TAU, ratio_test_match, sift_keypoints
from adworkbench.attacks.core import AttackConfig, AttackResult, PerturbationBudget
from adworkbench.attacks.losses import loss_sift
from adworkbench.attacks.nes import black_box_attack

# margin keeps the on-disk (8-bit rounded) perturbation inside the stated
# l2 budget: rounding moves each coordinate by at most 0.5/255
QUANT_MARGIN = 0.5 / 255.0


def composite_on_white(rgba: np.ndarray) -> Image:
    arr = np.clip(rgba, 0.0, 1.0)
    h, w = arr.shape[:2]
    return composite_over(constant(h, w, (1.0, 1.0, 1.0)), Image(arr), opacity=1.0)


def sift_evasion_attack(
    logo: Image,
    budget: PerturbationBudget,
    cfg: AttackConfig,
    nes_sigma: float = 0.08,
    nes_samples: int = 40,
    max_queries: int = 20000,
    tau: float = RATIO_TAU,
    match_min: int = MATCH_MIN,
) -> AttackResult:
    """Evade the keypoint matcher for a logo template with forward queries
    only. Perturbs the RGB planes (alpha untouched); the matcher pipeline is
    queried on the white-composited render. Success: matched_count <
    match_min after 8-bit rounding."""
    rgba = logo.data
    alpha_plane = rgba[:, :, 3:4] if logo.channels == 4 else np.ones_like(rgba[:, :, :1])
    x = rgba[:, :, :3].copy()
    template_kps = sift_keypoints(composite_on_white(np.concatenate([x, alpha_plane], axis=2)))

    def perturbed_image(rgb):
        return composite_on_white(np.concatenate([np.clip(rgb, 0.0, 1.0), alpha_plane], axis=2))

    def loss(rgb):
        value, _ = loss_sift(perturbed_image(rgb), template_kps, tau)
        return value

    def matched_count(rgb):
        res = ratio_test_match(sift_keypoints(perturbed_image(rgb)), template_kps, tau)
        return res.matched_count

    def success(rgb):
        rounded = np.round(np.clip(rgb, 0.0, 1.0) * 255.0) / 255.0
        return matched_count(rounded) < match_min

    run_budget = budget
    if budget.norm == "l2":
        slack = QUANT_MARGIN * np.sqrt(x.size)
        run_budget = PerturbationBudget("l2", max(budget.epsilon - slack, budget.epsilon * 0.5))
    result = black_box_attack(
        loss,
        x,
        run_budget,
        cfg,
        nes_sigma=nes_sigma,
        nes_samples=nes_samples,
        success_fn=success,
        max_queries=max_queries,
    )
    final_rgb = np.round(np.clip(x + result.delta, 0.0, 1.0) * 255.0) / 255.0
    result.delta = final_rgb - x
    result.achieved_norm = budget.norm_of(result.delta)
    result.info["template_keypoints"] = len(template_kps)
    result.info["final_matched"] = matched_count(final_rgb)
    result.info["perturbed_rgba"] = np.concatenate([final_rgb, alpha_plane], axis=2)
    result.success = bool(result.info["final_matched"] < match_min)
    return result
