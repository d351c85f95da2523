"""Norm-ball projections and projected gradient descent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from adworkbench.imaging import quantize

KAPPA_DEFAULT = 0.1


@dataclass(frozen=True)
class PerturbationBudget:
    """Constraint set for delta: an l2 or linf ball of radius epsilon, with
    x + delta additionally clamped to valid pixel range [0,1]."""

    norm: str
    epsilon: float

    def __post_init__(self):
        if self.norm not in ("l2", "linf"):
            raise ValueError(f"unknown norm {self.norm!r}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def norm_of(self, delta: np.ndarray) -> float:
        if self.norm == "linf":
            return float(np.max(np.abs(delta))) if delta.size else 0.0
        return float(np.sqrt(np.sum(delta.astype(np.float64) ** 2)))


@dataclass(frozen=True)
class AttackConfig:
    steps: int = 100
    step_size: float = 0.01
    kappa: float = KAPPA_DEFAULT
    seed: int = 0
    quantize: bool = False  # round x+delta to the 8-bit grid after projection

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")


@dataclass
class AttackResult:
    delta: np.ndarray
    success: bool
    loss_trace: list = field(default_factory=list)
    queries: int = 0
    achieved_norm: float = 0.0
    info: dict = field(default_factory=dict)


def project(delta: np.ndarray, x: np.ndarray, budget: PerturbationBudget) -> np.ndarray:
    """Project onto the budget ball, then clamp x+delta to [0,1] and return
    the implied delta."""
    if delta.shape != x.shape:
        raise ValueError("delta/x shape mismatch")
    if budget.norm == "linf":
        d = np.clip(delta, -budget.epsilon, budget.epsilon)
    else:
        n = np.sqrt(np.sum(delta.astype(np.float64) ** 2))
        d = delta * (budget.epsilon / n) if n > budget.epsilon else delta
    return np.clip(x + d, 0.0, 1.0) - x


def _apply_quantize(delta: np.ndarray, x: np.ndarray, budget: PerturbationBudget) -> np.ndarray:
    d = quantize(x + delta) - x
    if budget.norm == "linf":
        d = np.clip(d, -budget.epsilon, budget.epsilon)
    return d


def pgd(loss, x: np.ndarray, budget: PerturbationBudget, cfg: AttackConfig) -> AttackResult:
    """Minimize loss(x + delta) over the budget ball, returning the best
    iterate.

    `loss` maps a perturbed input to (value, gradient); linf steps follow
    sign(g), l2 steps the l2-normalized gradient. With cfg.quantize the
    perturbed input is rounded to 8-bit after every projection, so the
    returned x+delta is 8-bit representable.
    """
    delta = np.zeros_like(x)
    best_value, _ = loss(x + delta)
    best_delta = delta.copy()
    trace = [best_value]
    for _ in range(cfg.steps):
        value, grad = loss(x + delta)
        if budget.norm == "linf":
            step = np.sign(grad)
        else:
            g = np.sqrt(np.sum(grad.astype(np.float64) ** 2))
            step = grad / g if g > 0 else grad
        delta = project(delta - cfg.step_size * step, x, budget)
        if cfg.quantize:
            delta = _apply_quantize(delta, x, budget)
        value, _ = loss(x + delta)
        trace.append(value)
        if value < best_value:
            best_value = value
            best_delta = delta.copy()
    return AttackResult(
        delta=best_delta,
        success=False,  # caller decides; criterion is attack-specific
        loss_trace=trace,
        queries=0,
        achieved_norm=budget.norm_of(best_delta),
        info={"best_loss": best_value},
    )
