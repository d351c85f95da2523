"""Antithetic NES gradient estimation and the black-box PGD loop."""

from __future__ import annotations

import numpy as np

from adworkbench.attacks.core import AttackConfig, AttackResult, PerturbationBudget, project


def nes_gradient(loss, x: np.ndarray, sigma: float, n: int, seed: int) -> np.ndarray:
    """ghat = 1/(n*sigma) * sum_i [loss(x + sigma u_i) - loss(x - sigma u_i)] u_i
    over n/2 antithetic standard-Gaussian pairs. Deterministic given seed;
    exactly zero for losses even about x."""
    if n % 2 or n <= 0:
        raise ValueError("sample count must be positive and even")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x4E5)))
    est = np.zeros_like(x, dtype=np.float64)
    for _ in range(n // 2):
        u = rng.standard_normal(x.shape)
        diff = loss(x + sigma * u) - loss(x - sigma * u)
        est += diff * u
    return est / (n * sigma)


def black_box_attack(
    loss,
    x: np.ndarray,
    budget: PerturbationBudget,
    cfg: AttackConfig,
    nes_sigma: float = 0.05,
    nes_samples: int = 50,
    success_fn=None,
    max_queries: int | None = None,
) -> AttackResult:
    """PGD with the analytic gradient replaced by the NES estimate.

    `loss` is forward-only. Every loss evaluation counts as one query,
    including the per-step success probes. Stops early when success_fn(x+d)
    is true or the query budget runs out.
    """
    queries = 0

    def counted(v):
        nonlocal queries
        queries += 1
        return loss(v)

    delta = np.zeros_like(x)
    value = counted(x + delta)
    best_value = value
    best_delta = delta.copy()
    trace = [value]
    success = bool(success_fn(x + delta)) if success_fn else False
    if success_fn:
        queries += 1
    step = 0
    while not success and step < cfg.steps:
        if max_queries is not None and queries + nes_samples + 2 > max_queries:
            break
        grad = nes_gradient(counted, x + delta, nes_sigma, nes_samples, seed=cfg.seed + 7919 * step)
        if budget.norm == "linf":
            direction = np.sign(grad)
        else:
            g = np.sqrt(np.sum(grad**2))
            direction = grad / g if g > 0 else grad
        delta = project(delta - cfg.step_size * direction, x, budget)
        value = counted(x + delta)
        trace.append(value)
        if value < best_value:
            best_value = value
            best_delta = delta.copy()
        if success_fn:
            success = bool(success_fn(x + delta))
            queries += 1
            if success:
                best_delta = delta.copy()
        step += 1
    return AttackResult(
        delta=best_delta,
        success=success,
        loss_trace=trace,
        queries=queries,
        achieved_norm=budget.norm_of(best_delta),
        info={"steps_used": step},
    )
