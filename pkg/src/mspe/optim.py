"""Adam optimizer with the beta1=0, beta2=0.99 defaults used for training."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Step count and per-parameter moment accumulators."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    step: int = 0
    beta1: float = 0.0
    beta2: float = 0.99
    eps: float = 1e-8


def init_adam(params, beta1: float = 0.0, beta2: float = 0.99) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p.data) for p in params],
        v=[np.zeros_like(p.data) for p in params],
        beta1=beta1,
        beta2=beta2,
    )


def adam_step(params, grads, state: AdamState, lr: float) -> AdamState:
    """One bias-corrected Adam update; with beta1=0 the first moment is the
    raw gradient. Parameters are updated in place."""
    if len(params) != len(state.m):
        raise ValueError(f"state tracks {len(state.m)} params, got {len(params)}")
    state.step += 1
    b1, b2 = np.float32(state.beta1), np.float32(state.beta2)
    c1 = 1.0 - state.beta1**state.step
    c2 = 1.0 - state.beta2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=np.float32)
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / c1
        v_hat = v / c2
        p.data -= np.float32(lr) * m_hat / (np.sqrt(v_hat) + np.float32(state.eps))
    return state


def adam_step_from_grads(params, state: AdamState, lr: float) -> AdamState:
    """Convenience wrapper reading accumulated .grad fields (zero if absent)."""
    grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in params]
    return adam_step(params, grads, state, lr)
