"""Adaptive per-parameter gradient scaling with linear warmup."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    warmup_steps: int = 100


class Adam:
    """Moment-tracking optimizer updating a parameter dict in place.

    The learning rate ramps linearly over the first ``warmup_steps`` steps
    and stays constant afterwards.  Updates are deterministic: moments are
    keyed by parameter name and applied in sorted order.
    """

    def __init__(self, params: dict[str, np.ndarray], config: AdamConfig = AdamConfig()):
        self.config = config
        self.step_count = 0
        self._m = {k: np.zeros_like(v) for k, v in params.items()}
        self._v = {k: np.zeros_like(v) for k, v in params.items()}

    def current_lr(self) -> float:
        c = self.config
        if c.warmup_steps <= 0:
            return c.lr
        return c.lr * min(1.0, self.step_count / c.warmup_steps)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        c = self.config
        lr = self.current_lr()
        b1t = 1.0 - c.beta1 ** self.step_count
        b2t = 1.0 - c.beta2 ** self.step_count
        for name in sorted(params):
            g = grads[name]
            m = self._m[name]
            v = self._v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * (g * g)
            update = (m / b1t) / (np.sqrt(v / b2t) + c.eps)
            params[name] -= np.asarray(lr * update, dtype=params[name].dtype)
