"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteGradient


@dataclass
class AdamConfig:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


class Adam:
    """Tracks first/second moment estimates per named parameter."""

    def __init__(self, named_params, config: AdamConfig = AdamConfig()):
        # named_params: iterable of (name, layer, key) as yielded by Sequential
        self.entries = list(named_params)
        self.config = config
        self.t = 0
        self.m = {name: np.zeros_like(layer.params[key]) for name, layer, key in self.entries}
        self.v = {name: np.zeros_like(layer.params[key]) for name, layer, key in self.entries}

    def step(self):
        cfg = self.config
        for name, layer, key in self.entries:  # validate before mutating anything
            if not np.all(np.isfinite(layer.grads[key])):
                raise NonFiniteGradient(name)
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for name, layer, key in self.entries:
            g = layer.grads[key]
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            layer.params[key] -= cfg.lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)

    def zero_grads(self):
        for _, layer, key in self.entries:
            layer.grads[key][...] = 0.0
