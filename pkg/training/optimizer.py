#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Otimizador de momentos adaptativos (Adam) sobre um ParameterStore.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ladder import ParameterStore
from utils.errors import NonFiniteError


@dataclass
class AdamState:
    m: ParameterStore
    v: ParameterStore
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ParameterStore) -> "AdamState":
        zeros = {name: np.zeros_like(array) for name, array in params.items()}
        return cls(ParameterStore(zeros), ParameterStore(zeros))

    def slots(self) -> dict:
        return {"adam.m": self.m, "adam.v": self.v}


class Adam:
    """
    Args:
        learning_rate: Passo
        beta1: Decaimento do primeiro momento
        beta2: Decaimento do segundo momento
        epsilon: Estabilizador do denominador
    """

    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon

    def step(self, params: ParameterStore, grads: Mapping[str, np.ndarray], state: AdamState) -> None:
        """Aplica um passo de descida (minimiza a perda cujos gradientes foram dados)."""
        for name, grad in grads.items():
            if not np.isfinite(grad).all():
                raise NonFiniteError(name, "gradiente")

        state.t += 1
        bias1 = 1.0 - self.beta1 ** state.t
        bias2 = 1.0 - self.beta2 ** state.t
        new_m, new_v, new_params = {}, {}, {}
        for name, grad in grads.items():
            m = self.beta1 * state.m[name] + (1.0 - self.beta1) * grad
            v = self.beta2 * state.v[name] + (1.0 - self.beta2) * grad * grad
            step = self.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + self.epsilon)
            new_m[name], new_v[name] = m, v
            new_params[name] = params[name] - step
        state.m.update(new_m)
        state.v.update(new_v)
        params.update(new_params)
