#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuração do treino e cronograma de temperatura da amostragem CONCRETE.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from utils.errors import ConfigError

PRECISION_NAMES = ("f32", "f64")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    steps: int = 5000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    tau_start: float = 1.0
    tau_end: float = 0.5
    # None: metade dos passos
    anneal_steps: Optional[int] = None
    seed: int = 0
    precision: str = "f64"
    straight_through: bool = False
    log_every: int = 100
    eval_every: int = 0
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size deve ser >= 1, recebeu {self.batch_size}")
        if self.steps < 0:
            raise ConfigError(f"steps não pode ser negativo, recebeu {self.steps}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate não pode ser negativa, recebeu {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f"momentos fora de [0, 1): beta1={self.beta1}, beta2={self.beta2}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon deve ser positivo, recebeu {self.epsilon}")
        if not (self.tau_start > 0 and self.tau_end > 0):
            raise ConfigError(f"temperaturas devem ser positivas ({self.tau_start}, {self.tau_end})")
        if self.tau_end > self.tau_start:
            raise ConfigError(f"tau_end ({self.tau_end}) maior que tau_start ({self.tau_start})")
        if self.anneal_steps is not None and self.anneal_steps < 0:
            raise ConfigError(f"anneal_steps não pode ser negativo, recebeu {self.anneal_steps}")
        if self.precision not in PRECISION_NAMES:
            raise ConfigError(f"precisão desconhecida: {self.precision} (use f32 ou f64)")
        for name in ("log_every", "eval_every", "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} não pode ser negativo")

    @property
    def anneal_length(self) -> int:
        return self.steps // 2 if self.anneal_steps is None else self.anneal_steps

    def temperature(self, step: int) -> float:
        """τ linear de tau_start a tau_end durante anneal_length passos, depois constante."""
        length = self.anneal_length
        if length <= 0 or step >= length:
            return float(self.tau_end)
        fraction = max(step, 0) / length
        return float(self.tau_start + (self.tau_end - self.tau_start) * fraction)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        return cls(**data)
