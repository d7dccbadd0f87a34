#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Blocos de rede usados por f_ℓ, g_ℓ e pelas cabeças μ, σ e π.

Todos seguem a mesma interface (NetworkBlock), de modo que a arquitetura pode
ser trocada sem mexer nas equações do modelo.
"""

from __future__ import annotations

from typing import Mapping, Protocol, Sequence

import numpy as np

from autodiff import Tensor

from .parameters import ParameterStore, parameter_rng

ACTIVATIONS = ("linear", "relu", "sigmoid")


class NetworkBlock(Protocol):
    name: str
    in_dim: int
    out_dim: int

    def init(self, store: ParameterStore, seed: int) -> None:
        ...

    def __call__(self, params: Mapping[str, Tensor], x: Tensor) -> Tensor:
        ...


class MLP:
    """
    Perceptron multicamada com relu entre camadas.

    Args:
        name: Prefixo dos parâmetros (ex.: "enc.g1")
        sizes: Larguras [entrada, ocultas..., saída]
        output: Ativação da saída ("linear", "relu" ou "sigmoid")
    """

    def __init__(self, name: str, sizes: Sequence[int], output: str = "linear"):
        if len(sizes) < 2:
            raise ValueError(f"{name}: MLP precisa de entrada e saída")
        if output not in ACTIVATIONS:
            raise ValueError(f"{name}: ativação desconhecida {output}")
        self.name = name
        self.sizes = tuple(int(s) for s in sizes)
        self.output = output

    @classmethod
    def block(cls, name: str, in_dim: int, hidden: int, out_dim: int, depth: int = 1, output: str = "relu") -> "MLP":
        """Bloco padrão: 2 camadas ocultas por unidade de profundidade."""
        return cls(name, [in_dim] + [hidden] * (2 * depth) + [out_dim], output)

    @classmethod
    def linear(cls, name: str, in_dim: int, out_dim: int) -> "MLP":
        return cls(name, [in_dim, out_dim], "linear")

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def param_names(self):
        for i in range(len(self.sizes) - 1):
            yield f"{self.name}.{i}.W", f"{self.name}.{i}.b"

    def init(self, store: ParameterStore, seed: int) -> None:
        for i, (w_name, b_name) in enumerate(self.param_names()):
            fan_in, fan_out = self.sizes[i], self.sizes[i + 1]
            # He para camadas seguidas de relu
            gain = 2.0 if i < len(self.sizes) - 2 or self.output == "relu" else 1.0
            rng = parameter_rng(seed, w_name)
            store.add(w_name, rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out)))
            store.add(b_name, np.zeros(fan_out))

    def __call__(self, params: Mapping[str, Tensor], x: Tensor) -> Tensor:
        last = len(self.sizes) - 2
        for i, (w_name, b_name) in enumerate(self.param_names()):
            x = x @ params[w_name] + params[b_name]
            if i < last:
                x = x.relu()
        if self.output == "relu":
            return x.relu()
        if self.output == "sigmoid":
            return x.sigmoid()
        return x
