#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Armazenamento dos parâmetros θ, φ.

O treino muta um único ParameterStore em uma thread; snapshot() produz uma
cópia somente leitura que pode ser compartilhada para inferência.
"""

from __future__ import annotations

import zlib
from collections import OrderedDict
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from autodiff import Graph, Tensor
from utils.errors import NonFiniteError


def parameter_rng(seed: int, name: str) -> np.random.Generator:
    """Gerador determinístico por (semente, nome), independente da ordem de criação."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode("utf-8"))])


class ParameterStore:
    """Mapa ordenado nome → array."""

    def __init__(self, arrays: Optional[Mapping[str, np.ndarray]] = None, frozen: bool = False):
        self._arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, array in (arrays or {}).items():
            self._arrays[name] = np.array(array)
        self._frozen = False
        if frozen:
            self.freeze()

    def __len__(self) -> int:
        return len(self._arrays)

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self._arrays.items())

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def num_values(self) -> int:
        return int(sum(array.size for array in self._arrays.values()))

    def add(self, name: str, array: np.ndarray) -> None:
        if self._frozen:
            raise RuntimeError("snapshot de parâmetros é imutável")
        if name in self._arrays:
            raise KeyError(f"parâmetro duplicado: {name}")
        self._arrays[name] = np.array(array)

    def freeze(self) -> None:
        for array in self._arrays.values():
            array.setflags(write=False)
        self._frozen = True

    def snapshot(self) -> "ParameterStore":
        return ParameterStore(self._arrays, frozen=True)

    def copy(self) -> "ParameterStore":
        return ParameterStore(self._arrays)

    def astype(self, dtype) -> "ParameterStore":
        return ParameterStore({name: array.astype(dtype) for name, array in self._arrays.items()})

    def update(self, values: Mapping[str, np.ndarray]) -> None:
        """Substitui valores existentes (mesma forma)."""
        if self._frozen:
            raise RuntimeError("snapshot de parâmetros é imutável")
        for name, value in values.items():
            current = self._arrays[name]
            value = np.asarray(value, dtype=current.dtype)
            if value.shape != current.shape:
                raise ValueError(f"{name}: forma {value.shape} != {current.shape}")
            if not np.isfinite(value).all():
                raise NonFiniteError(name)
            self._arrays[name] = value

    def bind(self, graph: Graph) -> Dict[str, Tensor]:
        """Registra cada parâmetro como folha diferenciável do grafo."""
        return {name: graph.parameter(array, name) for name, array in self._arrays.items()}

    def constants(self) -> Dict[str, Tensor]:
        """Parâmetros como constantes, para inferência sem grafo."""
        return {name: Tensor(array) for name, array in self._arrays.items()}
