#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Verificação de gradientes por diferenças finitas centrais.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from .tensor import Graph, Tensor


@dataclass(frozen=True)
class FailedCoordinate:
    index: Tuple[int, ...]
    analytic: float
    numeric: float
    relative_error: float


@dataclass
class GradcheckReport:
    """Resultado de uma verificação: erro máximo e coordenadas reprovadas."""

    max_relative_error: float
    tolerance: float
    analytic: np.ndarray
    numeric: np.ndarray
    failures: List[FailedCoordinate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a − n| / max(1, |a|, |n|)."""
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return np.abs(analytic - numeric) / scale


def gradcheck(
    f: Callable[[Tensor], Tensor],
    point: np.ndarray,
    eps: float = 1e-5,
    tol: float = 1e-4,
    precision: str = "f64",
) -> GradcheckReport:
    """
    Compara backward() com diferenças finitas centrais coordenada a coordenada.

    Args:
        f: Função escalar de um tensor; demais entradas devem ser constantes
        point: Ponto de avaliação
        eps: Passo das diferenças finitas
        tol: Erro relativo máximo aceito

    Returns:
        GradcheckReport (as falhas vão no relatório, nunca em exceção)
    """
    point = np.array(point, dtype=np.float64)

    graph = Graph(precision)
    x = graph.parameter(point, "x")
    analytic = graph.backward(f(x))[x.node_id]

    def evaluate(at: np.ndarray) -> float:
        return float(f(Tensor(at)).value)

    numeric = np.zeros_like(point)
    for index in np.ndindex(point.shape):
        shifted = point.copy()
        shifted[index] = point[index] + eps
        upper = evaluate(shifted)
        shifted[index] = point[index] - eps
        lower = evaluate(shifted)
        numeric[index] = (upper - lower) / (2.0 * eps)

    errors = relative_error(analytic, numeric)
    failures = [
        FailedCoordinate(tuple(int(i) for i in index), float(analytic[index]), float(numeric[index]), float(errors[index]))
        for index in np.ndindex(errors.shape)
        if errors[index] > tol
    ]
    max_error = float(errors.max()) if errors.size else 0.0
    return GradcheckReport(max_error, tol, analytic, numeric, failures)
