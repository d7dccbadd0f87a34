#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Accuracy - Acurácia de clusterização

    ACC = max_P Σ_i I[t_i = P(y_i)] / |D|

Dois conjuntos de P: injetivo (cada cluster e cada classe usados no máximo
uma vez, resolvido por atribuição ótima na tabela de contingência T×K) e
muitos-para-um (cada cluster vai para a sua classe majoritária). Rótulos são
inteiros a partir de 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from utils.errors import GuardExceededError

INJECTIVE = "injective"
MANY_TO_ONE = "many-to-one"
MODES = (INJECTIVE, MANY_TO_ONE)

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class LabelPair:
    """
    Previsões y em 0..K−1 e verdades t em 0..T−1, mesmo comprimento.

    K e T são inferidos pelo maior rótulo quando não informados.
    """

    predictions: np.ndarray
    truths: np.ndarray
    K: Optional[int] = None
    T: Optional[int] = None

    def __post_init__(self):
        predictions = np.asarray(self.predictions).astype(np.int64).ravel()
        truths = np.asarray(self.truths).astype(np.int64).ravel()
        if predictions.size == 0:
            raise ValueError("acurácia de conjunto vazio")
        if predictions.shape != truths.shape:
            raise ValueError(f"{predictions.size} previsões para {truths.size} verdades")
        if predictions.min() < 0 or truths.min() < 0:
            raise ValueError("rótulos devem ser inteiros não negativos")
        K = int(predictions.max()) + 1 if self.K is None else int(self.K)
        T = int(truths.max()) + 1 if self.T is None else int(self.T)
        if predictions.max() >= K or truths.max() >= T:
            raise ValueError(f"rótulos fora de K={K} ou T={T}")
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "truths", truths)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return self.predictions.size


@dataclass
class AssignmentResult:
    mapping: Dict[int, int]
    accuracy: float
    mode: str
    contingency: np.ndarray

    @property
    def matched(self) -> int:
        return int(round(self.accuracy * self.contingency.sum()))


def contingency_table(pairs: LabelPair) -> np.ndarray:
    """Contagens [T, K]: linha = classe verdadeira, coluna = cluster."""
    flat = np.bincount(pairs.truths * pairs.K + pairs.predictions, minlength=pairs.T * pairs.K)
    return flat.reshape(pairs.T, pairs.K)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"modo desconhecido: {mode} (use {' ou '.join(MODES)})")


def cluster_accuracy(pairs: LabelPair, mode: str = MANY_TO_ONE) -> AssignmentResult:
    """
    Melhor acurácia sob o conjunto de mapeamentos do modo.

    Args:
        pairs: Previsões e verdades
        mode: "injective" ou "many-to-one"
    """
    _check_mode(mode)
    counts = contingency_table(pairs)
    if mode == INJECTIVE:
        rows, cols = linear_sum_assignment(counts, maximize=True)
        mapping = {int(k): int(t) for t, k in zip(rows, cols)}
        matched = int(counts[rows, cols].sum())
    else:
        occupied = np.nonzero(counts.sum(axis=0))[0]
        mapping = {int(k): int(np.argmax(counts[:, k])) for k in occupied}
        matched = int(counts.max(axis=0).sum())
    return AssignmentResult(mapping, matched / pairs.n, mode, counts)


def brute_force_accuracy(pairs: LabelPair, mode: str = MANY_TO_ONE) -> AssignmentResult:
    """
    Oráculo: enumera todos os mapeamentos admissíveis do modo.

    Raises:
        GuardExceededError: K ou T acima de 8
    """
    _check_mode(mode)
    if pairs.K > BRUTE_FORCE_LIMIT or pairs.T > BRUTE_FORCE_LIMIT:
        raise GuardExceededError(f"enumeração limitada a K, T <= {BRUTE_FORCE_LIMIT} (K={pairs.K}, T={pairs.T})")
    counts = contingency_table(pairs)
    clusters = np.arange(pairs.K)
    best, best_mapping = -1, {}

    if mode == MANY_TO_ONE:
        for classes in itertools.product(range(pairs.T), repeat=pairs.K):
            matched = int(counts[list(classes), clusters].sum())
            if matched > best:
                best, best_mapping = matched, dict(enumerate(classes))
    elif pairs.K <= pairs.T:
        for classes in itertools.permutations(range(pairs.T), pairs.K):
            matched = int(counts[list(classes), clusters].sum())
            if matched > best:
                best, best_mapping = matched, dict(enumerate(classes))
    else:
        for chosen in itertools.permutations(range(pairs.K), pairs.T):
            matched = int(counts[np.arange(pairs.T), list(chosen)].sum())
            if matched > best:
                best, best_mapping = matched, {k: t for t, k in enumerate(chosen)}

    return AssignmentResult(best_mapping, best / pairs.n, mode, counts)
