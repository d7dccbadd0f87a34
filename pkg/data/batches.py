#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Iteração em minilotes embaralhados.

A ordem de cada época vem de default_rng([seed, epoch]); o lote de um passo
global é, portanto, função apenas de (seed, step), o que permite retomar o
treino exatamente de onde parou.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .dataset import Dataset


@dataclass(frozen=True)
class Batch:
    x: np.ndarray
    labels: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return self.x.shape[0]


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([int(seed), int(epoch)]).permutation(n)


def steps_per_epoch(n: int, batch_size: int) -> int:
    return max(1, math.ceil(n / batch_size))


def _make_batch(dataset: Dataset, indices: np.ndarray) -> Batch:
    return Batch(dataset.flat(indices), dataset.labels[indices], indices)


def iterate(dataset: Dataset, batch_size: int, seed: int, epoch: int = 0) -> Iterator[Batch]:
    """Uma época embaralhada; o último lote pode ser menor."""
    if batch_size < 1:
        raise ValueError(f"batch_size deve ser >= 1, recebeu {batch_size}")
    order = epoch_order(dataset.n, seed, epoch)
    for start in range(0, dataset.n, batch_size):
        yield _make_batch(dataset, order[start:start + batch_size])


def batch_for_step(dataset: Dataset, batch_size: int, seed: int, step: int) -> Batch:
    """Lote do passo global `step`, igual ao produzido por iterate() na época correspondente."""
    per_epoch = steps_per_epoch(dataset.n, batch_size)
    epoch, position = divmod(step, per_epoch)
    order = epoch_order(dataset.n, seed, epoch)
    return _make_batch(dataset, order[position * batch_size:(position + 1) * batch_size])


def step_batches(dataset: Dataset, batch_size: int, seed: int, start: int, stop: int) -> Iterator[Batch]:
    for step in range(start, stop):
        yield batch_for_step(dataset, batch_size, seed, step)
