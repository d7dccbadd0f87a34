#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dataset - Imagens rotuladas em memória

Os pixels ficam em uint8 (exatamente o que o formato bruto grava) e são
convertidos para [0, 1] na leitura. Cada exemplo tem um rótulo por canal de
verdade (um canal por fator sintético).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from utils.errors import ShapeError


@dataclass(frozen=True)
class LabelChannel:
    name: str
    cardinality: int


@dataclass(frozen=True)
class LabelledImage:
    pixels: np.ndarray
    labels: Tuple[int, ...]


class Dataset:
    """
    Conjunto imutável de imagens com rótulos.

    Args:
        pixels: uint8 [N, H, W, C]
        labels: inteiros [N, T], um por canal
        channels: Nome e cardinalidade de cada canal
    """

    def __init__(self, pixels: np.ndarray, labels: np.ndarray, channels: Tuple[LabelChannel, ...]):
        pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        if labels.ndim == 1:
            labels = labels[:, None]
        if pixels.ndim != 4:
            raise ShapeError(f"pixels devem ter forma [N, H, W, C], recebeu {pixels.shape}")
        if labels.shape != (pixels.shape[0], len(channels)):
            raise ShapeError(f"rótulos {labels.shape} incompatíveis com {pixels.shape[0]} imagens e {len(channels)} canais")
        for j, channel in enumerate(channels):
            column = labels[:, j]
            if column.size and (column.min() < 0 or column.max() >= channel.cardinality):
                raise ValueError(f"canal '{channel.name}' com rótulo fora de 0..{channel.cardinality - 1}")
        pixels.setflags(write=False)
        labels.setflags(write=False)
        self.pixels = pixels
        self.labels = labels
        self.channels = tuple(channels)

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def __getitem__(self, index: int) -> LabelledImage:
        return LabelledImage(self.pixels[index] / 255.0, tuple(int(t) for t in self.labels[index]))

    @property
    def n(self) -> int:
        return len(self)

    @property
    def image_shape(self) -> Tuple[int, int, int]:
        return tuple(self.pixels.shape[1:])

    @property
    def x_dim(self) -> int:
        return int(np.prod(self.image_shape))

    @property
    def channel_names(self) -> Tuple[str, ...]:
        return tuple(channel.name for channel in self.channels)

    def images(self, indices=None) -> np.ndarray:
        """Imagens em [0, 1], float64, [N, H, W, C]."""
        pixels = self.pixels if indices is None else self.pixels[indices]
        return pixels.astype(np.float64) / 255.0

    def flat(self, indices=None) -> np.ndarray:
        """Imagens achatadas [N, x_dim] em [0, 1]."""
        images = self.images(indices)
        return images.reshape(images.shape[0], -1)

    def truths(self) -> Dict[str, np.ndarray]:
        return {channel.name: self.labels[:, j] for j, channel in enumerate(self.channels)}

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.pixels[indices], self.labels[indices], self.channels)

    def split(self, test_size: int) -> Tuple["Dataset", "Dataset"]:
        """Os últimos `test_size` exemplos formam o conjunto de teste."""
        if not 0 <= test_size < self.n:
            raise ValueError(f"test_size {test_size} fora de 0..{self.n - 1}")
        cut = self.n - test_size
        return self.subset(np.arange(cut)), self.subset(np.arange(cut, self.n))
