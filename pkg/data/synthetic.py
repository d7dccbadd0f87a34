#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Synthetic - Dataset de fatores hierárquicos

Quatro fatores independentes e uniformes, do mais abstrato ao mais local:

    shape       glifo (cruz, contorno de quadrado, barra diagonal, disco)
    thickness   largura do traço
    hue         cor do primeiro plano, aplicada canal a canal sobre a máscara
    background  brilho do fundo

O deslocamento (jitter) move o glifo inteiro; a máscara depende apenas de
(shape, thickness, deslocamento), então trocar hue ou background não altera
o suporte do primeiro plano.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Tuple

import numpy as np

from utils.errors import ConfigError
from utils.logger import get_logger

from .dataset import Dataset, LabelChannel

FACTOR_NAMES = ("shape", "thickness", "hue", "background")

# RGB em [0, 1]
PALETTE = np.array(
    [
        [0.95, 0.20, 0.20],
        [0.20, 0.85, 0.25],
        [0.25, 0.35, 0.95],
        [0.95, 0.85, 0.20],
        [0.85, 0.30, 0.90],
        [0.20, 0.85, 0.90],
    ]
)
BACKGROUND_RANGE = (0.0, 0.35)

logger = get_logger(__name__)


def _cross(dy, dx, radius, half):
    return ((np.abs(dy) <= half) & (np.abs(dx) <= radius)) | ((np.abs(dx) <= half) & (np.abs(dy) <= radius))


def _square_outline(dy, dx, radius, half):
    reach = np.maximum(np.abs(dy), np.abs(dx))
    return (reach <= radius) & (reach > radius - 2.0 * half)


def _diagonal_bar(dy, dx, radius, half):
    return (np.abs(dy - dx) <= half * np.sqrt(2.0)) & (np.maximum(np.abs(dy), np.abs(dx)) <= radius)


def _disc(dy, dx, radius, half):
    return dy * dy + dx * dx <= (0.5 * radius + half) ** 2


GLYPHS: Tuple[Callable, ...] = (_cross, _square_outline, _diagonal_bar, _disc)


@dataclass(frozen=True)
class FactorSpec:
    """Cardinalidade de cada fator, tamanho da imagem e jitter máximo (pixels)."""

    shapes: int = 4
    thicknesses: int = 2
    hues: int = 4
    backgrounds: int = 2
    height: int = 16
    width: int = 16
    channels: int = 3
    jitter: int = 1

    def __post_init__(self):
        for name in ("shapes", "thicknesses", "hues", "backgrounds"):
            if getattr(self, name) < 2:
                raise ConfigError(f"fator '{name}' precisa de cardinalidade >= 2")
        if self.shapes > len(GLYPHS):
            raise ConfigError(f"no máximo {len(GLYPHS)} formas disponíveis")
        if self.hues > len(PALETTE):
            raise ConfigError(f"no máximo {len(PALETTE)} cores disponíveis")
        if self.channels not in (1, 3):
            raise ConfigError(f"imagens com 1 ou 3 canais, recebeu {self.channels}")
        if self.jitter < 0:
            raise ConfigError(f"jitter não pode ser negativo, recebeu {self.jitter}")
        if min(self.height, self.width) < 2 * (self.jitter + 3):
            raise ConfigError(f"imagem {self.height}x{self.width} pequena demais para jitter {self.jitter}")

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return (self.shapes, self.thicknesses, self.hues, self.backgrounds)

    @property
    def label_channels(self) -> Tuple[LabelChannel, ...]:
        return tuple(LabelChannel(name, k) for name, k in zip(FACTOR_NAMES, self.cardinalities))

    @property
    def x_dim(self) -> int:
        return self.height * self.width * self.channels


@lru_cache(maxsize=512)
def glyph_mask(shape: int, thickness: int, height: int, width: int, jitter: int, dy: int, dx: int) -> np.ndarray:
    """Máscara booleana [H, W] do glifo deslocado por (dy, dx)."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy, cx = (height - 1) / 2.0 + dy, (width - 1) / 2.0 + dx
    radius = min(height, width) / 2.0 - (jitter + 2)
    mask = GLYPHS[shape](yy - cy, xx - cx, radius, 0.5 + thickness)
    mask.setflags(write=False)
    return mask


def background_levels(spec: FactorSpec) -> np.ndarray:
    return np.linspace(BACKGROUND_RANGE[0], BACKGROUND_RANGE[1], spec.backgrounds)


def render(spec: FactorSpec, factors: Tuple[int, int, int, int], shift: Tuple[int, int] = (0, 0)) -> np.ndarray:
    """
    Desenha uma imagem uint8 [H, W, C] a partir da tupla de fatores.

    Args:
        spec: Especificação dos fatores
        factors: (shape, thickness, hue, background)
        shift: Deslocamento (dy, dx) com |dy|, |dx| <= jitter
    """
    shape, thickness, hue, background = (int(f) for f in factors)
    mask = glyph_mask(shape, thickness, spec.height, spec.width, spec.jitter, int(shift[0]), int(shift[1]))
    color = PALETTE[hue] if spec.channels == 3 else PALETTE[hue].mean(keepdims=True)
    level = background_levels(spec)[background]
    image = np.where(mask[..., None], np.ones(spec.channels) * color, level)
    return np.round(image * 255.0).astype(np.uint8)


def synth_generate(spec: FactorSpec, n: int, seed: int) -> Dataset:
    """
    Gera n imagens com fatores sorteados de forma independente e uniforme.

    Returns:
        Dataset com um canal de verdade por fator
    """
    if n < 1:
        raise ConfigError(f"n deve ser >= 1, recebeu {n}")
    rng = np.random.default_rng(seed)
    labels = np.stack([rng.integers(0, k, size=n) for k in spec.cardinalities], axis=1)
    if spec.jitter:
        shifts = rng.integers(-spec.jitter, spec.jitter + 1, size=(n, 2))
    else:
        shifts = np.zeros((n, 2), dtype=np.int64)

    pixels = np.empty((n, spec.height, spec.width, spec.channels), dtype=np.uint8)
    cache: Dict[Tuple[int, ...], np.ndarray] = {}
    for i in range(n):
        key = tuple(labels[i]) + tuple(shifts[i])
        if key not in cache:
            cache[key] = render(spec, labels[i], shifts[i])
        pixels[i] = cache[key]
    logger.debug(f"{n} imagens sintéticas geradas (semente {seed}, {len(cache)} combinações distintas)")
    return Dataset(pixels, labels, spec.label_channels)
