#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Exportação de imagens: PPM binário (P6, maxval 255) e montagem em grade.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from utils.errors import ShapeError, VLACError


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Converte [0, 1] (float) para uint8; arrays uint8 passam direto."""
    image = np.asarray(image)
    if image.dtype == np.uint8:
        return image
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def encode_ppm(image: np.ndarray) -> bytes:
    """Bytes P6 de uma imagem [H, W, C] com C em {1, 3}."""
    pixels = to_uint8(image)
    if pixels.ndim == 2:
        pixels = pixels[..., None]
    if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
        raise ShapeError(f"PPM exige [H, W, 1|3], recebeu {pixels.shape}")
    if pixels.shape[2] == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    height, width = pixels.shape[:2]
    return f"P6\n{width} {height}\n255\n".encode("ascii") + np.ascontiguousarray(pixels).tobytes()


def write_ppm(path: str | Path, image: np.ndarray) -> Path:
    path = Path(path)
    try:
        path.write_bytes(encode_ppm(image))
    except OSError as e:
        raise VLACError(f"falha ao gravar imagem em {path}: {e}") from e
    return path


def tile_grid(images: np.ndarray, pad: int = 1, pad_value: float = 1.0) -> np.ndarray:
    """
    Monta uma grade a partir de [linhas, colunas, H, W, C].

    Returns:
        Imagem [linhas·(H+pad)+pad, colunas·(W+pad)+pad, C]
    """
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 5:
        raise ShapeError(f"grade exige [linhas, colunas, H, W, C], recebeu {images.shape}")
    rows, cols, height, width, channels = images.shape
    canvas = np.full((rows * (height + pad) + pad, cols * (width + pad) + pad, channels), pad_value)
    for r in range(rows):
        for c in range(cols):
            top, left = pad + r * (height + pad), pad + c * (width + pad)
            canvas[top:top + height, left:left + width] = images[r, c]
    return canvas


def contact_sheet(images: np.ndarray, columns: int = 8, rows: int = 8, pad: int = 1) -> np.ndarray:
    """Grade rows×columns com as primeiras imagens [N, H, W, C] em [0, 1]; células vazias ficam brancas."""
    images = np.asarray(images, dtype=np.float64)
    cells = np.ones((rows * columns,) + images.shape[1:])
    count = min(len(images), rows * columns)
    cells[:count] = images[:count]
    return tile_grid(cells.reshape((rows, columns) + images.shape[1:]), pad=pad)
