#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Formato bruto de dataset

    dataset.bin     cabeçalho little-endian "<4sIHHHH"
                    (magic b"VLDS", n, H, W, C, número de canais de rótulo)
                    seguido de n registros: rótulos uint16 por canal e
                    pixels uint8 H×W×C em ordem de linha
    channels.json   nomes e cardinalidades dos canais (opcional na leitura)
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from utils.errors import DatasetFormatError, VLACError
from utils.logger import get_logger

from .dataset import Dataset, LabelChannel

MAGIC = b"VLDS"
HEADER = struct.Struct("<4sIHHHH")
DATA_FILE = "dataset.bin"
CHANNELS_FILE = "channels.json"

logger = get_logger(__name__)


def record_dtype(height: int, width: int, channels: int, label_channels: int) -> np.dtype:
    return np.dtype([("labels", "<u2", (label_channels,)), ("pixels", "u1", (height, width, channels))])


def write_raw(directory: str | Path, dataset: Dataset) -> Path:
    """Grava o dataset em `directory`; retorna o caminho de dataset.bin."""
    directory = Path(directory)
    height, width, channels = dataset.image_shape
    records = np.zeros(dataset.n, dtype=record_dtype(height, width, channels, len(dataset.channels)))
    records["labels"] = dataset.labels
    records["pixels"] = dataset.pixels
    path = directory / DATA_FILE
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, dataset.n, height, width, channels, len(dataset.channels)))
            f.write(records.tobytes())
        sidecar = {
            "names": list(dataset.channel_names),
            "cardinalities": [channel.cardinality for channel in dataset.channels],
        }
        with open(directory / CHANNELS_FILE, "w", encoding="utf-8") as f:
            json.dump(sidecar, f, indent=2, ensure_ascii=False)
    except OSError as e:
        raise VLACError(f"falha ao gravar dataset em {path}: {e}") from e
    logger.info(f"Dataset gravado: {path} ({dataset.n} exemplos)")
    return path


def load_raw(directory: str | Path) -> Dataset:
    """
    Lê um dataset no formato bruto.

    Raises:
        DatasetFormatError: arquivo malformado, com o offset em bytes
    """
    directory = Path(directory)
    path = directory / DATA_FILE
    try:
        data = path.read_bytes()
    except OSError as e:
        raise VLACError(f"dataset ilegível em {path}: {e}") from e

    if len(data) < HEADER.size:
        raise DatasetFormatError(str(path), len(data), f"cabeçalho truncado ({HEADER.size} bytes esperados)")
    magic, n, height, width, channels, label_channels = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DatasetFormatError(str(path), 0, f"magic {magic!r} inválido")
    if min(height, width, channels) == 0:
        raise DatasetFormatError(str(path), 8, f"dimensões inválidas {height}x{width}x{channels}")

    dtype = record_dtype(height, width, channels, label_channels)
    body = len(data) - HEADER.size
    complete = body // dtype.itemsize
    if complete < n:
        offset = HEADER.size + complete * dtype.itemsize
        raise DatasetFormatError(str(path), offset, f"registro {complete} truncado ({n} declarados)")
    if body != n * dtype.itemsize:
        offset = HEADER.size + n * dtype.itemsize
        raise DatasetFormatError(str(path), offset, "bytes extras após o último registro")
    records = np.frombuffer(data, dtype=dtype, count=n, offset=HEADER.size)
    labels = records["labels"].astype(np.int64)

    channel_info = _load_channels(directory, labels, label_channels)
    for j, channel in enumerate(channel_info):
        bad = np.nonzero(labels[:, j] >= channel.cardinality)[0]
        if bad.size:
            offset = HEADER.size + int(bad[0]) * dtype.itemsize + 2 * j
            raise DatasetFormatError(str(path), offset, f"rótulo fora de 0..{channel.cardinality - 1} no canal '{channel.name}'")

    logger.debug(f"Dataset carregado: {path} ({n} exemplos, {height}x{width}x{channels})")
    return Dataset(records["pixels"].copy(), labels, channel_info)


def _load_channels(directory: Path, labels: np.ndarray, count: int):
    sidecar = directory / CHANNELS_FILE
    if sidecar.exists():
        try:
            with open(sidecar, "r", encoding="utf-8") as f:
                info = json.load(f)
            names, cardinalities = info["names"], info["cardinalities"]
        except (OSError, ValueError, KeyError) as e:
            raise VLACError(f"{sidecar}: metadados de canais inválidos ({e})") from e
        if len(names) != count or len(cardinalities) != count:
            raise VLACError(f"{sidecar}: {len(names)} canais descritos, dataset tem {count}")
        return tuple(LabelChannel(str(name), int(k)) for name, k in zip(names, cardinalities))
    # sem metadados: cardinalidade inferida pelo maior rótulo
    return tuple(
        LabelChannel(f"channel_{j}", int(labels[:, j].max()) + 1 if labels.shape[0] else 1) for j in range(count)
    )
