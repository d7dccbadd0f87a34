#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Checkpoint - Persistência de parâmetros e estado do otimizador

Um checkpoint é um diretório com dois arquivos:

    manifest.txt   texto: cabeçalho, metadados "@chave valor" e uma linha
                   "nome<TAB>forma<TAB>dtype<TAB>offset" por array
    params.bin     todos os arrays concatenados, little-endian

A leitura reproduz os arrays bit a bit na precisão em que foram gravados.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from utils.errors import CheckpointError
from utils.logger import get_logger

from .config import ModelConfig
from .parameters import ParameterStore

HEADER = "# vlac-checkpoint 1"
MANIFEST = "manifest.txt"
BLOB = "params.bin"
PARAM_PREFIX = "param/"

logger = get_logger(__name__)


@dataclass
class Checkpoint:
    config: ModelConfig
    params: ParameterStore
    step: int = 0
    # estados extras do otimizador, ex. {"adam.m": store, "adam.v": store}
    slots: Dict[str, ParameterStore] = field(default_factory=dict)
    train: Dict[str, Any] = field(default_factory=dict)
    # dados da execução (ex.: forma das imagens)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def precision(self) -> str:
        for _, array in self.params.items():
            return "f32" if array.dtype == np.float32 else "f64"
        return "f64"


def _format_shape(shape: Tuple[int, ...]) -> str:
    return "x".join(str(s) for s in shape) if shape else "scalar"


def _parse_shape(text: str) -> Tuple[int, ...]:
    return () if text == "scalar" else tuple(int(s) for s in text.split("x"))


def _entries(checkpoint: Checkpoint) -> List[Tuple[str, np.ndarray]]:
    entries = [(PARAM_PREFIX + name, array) for name, array in checkpoint.params.items()]
    for slot, store in sorted(checkpoint.slots.items()):
        entries.extend((f"{slot}/{name}", array) for name, array in store.items())
    return entries


def save_checkpoint(directory: str | Path, checkpoint: Checkpoint) -> Path:
    """
    Grava o checkpoint, substituindo atomicamente os arquivos existentes.

    Returns:
        Caminho do diretório
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        lines = [
            HEADER,
            f"@config {json.dumps(checkpoint.config.to_dict(), ensure_ascii=False)}",
            f"@train {json.dumps(checkpoint.train, ensure_ascii=False)}",
            f"@meta {json.dumps(checkpoint.meta, ensure_ascii=False)}",
            f"@step {int(checkpoint.step)}",
            f"@precision {checkpoint.precision}",
        ]
        blob_tmp = directory / (BLOB + ".tmp")
        offset = 0
        with open(blob_tmp, "wb") as f:
            for name, array in _entries(checkpoint):
                little = np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<"))
                data = little.tobytes()
                f.write(data)
                lines.append(f"{name}\t{_format_shape(array.shape)}\t{little.dtype.str}\t{offset}")
                offset += len(data)
        manifest_tmp = directory / (MANIFEST + ".tmp")
        manifest_tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        os.replace(blob_tmp, directory / BLOB)
        os.replace(manifest_tmp, directory / MANIFEST)
    except OSError as e:
        raise CheckpointError(f"falha ao gravar checkpoint em {directory}: {e}") from e
    logger.debug(f"Checkpoint gravado: {directory} (passo {checkpoint.step}, {offset} bytes)")
    return directory


def load_checkpoint(directory: str | Path) -> Checkpoint:
    directory = Path(directory)
    manifest_path, blob_path = directory / MANIFEST, directory / BLOB
    try:
        lines = manifest_path.read_text(encoding="utf-8").splitlines()
        blob = blob_path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"checkpoint ilegível em {directory}: {e}") from e

    if not lines or lines[0].strip() != HEADER:
        raise CheckpointError(f"{manifest_path}: cabeçalho ausente ou versão desconhecida")

    meta: Dict[str, str] = {}
    arrays: Dict[str, Dict[str, np.ndarray]] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("@"):
            key, _, value = line[1:].partition(" ")
            meta[key] = value
            continue
        try:
            name, shape_text, dtype_text, offset_text = line.split("\t")
            shape, dtype, offset = _parse_shape(shape_text), np.dtype(dtype_text), int(offset_text)
        except (ValueError, TypeError) as e:
            raise CheckpointError(f"{manifest_path}:{number}: linha inválida ({e})") from e
        count = int(np.prod(shape)) if shape else 1
        if offset < 0 or offset + count * dtype.itemsize > len(blob):
            raise CheckpointError(f"{blob_path}: array '{name}' excede o blob (offset {offset})")
        array = np.frombuffer(blob, dtype=dtype, count=count, offset=offset).reshape(shape)
        slot, _, short = name.partition("/")
        arrays.setdefault(slot, {})[short] = array.astype(dtype.newbyteorder("="))

    try:
        config = ModelConfig.from_dict(json.loads(meta["config"]))
        train = json.loads(meta.get("train", "{}"))
        run_meta = json.loads(meta.get("meta", "{}"))
        step = int(meta.get("step", "0"))
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointError(f"{manifest_path}: metadados inválidos ({e})") from e

    params = ParameterStore(arrays.pop(PARAM_PREFIX.rstrip("/"), {}))
    slots = {slot: ParameterStore(values) for slot, values in arrays.items()}
    logger.debug(f"Checkpoint carregado: {directory} (passo {step})")
    return Checkpoint(config, params, step, slots, train, run_meta)
