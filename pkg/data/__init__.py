#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Data Package

Dataset sintético de fatores, formato bruto em disco, iteração em lotes e
exportação de imagens PPM.
"""

from .batches import Batch, batch_for_step, epoch_order, iterate, step_batches, steps_per_epoch
from .dataset import Dataset, LabelChannel, LabelledImage
from .images import contact_sheet, encode_ppm, tile_grid, write_ppm
from .raw_format import load_raw, write_raw
from .synthetic import FACTOR_NAMES, FactorSpec, render, synth_generate

__all__ = [
    "FACTOR_NAMES",
    "Batch",
    "Dataset",
    "FactorSpec",
    "LabelChannel",
    "LabelledImage",
    "batch_for_step",
    "contact_sheet",
    "encode_ppm",
    "epoch_order",
    "iterate",
    "load_raw",
    "render",
    "step_batches",
    "steps_per_epoch",
    "synth_generate",
    "tile_grid",
    "write_ppm",
    "write_raw",
]
