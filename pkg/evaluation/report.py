#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Report - Avaliação do modelo contra os canais de verdade

evaluate_model usa o argmax de q(y_ℓ|x) como previsão da camada ℓ e mede a
acurácia nos dois modos contra cada canal de verdade do dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from data import Dataset
from ladder import VariationalLadder
from ladder.model import Params, as_tensors
from utils.errors import ConfigError, VLACError
from utils.logger import get_logger

from .accuracy import MODES, AssignmentResult, LabelPair, cluster_accuracy

CHUNK = 512

logger = get_logger(__name__)


@dataclass
class ModelReport:
    layer: int
    K: int
    predictions: np.ndarray
    occupancy: np.ndarray
    # canal → modo → resultado
    results: Dict[str, Dict[str, AssignmentResult]] = field(default_factory=dict)

    def accuracy(self, channel: str, mode: str) -> float:
        return self.results[channel][mode].accuracy

    def accuracy_table(self) -> pd.DataFrame:
        rows = [
            {"layer": self.layer, "channel": channel, "mode": mode, "accuracy": result.accuracy}
            for channel, by_mode in self.results.items()
            for mode, result in by_mode.items()
        ]
        return pd.DataFrame(rows, columns=["layer", "channel", "mode", "accuracy"])

    def scores(self) -> Dict[str, float]:
        """Dicionário plano "canal/modo" → acurácia."""
        return {f"{channel}/{mode}": result.accuracy for channel, by_mode in self.results.items() for mode, result in by_mode.items()}


def predict_clusters(model: VariationalLadder, params: Params, dataset: Dataset, layer: int) -> np.ndarray:
    """argmax de q(y_ℓ|x) para todo o dataset, em blocos."""
    spec = model.config.layer(layer)
    if spec.K < 2:
        raise ConfigError(f"camada {layer} tem K=1: não há variável de cluster para avaliar")
    params = as_tensors(params)
    predictions = []
    for start in range(0, dataset.n, CHUNK):
        indices = np.arange(start, min(start + CHUNK, dataset.n))
        predictions.append(model.classify(params, dataset.flat(indices))[layer].argmax())
    return np.concatenate(predictions)


def evaluate_model(model: VariationalLadder, params: Params, dataset: Dataset, layer: int) -> ModelReport:
    """
    Acurácia da camada ℓ contra cada canal de verdade, nos dois modos.

    Raises:
        ConfigError: camada com K_ℓ = 1
    """
    predictions = predict_clusters(model, params, dataset, layer)
    K = model.config.layer(layer).K
    report = ModelReport(layer, K, predictions, np.bincount(predictions, minlength=K))
    for j, channel in enumerate(dataset.channels):
        pairs = LabelPair(predictions, dataset.labels[:, j], K=K, T=channel.cardinality)
        report.results[channel.name] = {mode: cluster_accuracy(pairs, mode) for mode in MODES}
    logger.debug(f"Camada {layer}: {report.scores()}")
    return report


def layer_factor_matrix(
    model: VariationalLadder, params: Params, dataset: Dataset, mode: str = "many-to-one"
) -> pd.DataFrame:
    """Acurácia de cada camada de mistura (linhas) contra cada canal (colunas)."""
    rows = {}
    for layer in model.config.mixture_layers:
        report = evaluate_model(model, params, dataset, layer)
        rows[layer] = {channel: report.accuracy(channel, mode) for channel in dataset.channel_names}
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=list(dataset.channel_names))
    frame.index.name = "layer"
    return frame


def _section(title: str, frame: pd.DataFrame, index: bool = False) -> str:
    return f"# {title}\n{frame.to_csv(index=index)}"


def format_report(report: ModelReport, channel_names: Optional[List[str]] = None) -> str:
    """Texto delimitado: acurácias, ocupação dos clusters e uma tabela de contingência por canal."""
    parts = [_section("accuracy", report.accuracy_table())]
    occupancy = pd.DataFrame({"cluster": np.arange(report.K), "count": report.occupancy})
    parts.append(_section("occupancy", occupancy))
    for channel in channel_names or list(report.results):
        counts = next(iter(report.results[channel].values())).contingency
        table = pd.DataFrame(counts, columns=[f"cluster_{k}" for k in range(counts.shape[1])])
        table.index.name = "class"
        parts.append(_section(f"contingency {channel}", table, index=True))
    return "\n".join(parts)


def write_report(report: ModelReport, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_report(report), encoding="utf-8")
    except OSError as e:
        raise VLACError(f"falha ao gravar relatório em {path}: {e}") from e
    logger.info(f"Relatório gravado: {path}")
    return path
