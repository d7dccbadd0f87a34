#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Training Package

ELBO, oráculo de marginalização exata, otimizador e laço de treino.

Módulos disponíveis:
- config: TrainConfig e cronograma de temperatura
- elbo: ElboBreakdown, elbo, exact_elbo
- optimizer: Adam
- trainer: train_step, Trainer, MetricsLog
"""

from .config import TrainConfig
from .elbo import MAX_COMBINATIONS, ElboBreakdown, elbo, exact_elbo, exact_elbo_per_example, reconstruction_log_prob
from .optimizer import Adam, AdamState
from .trainer import (
    CHECKPOINT_DIR,
    EVALUATIONS_FILE,
    METRICS_FILE,
    MetricsLog,
    Trainer,
    TrainResult,
    TrainState,
    metric_columns,
    train,
    train_step,
)

__all__ = [
    "CHECKPOINT_DIR",
    "EVALUATIONS_FILE",
    "MAX_COMBINATIONS",
    "METRICS_FILE",
    "Adam",
    "AdamState",
    "ElboBreakdown",
    "MetricsLog",
    "TrainConfig",
    "TrainResult",
    "TrainState",
    "Trainer",
    "elbo",
    "exact_elbo",
    "exact_elbo_per_example",
    "metric_columns",
    "reconstruction_log_prob",
    "train",
    "train_step",
]
