#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Trainer - Laço de treino

Um passo: τ pelo cronograma, ruído de default_rng([seed, step]), ELBO num
Graph novo, backward de −ELBO e atualização Adam. O Trainer publica eventos
(train_start, progress, evaluation, checkpoint, train_complete) para os
observadores e grava o log de métricas, um registro por passo.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import psutil

from autodiff import Graph, resolve_precision
from data import Dataset, step_batches
from ladder import Checkpoint, LatentNoise, ParameterStore, VariationalLadder, build_model, save_checkpoint
from utils.async_processor import BatchPrefetcher
from utils.errors import NonFiniteError, VLACError
from utils.logger import get_logger
from utils.observer import Subject

from .config import TrainConfig
from .elbo import ElboBreakdown, elbo
from .optimizer import Adam, AdamState

METRICS_FILE = "metrics.csv"
EVALUATIONS_FILE = "evaluations.csv"
CHECKPOINT_DIR = "checkpoint"

Evaluator = Callable[[ParameterStore, int], Dict[str, float]]


@dataclass
class TrainState:
    model: VariationalLadder
    config: TrainConfig
    params: ParameterStore
    optimizer_state: AdamState
    step: int = 0

    @classmethod
    def initial(cls, model: VariationalLadder, config: TrainConfig) -> "TrainState":
        params = model.init_params().astype(resolve_precision(config.precision))
        return cls(model, config, params, AdamState.zeros_like(params))

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint, config: TrainConfig) -> "TrainState":
        params = checkpoint.params.copy()
        if "adam.m" in checkpoint.slots and "adam.v" in checkpoint.slots:
            moments = AdamState(checkpoint.slots["adam.m"].copy(), checkpoint.slots["adam.v"].copy(), checkpoint.step)
        else:
            moments = AdamState.zeros_like(params)
        return cls(build_model(checkpoint.config), config, params, moments, checkpoint.step)

    def to_checkpoint(self, meta: Optional[Dict] = None) -> Checkpoint:
        return Checkpoint(
            self.model.config,
            self.params.snapshot(),
            self.step,
            self.optimizer_state.slots(),
            self.config.to_dict(),
            dict(meta or {}),
        )


def train_step(state: TrainState, x_batch: np.ndarray) -> Tuple[TrainState, ElboBreakdown]:
    """
    Um passo de Adam maximizando o ELBO.

    Raises:
        NonFiniteError: termo do ELBO ou gradiente de parâmetro não finito
    """
    config = state.config
    x_batch = np.asarray(x_batch)
    tau = config.temperature(state.step)
    rng = np.random.default_rng([int(config.seed), int(state.step)])
    noise = LatentNoise.draw(state.model.config, x_batch.shape[0], rng)

    graph = Graph(config.precision)
    bound = state.params.bind(graph)
    breakdown = elbo(state.model, bound, x_batch, noise, tau, config.straight_through)
    grads = graph.backward(-breakdown.total).by_name()
    optimizer = Adam(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    optimizer.step(state.params, grads, state.optimizer_state)
    state.step += 1
    return state, breakdown


class MetricsLog:
    """Log de métricas em texto delimitado por vírgulas, somente anexação."""

    def __init__(self, columns: List[str], path: Optional[Path] = None):
        self.columns = list(columns)
        self.path = Path(path) if path is not None else None
        self.rows: List[Dict[str, float]] = []
        self._file = None
        if self.path is not None:
            try:
                fresh = not self.path.exists() or self.path.stat().st_size == 0
                self._file = open(self.path, "a", encoding="utf-8")
                if fresh:
                    self._file.write(",".join(self.columns) + "\n")
                    self._file.flush()
            except OSError as e:
                raise VLACError(f"não foi possível abrir o log de métricas {self.path}: {e}") from e

    def append(self, row: Dict[str, float]) -> None:
        self.rows.append(row)
        if self._file is not None:
            self._file.write(",".join(repr(row[column]) for column in self.columns) + "\n")
            self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    @staticmethod
    def read(path: str | Path) -> pd.DataFrame:
        return pd.read_csv(path, float_precision="round_trip")


def metric_columns(model: VariationalLadder) -> List[str]:
    L = model.config.L
    return (
        ["step", "total", "reconstruction"]
        + [f"kl_z_{i}" for i in range(1, L + 1)]
        + [f"kl_y_{i}" for i in range(1, L + 1)]
        + ["tau", "wall_ms"]
    )


@dataclass
class TrainResult:
    params: ParameterStore
    state: TrainState
    metrics: pd.DataFrame


class Trainer(Subject):
    """
    Executa o treino com lotes pré-buscados, avaliações e checkpoints periódicos.

    Args:
        model: Modelo a treinar
        config: Hiperparâmetros
        out_dir: Diretório para métricas e checkpoints (None: somente memória)
        evaluator: Função (snapshot, passo) → métricas, chamada a cada eval_every passos
        log_callback: Função de callback para logs
        metadata: Gravado junto de cada checkpoint
    """

    def __init__(
        self,
        model: VariationalLadder,
        config: TrainConfig,
        out_dir: Optional[str | Path] = None,
        evaluator: Optional[Evaluator] = None,
        log_callback: Optional[Callable] = None,
        metadata: Optional[Dict] = None,
    ):
        super().__init__()
        self.metadata = dict(metadata or {})
        self.model = model
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.evaluator = evaluator
        self.log_callback = log_callback
        self.logger = get_logger(__name__) if log_callback is None else None
        self._process = psutil.Process()

    def _log(self, message: str, level: str = 'info'):
        """Registra uma mensagem de log."""
        if self.log_callback:
            self.log_callback(message)
        elif self.logger:
            getattr(self.logger, level)(message)

    def initial_state(self) -> TrainState:
        return TrainState.initial(self.model, self.config)

    def save(self, state: TrainState) -> Optional[Path]:
        if self.out_dir is None:
            return None
        path = save_checkpoint(self.out_dir / CHECKPOINT_DIR, state.to_checkpoint(self.metadata))
        self.notify('checkpoint', {'path': str(path), 'step': state.step})
        return path

    def _record_evaluation(self, step: int, scores: Dict[str, float]) -> None:
        if self.out_dir is None:
            return
        path = self.out_dir / EVALUATIONS_FILE
        frame = pd.DataFrame({"step": step, "metric": list(scores), "value": list(scores.values())})
        try:
            frame.to_csv(path, mode="a", header=not path.exists(), index=False)
        except OSError as e:
            raise VLACError(f"falha ao gravar avaliações em {path}: {e}") from e

    def train(self, dataset: Dataset, state: Optional[TrainState] = None) -> TrainResult:
        """
        Treina de state.step até config.steps.

        Returns:
            TrainResult com os parâmetros finais e o log de métricas em memória
        """
        config = self.config
        state = state or self.initial_state()
        start = state.step
        if dataset.x_dim != self.model.config.x_dim:
            raise VLACError(f"dataset com x_dim={dataset.x_dim}, modelo espera {self.model.config.x_dim}")

        metrics_path = None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            metrics_path = self.out_dir / METRICS_FILE
        metrics = MetricsLog(metric_columns(self.model), metrics_path)

        self.notify('train_start', {'steps': config.steps, 'start_step': start, 'n': dataset.n})
        self._log(f"Treinando {self.model.config.kind} K={list(self.model.config.K)} por {config.steps - start} passos")
        started = time.time()
        window_start, window_steps = time.time(), 0

        try:
            with BatchPrefetcher(step_batches(dataset, config.batch_size, config.seed, start, config.steps)) as batches:
                for batch in batches:
                    tau = config.temperature(state.step)
                    tick = time.perf_counter()
                    try:
                        state, breakdown = train_step(state, batch.x)
                    except NonFiniteError as e:
                        self.notify('error', {'error': str(e), 'step': state.step})
                        raise
                    row = {"step": state.step, **breakdown.as_floats(), "tau": tau}
                    row["wall_ms"] = (time.perf_counter() - tick) * 1000.0
                    metrics.append(row)
                    window_steps += 1

                    if config.log_every and state.step % config.log_every == 0:
                        elapsed = max(time.time() - window_start, 1e-9)
                        self.notify('progress', {
                            'step': state.step,
                            'steps': config.steps,
                            'total': row["total"],
                            'tau': tau,
                            'steps_per_s': window_steps / elapsed,
                            'rss_mb': self._process.memory_info().rss / 2 ** 20,
                        })
                        window_start, window_steps = time.time(), 0

                    if self.evaluator is not None and config.eval_every and state.step % config.eval_every == 0:
                        scores = self.evaluator(state.params.snapshot(), state.step)
                        self._record_evaluation(state.step, scores)
                        self.notify('evaluation', {'step': state.step, 'accuracy': scores})

                    if config.checkpoint_every and state.step % config.checkpoint_every == 0:
                        self.save(state)
        finally:
            metrics.close()

        if self.out_dir is not None and state.step > start:
            self.save(state)
        self.notify('train_complete', {'step': state.step, 'elapsed_s': time.time() - started})
        return TrainResult(state.params, state, metrics.frame())


def train(
    model: VariationalLadder,
    config: TrainConfig,
    dataset: Dataset,
    out_dir: Optional[str | Path] = None,
    evaluator: Optional[Evaluator] = None,
) -> TrainResult:
    """Atalho: treina a partir da inicialização."""
    return Trainer(model, config, out_dir, evaluator).train(dataset)
