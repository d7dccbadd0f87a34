#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Commands - Comandos da linha de comando

Cada comando recebe um RunConfig já validado, grava seus artefatos em
config.out (junto com o eco da configuração) e devolve o caminho principal
produzido. Erros sobem como VLACError para o ponto de entrada.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from data import Dataset, contact_sheet, load_raw, synth_generate, tile_grid, write_ppm, write_raw
from evaluation import evaluate_model, layer_factor_matrix, write_report
from ladder import (
    GM_DGM,
    Checkpoint,
    LatentNoise,
    VariationalLadder,
    build_model,
    conditional_grid,
    load_checkpoint,
    marginal_grid,
    sample_prior_latents,
)
from training import CHECKPOINT_DIR, Trainer, TrainState
from utils.async_processor import SeedSweep
from utils.errors import ConfigError, VLACError
from utils.logger import get_logger
from utils.observer import TrainingLogObserver
from utils.paths import PathValidator

from .config import DEFAULT_LAYER, RunConfig
from .selfcheck import SelfCheckReport, run_selfcheck

PREVIEW_FILE = "preview.ppm"
PREVIEW_GRID = 8
SWEEP_FILE = "sweep.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.csv"
FACTORS_FILE = "layer_factors.csv"
SELFCHECK_FILE = "selfcheck.csv"
GENERATION_MODES = ("conditional", "marginal")

logger = get_logger(__name__)


def _prepare_out(config: RunConfig) -> Path:
    out = PathValidator.ensure_output_dir(config.out)
    config.echo(out)
    return out


def _load_dataset(config: RunConfig) -> Dataset:
    if not config.dataset:
        raise ConfigError("informe o dataset (--dataset ou chave 'dataset')")
    return load_raw(PathValidator.require_dir(config.dataset, "diretório do dataset"))


def _split(dataset: Dataset, test_size: int) -> Tuple[Dataset, Dataset]:
    """Separa treino e teste; sem teste, avalia no próprio treino."""
    try:
        train_set, test_set = dataset.split(test_size)
    except ValueError as e:
        raise ConfigError(f"test_size inválido para {dataset.n} exemplos: {e}") from e
    return train_set, (test_set if test_set.n else train_set)


def _checkpoint_dir(config: RunConfig) -> Path:
    return Path(config.checkpoint) if config.checkpoint else Path(config.out) / CHECKPOINT_DIR


def _load_run(config: RunConfig) -> Tuple[Checkpoint, VariationalLadder]:
    checkpoint = load_checkpoint(PathValidator.require_dir(_checkpoint_dir(config), "checkpoint"))
    return checkpoint, build_model(checkpoint.config)


def resolve_layer(config: RunConfig, model: VariationalLadder) -> int:
    """
    Camada pedida pelo usuário ou a camada designada: a única camada do
    GM-DGM, a camada 3 da escada quando existe, senão a última camada de mistura.

    Raises:
        ConfigError: camada fora de 1..L
    """
    L = model.config.L
    if config.layer is not None:
        layer = config.layer
    elif model.config.kind == GM_DGM or L == 1:
        layer = 1
    elif DEFAULT_LAYER <= L:
        layer = DEFAULT_LAYER
    else:
        layer = model.config.mixture_layers[-1] if model.config.mixture_layers else L
    if not 1 <= layer <= L:
        raise ConfigError(f"camada {layer} fora de 1..{L}")
    return layer


def _image_shape(checkpoint: Checkpoint, config: RunConfig) -> Tuple[int, ...]:
    shape = checkpoint.meta.get("image_shape")
    if shape is None:
        shape = (config.height, config.width, config.channels)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != checkpoint.config.x_dim:
        raise ConfigError(f"forma de imagem {shape} incompatível com x_dim={checkpoint.config.x_dim}")
    return shape


def cmd_synth(config: RunConfig) -> Path:
    """Gera o dataset sintético em formato bruto e uma folha de contato 8×8."""
    if config.n < 1:
        raise ConfigError(f"n deve ser positivo, recebeu {config.n}")
    out = _prepare_out(config)
    dataset = synth_generate(config.factor_spec(), config.n, config.seed)
    write_raw(out, dataset)
    preview = contact_sheet(dataset.images(np.arange(min(dataset.n, PREVIEW_GRID ** 2))), PREVIEW_GRID, PREVIEW_GRID)
    write_ppm(out / PREVIEW_FILE, preview)
    logger.info(f"Dataset sintético com {dataset.n} imagens gravado em {out}")
    return out


def _evaluator(model: VariationalLadder, test_set: Dataset, layer: Optional[int]) -> Optional[Callable]:
    if layer is None or model.config.layer(layer).K < 2:
        return None

    def evaluate(params, step: int) -> Dict[str, float]:
        return evaluate_model(model, params, test_set, layer).scores()

    return evaluate


def _designated_layer(config: RunConfig, model: VariationalLadder) -> Optional[int]:
    if not model.config.mixture_layers:
        return None
    layer = resolve_layer(config, model)
    return layer if model.config.layer(layer).K > 1 else None


def cmd_train(config: RunConfig, log_callback: Optional[Callable] = None) -> Path:
    """
    Treina o preset configurado a partir do dataset.

    Com resume=True retoma de <out>/checkpoint (ou de config.checkpoint);
    a configuração do modelo vem do checkpoint.
    """
    dataset = _load_dataset(config)
    out = _prepare_out(config)
    train_set, test_set = _split(dataset, config.test_size)
    train_config = config.train_config()

    state = None
    if config.resume:
        directory = _checkpoint_dir(config)
        if (directory / "manifest.txt").exists():
            state = TrainState.from_checkpoint(load_checkpoint(directory), train_config)
            model = state.model
            logger.info(f"Retomando do passo {state.step} ({directory})")
        else:
            logger.warning(f"Nenhum checkpoint em {directory}; treinando do início")
    if state is None:
        model = build_model(config.model_config(dataset.x_dim))

    trainer = Trainer(
        model,
        train_config,
        out,
        evaluator=_evaluator(model, test_set, _designated_layer(config, model)),
        log_callback=log_callback,
        metadata={"image_shape": list(dataset.image_shape), "preset": config.preset},
    )
    trainer.attach(TrainingLogObserver(log_callback))
    result = trainer.train(train_set, state)

    if model.config.mixture_layers:
        matrix = layer_factor_matrix(model, result.params, test_set)
        matrix.to_csv(out / FACTORS_FILE)
    return out


def cmd_eval(config: RunConfig) -> Path:
    """Avalia a camada escolhida no conjunto de teste e grava report_layer{ℓ}.txt."""
    checkpoint, model = _load_run(config)
    layer = resolve_layer(config, model)
    dataset = _load_dataset(config)
    _, test_set = _split(dataset, config.test_size)
    out = _prepare_out(config)
    report = evaluate_model(model, checkpoint.params, test_set, layer)
    for channel, by_mode in report.results.items():
        accuracies = ", ".join(f"{mode}={result.accuracy:.3f}" for mode, result in by_mode.items())
        logger.info(f"Camada {layer} × {channel}: {accuracies}")
    return write_report(report, out / f"report_layer{layer}.txt")


def _base_latents(
    model: VariationalLadder, checkpoint: Checkpoint, config: RunConfig, rows: int, rng: np.random.Generator
) -> List[np.ndarray]:
    """Latentes de partida do protocolo marginal: médias do posterior de imagens reais, ou o prior."""
    if not config.dataset:
        return sample_prior_latents(model, checkpoint.params, rows, rng)
    dataset = _load_dataset(config)
    if dataset.x_dim != model.config.x_dim:
        raise ConfigError(f"dataset com x_dim={dataset.x_dim}, modelo espera {model.config.x_dim}")
    x = dataset.flat(np.arange(min(rows, dataset.n)))
    n = x.shape[0]
    noise = LatentNoise(
        [np.zeros((n, spec.d_z)) for spec in model.config.layers],
        [np.full((n, spec.K), 0.5) if spec.K > 1 else None for spec in model.config.layers],
    )
    tau = float(checkpoint.train.get("tau_end", config.tau_end))
    state = model.encode(checkpoint.params, x, noise, temperature=tau)
    return [z.value for z in state.latents]


def cmd_generate(config: RunConfig) -> Path:
    """
    Grade PPM de médias do decoder.

    conditional: uma coluna por componente da camada ℓ (K_ℓ > 1).
    marginal: coluna 0 reconstrói, as demais reamostram só z_ℓ.
    """
    if config.mode not in GENERATION_MODES:
        raise ConfigError(f"modo de geração desconhecido: {config.mode} (use {' ou '.join(GENERATION_MODES)})")
    checkpoint, model = _load_run(config)
    layer = resolve_layer(config, model)
    shape = _image_shape(checkpoint, config)
    rng = np.random.default_rng(config.seed)
    if config.mode == "conditional":
        grid = conditional_grid(model, checkpoint.params, layer, config.grid_rows, rng)
    else:
        base = _base_latents(model, checkpoint, config, config.grid_rows, rng)
        grid = marginal_grid(model, checkpoint.params, layer, base, config.grid_columns, rng)
    out = _prepare_out(config)
    image = tile_grid(grid.reshape(grid.shape[:2] + shape))
    path = write_ppm(out / f"{config.mode}_layer{layer}.ppm", image)
    logger.info(f"Grade {grid.shape[0]}×{grid.shape[1]} gravada em {path}")
    return path


def cmd_sweep(config: RunConfig, log_callback: Optional[Callable] = None) -> Path:
    """Treina o mesmo preset para cada semente e resume as acurácias (média ± desvio)."""
    seeds = config.seed_list()
    if not seeds:
        raise ConfigError("nenhuma semente informada em 'seeds'")
    dataset = _load_dataset(config)
    out = _prepare_out(config)
    train_set, test_set = _split(dataset, config.test_size)

    def job(seed: int) -> Dict[str, float]:
        model = build_model(config.model_config(dataset.x_dim, seed=seed))
        layer = _designated_layer(config, model)
        if layer is None:
            raise ConfigError(f"preset {config.preset} não tem camada de mistura para avaliar")
        trainer = Trainer(
            model,
            config.train_config(seed=seed),
            out / f"seed_{seed}",
            log_callback=log_callback,
            metadata={"image_shape": list(dataset.image_shape), "preset": config.preset},
        )
        result = trainer.train(train_set)
        return evaluate_model(model, result.params, test_set, layer).scores()

    sweep = SeedSweep(max_workers=config.sweep_workers, log_callback=log_callback)
    result = sweep.run(seeds, job)
    for seed, error in sorted(result.errors.items()):
        logger.error(f"Semente {seed} falhou: {error}")
    if not result.results:
        if all(error.startswith("ConfigError") for error in result.errors.values()):
            raise ConfigError("nenhuma semente concluída")
        raise VLACError("nenhuma semente concluída")
    result.table().to_csv(out / SWEEP_FILE)
    summary = result.summary()
    summary.index.name = "metric"
    summary.to_csv(out / SWEEP_SUMMARY_FILE)
    for metric, row in summary.iterrows():
        logger.info(f"{metric}: {row['mean']:.3f} ± {row['std']:.3f} ({int(row['runs'])} execuções)")
    return out / SWEEP_SUMMARY_FILE


def cmd_selfcheck(config: RunConfig, suites: Optional[List[str]] = None, log_callback: Optional[Callable] = None) -> SelfCheckReport:
    """Roda as suítes numéricas e grava o relatório em <out>/selfcheck.csv."""
    report = run_selfcheck(suites=suites, log_callback=log_callback)
    out = PathValidator.ensure_output_dir(config.out)
    report.table().to_csv(out / SELFCHECK_FILE, index=False)
    return report
