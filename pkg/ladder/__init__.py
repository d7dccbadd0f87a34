#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Ladder Package

Modelos generativos em escada (VLAE, VLAC e GM-DGM) e suas peças.

Módulos disponíveis:
- distributions: Gaussianas, categóricas, CONCRETE e misturas
- config: LayerSpec, ModelConfig e presets de K
- parameters: ParameterStore
- networks: Blocos MLP
- model: VariationalLadder, ClusteringLadder, GaussianMixtureDGM
- generation: Protocolos de amostragem condicional e marginal
- checkpoint: Gravação e leitura de checkpoints
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import (
    GM_DGM,
    PRESETS,
    LayerSpec,
    ModelConfig,
    gm_dgm_config,
    ladder_config,
    preset_config,
)
from .distributions import (
    CategoricalParams,
    ConcreteSample,
    DiagGaussian,
    MixtureLayer,
    concrete_sample,
    gaussian_log_prob,
    gaussian_rsample,
    kl_categorical_uniform,
    kl_gaussian_gaussian,
    mixture_marginal_sample,
)
from .generation import (
    conditional_grid,
    generate_conditional,
    generate_marginal_resample,
    marginal_grid,
    sample_prior_latents,
)
from .model import (
    ClusteringLadder,
    GaussianMixtureDGM,
    GMDGMOutput,
    LatentNoise,
    LatentState,
    LayerState,
    MixturePrior,
    VariationalLadder,
    build_model,
)
from .parameters import ParameterStore

__all__ = [
    "GM_DGM",
    "PRESETS",
    "CategoricalParams",
    "Checkpoint",
    "ClusteringLadder",
    "ConcreteSample",
    "DiagGaussian",
    "GMDGMOutput",
    "GaussianMixtureDGM",
    "LatentNoise",
    "LatentState",
    "LayerSpec",
    "LayerState",
    "MixtureLayer",
    "MixturePrior",
    "ModelConfig",
    "ParameterStore",
    "VariationalLadder",
    "build_model",
    "concrete_sample",
    "conditional_grid",
    "gaussian_log_prob",
    "gaussian_rsample",
    "generate_conditional",
    "generate_marginal_resample",
    "gm_dgm_config",
    "kl_categorical_uniform",
    "kl_gaussian_gaussian",
    "ladder_config",
    "load_checkpoint",
    "marginal_grid",
    "mixture_marginal_sample",
    "preset_config",
    "sample_prior_latents",
    "save_checkpoint",
]
