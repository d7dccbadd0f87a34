#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Generation - Amostragem a partir do prior

Dois protocolos de visualização:
- condicional: z_ℓ ~ p(z_ℓ|y_ℓ) para cada componente, demais camadas fixas;
- marginal: z_ℓ reamostrado de Σ_y p(z_ℓ|y) p(y), demais camadas fixas.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from autodiff import Tensor
from utils.errors import ConfigError

from .distributions import gaussian_rsample, mixture_marginal_sample
from .model import Params, VariationalLadder, as_tensors


def _check_layer(model: VariationalLadder, layer: int, need_mixture: bool = False) -> None:
    spec = model.config.layer(layer)
    if need_mixture and spec.K < 2:
        raise ConfigError(f"camada {layer} tem K=1: não há componentes para condicionar")


def sample_prior_latents(model: VariationalLadder, params: Params, n: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Um z_ℓ por camada, cada um do seu marginal p(z_ℓ)."""
    prior = model.prior(as_tensors(params))
    latents = []
    for layer, spec in zip(prior.layers, model.config.layers):
        if layer.is_mixture:
            z, _ = mixture_marginal_sample(layer, rng.random(n), rng.standard_normal((n, spec.d_z)))
            latents.append(z.value)
        else:
            latents.append(rng.standard_normal((n, spec.d_z)))
    return latents


def generate_conditional(
    model: VariationalLadder,
    params: Params,
    layer: int,
    component: int,
    fixed_latents: Sequence[np.ndarray],
    noise: np.ndarray,
) -> Tensor:
    """
    Decodifica com z_ℓ ~ N(μ_y, σ_y) para uma componente y fixa.

    Args:
        model: Modelo da escada
        params: Parâmetros θ
        layer: Camada ℓ (a partir de 1) com K_ℓ > 1
        component: Componente y em 0..K_ℓ−1
        fixed_latents: z_ℓ' para todas as camadas (a camada ℓ é substituída)
        noise: Normais padrão [n, d_z]

    Returns:
        Média da imagem [n, x_dim]
    """
    _check_layer(model, layer, need_mixture=True)
    params = as_tensors(params)
    mixture = model.prior(params).layer(layer)
    if not 0 <= component < mixture.K:
        raise ValueError(f"componente {component} fora de 0..{mixture.K - 1}")
    n = np.asarray(fixed_latents[0]).shape[0]
    z = gaussian_rsample(mixture.component(np.full(n, component)), noise)
    latents = list(fixed_latents)
    latents[layer - 1] = z
    return model.decode(params, latents)


def generate_marginal_resample(
    model: VariationalLadder,
    params: Params,
    layer: int,
    base_latents: Sequence[np.ndarray],
    component_noise: np.ndarray,
    gaussian_noise: np.ndarray,
) -> Tensor:
    """Decodifica com z_ℓ sorteado do marginal; com K_ℓ = 1 equivale a N(0, I)."""
    _check_layer(model, layer)
    params = as_tensors(params)
    z, _ = mixture_marginal_sample(model.prior(params).layer(layer), component_noise, gaussian_noise)
    latents = list(base_latents)
    latents[layer - 1] = z
    return model.decode(params, latents)


def conditional_grid(
    model: VariationalLadder, params: Params, layer: int, rows: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Grade [rows, K_ℓ, x_dim]: uma coluna por componente.

    Cada linha mantém as outras camadas e o ruído de z_ℓ, de modo que as
    colunas diferem apenas pela componente.
    """
    _check_layer(model, layer, need_mixture=True)
    params = as_tensors(params)
    fixed = sample_prior_latents(model, params, rows, rng)
    noise = rng.standard_normal((rows, model.config.layer(layer).d_z))
    columns = [
        generate_conditional(model, params, layer, k, fixed, noise).value
        for k in range(model.config.layer(layer).K)
    ]
    return np.stack(columns, axis=1)


def marginal_grid(
    model: VariationalLadder,
    params: Params,
    layer: int,
    base_latents: Sequence[np.ndarray],
    columns: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Grade [rows, columns + 1, x_dim]: a coluna 0 é a reconstrução original,
    as seguintes reamostram apenas a camada ℓ.
    """
    _check_layer(model, layer)
    params = as_tensors(params)
    rows = np.asarray(base_latents[0]).shape[0]
    d_z = model.config.layer(layer).d_z
    images = [model.decode(params, base_latents).value]
    for _ in range(columns):
        images.append(
            generate_marginal_resample(
                model, params, layer, base_latents, rng.random(rows), rng.standard_normal((rows, d_z))
            ).value
        )
    return np.stack(images, axis=1)
