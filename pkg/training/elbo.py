#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
ELBO - Limite inferior da evidência

    ELBO(x) = E log p(x|z) − Σ_ℓ E_y KL(q(z_ℓ|x, y_≤ℓ) || p(z_ℓ|y_ℓ)) − Σ_ℓ KL(q(y_ℓ|x) || p(y_ℓ))

elbo() usa uma amostra de z e uma amostra CONCRETE de y por camada; com y
relaxado, p(z_ℓ|ỹ) mistura médias e desvios crus pelos pesos ỹ. exact_elbo()
enumera todas as combinações de y one-hot e serve de oráculo.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from autodiff import Tensor
from ladder import (
    DiagGaussian,
    LatentNoise,
    LatentState,
    VariationalLadder,
    gaussian_log_prob,
    kl_categorical_uniform,
    kl_gaussian_gaussian,
)
from ladder.model import Params, as_tensors
from utils.errors import GuardExceededError, NonFiniteError

MAX_COMBINATIONS = 256


@dataclass
class ElboBreakdown:
    """Termos médios do lote (Tensors escalares) e o total por exemplo."""

    reconstruction: Tensor
    kl_z: List[Tensor]
    kl_y: List[Tensor]
    total: Tensor
    per_example: Tensor

    def as_floats(self) -> dict:
        row = {"total": self.total.item(), "reconstruction": self.reconstruction.item()}
        row.update({f"kl_z_{i + 1}": kl.item() for i, kl in enumerate(self.kl_z)})
        row.update({f"kl_y_{i + 1}": kl.item() for i, kl in enumerate(self.kl_y)})
        return row


def _term(name: str, compute: Callable[[], Tensor]) -> Tensor:
    try:
        value = compute()
    except NonFiniteError as e:
        raise NonFiniteError(name, f"operação '{e.name}'") from e
    if not np.isfinite(value.value).all():
        raise NonFiniteError(name)
    return value


def reconstruction_log_prob(x_mean: Tensor, x: Tensor, sigma_x: float) -> Tensor:
    """log N(x | f_0(z̃_1), σ_x² I) por exemplo."""
    stddev = Tensor(np.full(x_mean.shape[-1], sigma_x, dtype=x_mean.dtype))
    return gaussian_log_prob(DiagGaussian(x_mean, stddev), x)


def _layer_terms(model: VariationalLadder, params, state: LatentState, forced=None):
    """KL por exemplo de cada camada: (lista kl_z, lista kl_y)."""
    prior = model.prior(params)
    kl_z, kl_y = [], []
    for i, (layer, mixture) in enumerate(zip(state.layers, prior.layers)):
        index = i + 1
        if mixture.is_mixture:
            if forced is not None and forced[i] is not None:
                p = mixture.component(forced[i])
            else:
                p = mixture.mix(layer.y_input)
            kl_z.append(_term(f"kl_z_{index}", lambda: kl_gaussian_gaussian(layer.posterior, p)))
            kl_y.append(_term(f"kl_y_{index}", lambda: kl_categorical_uniform(layer.categorical)))
        else:
            p = mixture.component(np.zeros(0, dtype=np.int64))
            kl_z.append(_term(f"kl_z_{index}", lambda: kl_gaussian_gaussian(layer.posterior, p)))
            kl_y.append(Tensor(np.zeros(layer.z.shape[0], dtype=layer.z.dtype)))
    return kl_z, kl_y


def elbo(
    model: VariationalLadder,
    params: Params,
    x,
    noise: LatentNoise,
    temperature: float = 1.0,
    straight_through: bool = False,
) -> ElboBreakdown:
    """
    Estimativa de uma amostra do ELBO, média sobre o lote.

    Args:
        model: Modelo da escada
        params: Parâmetros (ligados a um Graph para treino)
        x: Lote [B, x_dim] com pixels em [0, 1]
        noise: Ruído gaussiano e uniforme por camada
        temperature: τ da amostragem CONCRETE
        straight_through: y one-hot no forward

    Raises:
        NonFiniteError: com o nome do termo não finito
    """
    params = as_tensors(params)
    state = model.encode(params, x, noise, temperature, straight_through)
    x_tensor = model.prepare_input(x, model.param_dtype(params))
    x_mean = model.reconstruct(params, state)
    recon = _term("reconstruction", lambda: reconstruction_log_prob(x_mean, x_tensor, model.config.sigma_x))
    kl_z, kl_y = _layer_terms(model, params, state)

    per_example = recon
    for kl in kl_z + kl_y:
        per_example = per_example - kl

    recon_mean = recon.mean()
    kl_z_mean = [kl.mean() for kl in kl_z]
    kl_y_mean = [kl.mean() for kl in kl_y]
    total = recon_mean
    for kl in kl_z_mean + kl_y_mean:
        total = total - kl
    return ElboBreakdown(recon_mean, kl_z_mean, kl_y_mean, _term("total", lambda: total), per_example)


def exact_elbo_per_example(
    model: VariationalLadder,
    params: Params,
    x,
    gaussian_noise: Sequence[np.ndarray],
    max_combinations: int = MAX_COMBINATIONS,
) -> Tensor:
    """
    ELBO com y marginalizado exatamente, por exemplo.

    Cada ramo fixa um y one-hot por camada de mistura e recebe peso
    Π_ℓ q(y_ℓ = k_ℓ | x). π_ℓ vem do tronco determinístico, então os pesos e
    o KL de y são os mesmos em todos os ramos.
    """
    params = as_tensors(params)
    mixture_layers = [i for i, spec in enumerate(model.config.layers) if spec.K > 1]
    sizes = [model.config.layers[i].K for i in mixture_layers]
    combinations = math.prod(sizes)
    if combinations > max_combinations:
        raise GuardExceededError(f"{combinations} combinações de y excedem o limite de {max_combinations}")

    noise = LatentNoise(list(gaussian_noise), [None] * model.config.L)
    if not mixture_layers:
        return elbo(model, params, x, noise).per_example

    x_tensor = model.prepare_input(x, model.param_dtype(params))
    batch = x_tensor.shape[0]
    result: Optional[Tensor] = None
    for combo in itertools.product(*[range(K) for K in sizes]):
        forced: List[Optional[np.ndarray]] = [None] * model.config.L
        for i, k in zip(mixture_layers, combo):
            forced[i] = np.full(batch, k, dtype=np.int64)
        state = model.encode(params, x_tensor, noise, forced=forced)
        x_mean = model.reconstruct(params, state)
        value = reconstruction_log_prob(x_mean, x_tensor, model.config.sigma_x)
        kl_z, kl_y = _layer_terms(model, params, state, forced)
        for kl in kl_z + kl_y:
            value = value - kl

        weight = None
        for i, k in zip(mixture_layers, combo):
            q = state.layers[i].categorical.probs
            mask = np.zeros(q.shape, dtype=q.dtype)
            mask[:, k] = 1.0
            chosen = (q * mask).sum(axis=-1)
            weight = chosen if weight is None else weight * chosen
        branch = weight * value
        result = branch if result is None else result + branch
    return result


def exact_elbo(
    model: VariationalLadder,
    params: Params,
    x,
    gaussian_noise: Sequence[np.ndarray],
    max_combinations: int = MAX_COMBINATIONS,
) -> Tensor:
    """Média sobre o lote de exact_elbo_per_example (sem camadas de mistura, igual a elbo().total)."""
    if not model.config.mixture_layers:
        return elbo(model, params, x, LatentNoise(list(gaussian_noise), [None] * model.config.L)).total
    return exact_elbo_per_example(model, params, x, gaussian_noise, max_combinations).mean()
