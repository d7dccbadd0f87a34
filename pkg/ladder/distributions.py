#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Distributions - Primitivas de probabilidade

Gaussianas diagonais, categóricas, amostragem CONCRETE (Gumbel-Softmax) e as
divergências em forma fechada usadas pelo prior, pelo posterior, pela
verossimilhança e pelo ELBO. Todas as funções são puras sobre ruído fornecido
pelo chamador.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from autodiff import LOG_2PI, Tensor, log_softmax, one_hot, softmax, stop_gradient
from utils.errors import ShapeError

STD_FLOOR = 1e-6
NOISE_CLAMP = 1e-7
# softplus(RAW_UNIT_STD) == 1
RAW_UNIT_STD = math.log(math.e - 1.0)


def positive_std(raw: Tensor) -> Tensor:
    """softplus(raw) + piso, sempre estritamente positivo."""
    return raw.softplus() + STD_FLOOR


@dataclass
class DiagGaussian:
    mean: Tensor
    stddev: Tensor

    @classmethod
    def from_raw(cls, mean: Tensor, raw: Tensor) -> "DiagGaussian":
        return cls(mean, positive_std(raw))

    @classmethod
    def standard(cls, dim: int, dtype=np.float64) -> "DiagGaussian":
        return cls(Tensor(np.zeros(dim, dtype=dtype)), Tensor(np.ones(dim, dtype=dtype)))

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]


def _check_last_dim(name: str, a: Tensor, b: Tensor) -> None:
    if a.shape[-1:] != b.shape[-1:]:
        raise ShapeError(f"{name}: formas incompatíveis {a.shape} e {b.shape}")


def gaussian_log_prob(d: DiagGaussian, x: Tensor) -> Tensor:
    """log N(x | μ, σ) somado sobre o último eixo."""
    x = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
    _check_last_dim("gaussian_log_prob", d.mean, x)
    z = (x - d.mean) / d.stddev
    return (-0.5 * LOG_2PI - d.stddev.log() - 0.5 * z.square()).sum(axis=-1)


def gaussian_rsample(d: DiagGaussian, noise: np.ndarray) -> Tensor:
    """Amostra reparametrizada μ + σ⊙ε."""
    return d.mean + d.stddev * noise


def kl_gaussian_gaussian(q: DiagGaussian, p: DiagGaussian) -> Tensor:
    """KL(q || p) entre gaussianas diagonais, somado sobre o último eixo."""
    _check_last_dim("kl_gaussian_gaussian", q.mean, p.mean)
    var_ratio = (q.stddev.square() + (q.mean - p.mean).square()) / (2.0 * p.stddev.square())
    return (p.stddev.log() - q.stddev.log() + var_ratio - 0.5).sum(axis=-1)


@dataclass
class CategoricalParams:
    logits: Tensor

    @property
    def K(self) -> int:
        return self.logits.shape[-1]

    @property
    def log_probs(self) -> Tensor:
        return log_softmax(self.logits, axis=-1)

    @property
    def probs(self) -> Tensor:
        return softmax(self.logits, axis=-1)

    def argmax(self) -> np.ndarray:
        return np.argmax(self.logits.value, axis=-1)


def kl_categorical_uniform(q: CategoricalParams, K: Optional[int] = None) -> Tensor:
    """KL(q || Cat(1/K)) = Σ q_k (log q_k + log K)."""
    K = q.K if K is None else K
    if K < 1:
        raise ValueError(f"K deve ser >= 1, recebeu {K}")
    return (q.probs * (q.log_probs + math.log(K))).sum(axis=-1)


@dataclass
class ConcreteSample:
    """Amostra relaxada no simplex mais a versão one-hot do seu argmax."""

    relaxed: Tensor
    hard: np.ndarray
    temperature: float

    def straight_through(self) -> Tensor:
        """Valor one-hot no forward, gradiente da amostra relaxada no backward."""
        return self.relaxed - stop_gradient(self.relaxed) + self.hard

    def value(self, straight_through: bool = False) -> Tensor:
        return self.straight_through() if straight_through else self.relaxed


def gumbel(uniform_noise: np.ndarray) -> np.ndarray:
    u = np.clip(np.asarray(uniform_noise, dtype=np.float64), NOISE_CLAMP, 1.0 - NOISE_CLAMP)
    return -np.log(-np.log(u))


def concrete_sample(logits: Tensor, temperature: float, uniform_noise: np.ndarray) -> ConcreteSample:
    """
    Amostra CONCRETE: softmax((logits + g)/τ) com g = −log(−log u).

    Args:
        logits: Tensor[..., K]
        temperature: τ > 0
        uniform_noise: Ruído em (0,1) com a forma dos logits
    """
    if not temperature > 0:
        raise ValueError(f"temperatura deve ser positiva, recebeu {temperature}")
    noise = gumbel(uniform_noise).astype(logits.dtype, copy=False)
    if noise.shape != logits.shape:
        raise ShapeError(f"concrete_sample: ruído {noise.shape} e logits {logits.shape}")
    relaxed = softmax((logits + noise) / temperature, axis=-1)
    hard = one_hot(np.argmax(relaxed.value, axis=-1), logits.shape[-1], dtype=relaxed.dtype)
    return ConcreteSample(relaxed, hard, float(temperature))


@dataclass
class MixtureLayer:
    """
    Prior de uma camada: mistura de K gaussianas com pesos uniformes, ou a
    normal padrão fixa N(0, I) quando K == 1.
    """

    dim: int
    means: Optional[Tensor] = None
    raw_stddev: Optional[Tensor] = None
    dtype: type = np.float64

    @property
    def K(self) -> int:
        return 1 if self.means is None else self.means.shape[0]

    @property
    def is_mixture(self) -> bool:
        return self.means is not None

    def component(self, indices: np.ndarray) -> DiagGaussian:
        """Componentes selecionadas por índice (um por linha)."""
        indices = np.asarray(indices, dtype=np.int64)
        if not self.is_mixture:
            return DiagGaussian.standard(self.dim, self.dtype)
        if indices.size and (indices.min() < 0 or indices.max() >= self.K):
            raise ValueError(f"componente fora de 0..{self.K - 1}: {indices}")
        return self.mix(Tensor(one_hot(indices, self.K, dtype=self.means.dtype)))

    def mix(self, weights: Optional[Tensor]) -> DiagGaussian:
        """p(z|ỹ) com μ = Σ ỹ_k μ_k e desvio a partir de Σ ỹ_k raw_k."""
        if not self.is_mixture:
            return DiagGaussian.standard(self.dim, self.dtype)
        if weights.ndim == 1:
            weights = weights.reshape(1, self.K)
            gaussian = DiagGaussian.from_raw(weights @ self.means, weights @ self.raw_stddev)
            return DiagGaussian(gaussian.mean.reshape(self.dim), gaussian.stddev.reshape(self.dim))
        return DiagGaussian.from_raw(weights @ self.means, weights @ self.raw_stddev)


def mixture_marginal_sample(
    layer: MixtureLayer, component_noise: np.ndarray, gaussian_noise: np.ndarray
) -> Tuple[Tensor, np.ndarray]:
    """
    Amostra do marginal Σ_y p(z|y) p(y): y uniforme, depois z ~ N(μ_y, σ_y).

    Args:
        layer: Prior da camada
        component_noise: Uniformes em [0,1), um por amostra
        gaussian_noise: Normais padrão [n, d]

    Returns:
        (z, componentes sorteadas)
    """
    u = np.atleast_1d(np.asarray(component_noise, dtype=np.float64))
    components = np.minimum((u * layer.K).astype(np.int64), layer.K - 1)
    return gaussian_rsample(layer.component(components), gaussian_noise), components
