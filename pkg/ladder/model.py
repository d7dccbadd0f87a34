#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Model - Escada variacional e suas extensões

VariationalLadder implementa o VLAE: camadas latentes independentes com prior
N(0, I), decoder em escada (z̃_L = f_L(z_L), z̃_ℓ = f_ℓ(z_ℓ, z̃_{ℓ+1}),
x ~ N(f_0(z̃_1), σ_x)) e o encoder em sentido inverso (h_ℓ = g_ℓ(h_{ℓ−1})).

ClusteringLadder (VLAC) acrescenta, para cada camada com K_ℓ > 1, um prior de
mistura p(z_ℓ|y_ℓ) = N(μ_y, σ_y), p(y_ℓ) = Cat(1/K_ℓ) e o posterior
q(y_ℓ|x) = Cat(π_ℓ(x)); y_{ℓ−1} entra em g_ℓ e y_ℓ entra nas cabeças μ, σ.
π_ℓ vem de um tronco determinístico que troca as amostras de y por
probabilidades, portanto não depende do ruído.
Entradas com vários argumentos são concatenadas.

GaussianMixtureDGM é o caso de uma única camada, usado como baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from autodiff import Tensor, concat, one_hot
from utils.errors import ShapeError
from utils.logger import get_logger

from .config import GM_DGM, ModelConfig
from .distributions import (
    RAW_UNIT_STD,
    CategoricalParams,
    ConcreteSample,
    DiagGaussian,
    MixtureLayer,
    concrete_sample,
    gaussian_log_prob,
    gaussian_rsample,
)
from .networks import MLP
from .parameters import ParameterStore, parameter_rng

Params = Union[ParameterStore, Mapping[str, Tensor]]


def as_tensors(params: Params) -> Mapping[str, Tensor]:
    """Aceita um ParameterStore (vira constantes) ou um mapa já ligado ao grafo."""
    return params.constants() if isinstance(params, ParameterStore) else params


@dataclass
class LatentNoise:
    """Ruído injetável: normais [B, d_z] e uniformes [B, K] por camada."""

    gaussian: List[np.ndarray]
    uniform: List[Optional[np.ndarray]]

    @classmethod
    def draw(cls, config: ModelConfig, batch: int, rng: np.random.Generator) -> "LatentNoise":
        gaussian = [rng.standard_normal((batch, spec.d_z)) for spec in config.layers]
        uniform = [rng.random((batch, spec.K)) if spec.K > 1 else None for spec in config.layers]
        return cls(gaussian, uniform)

    @property
    def batch(self) -> int:
        return self.gaussian[0].shape[0]

    def repeat(self, count: int) -> "LatentNoise":
        """Repete cada linha `count` vezes (mesma ordem de np.repeat)."""
        return LatentNoise(
            [np.repeat(g, count, axis=0) for g in self.gaussian],
            [None if u is None else np.repeat(u, count, axis=0) for u in self.uniform],
        )


@dataclass
class LayerState:
    h: Tensor
    z: Tensor
    posterior: DiagGaussian
    categorical: Optional[CategoricalParams] = None
    y: Optional[ConcreteSample] = None
    y_input: Optional[Tensor] = None


@dataclass
class LatentState:
    """Uma amostra de todos os pares (z_ℓ, y_ℓ), os estados h_ℓ e os z̃_ℓ do decoder."""

    layers: List[LayerState]
    z_tilde: List[Tensor] = field(default_factory=list)

    @property
    def latents(self) -> List[Tensor]:
        return [layer.z for layer in self.layers]


@dataclass
class MixturePrior:
    layers: List[MixtureLayer]

    def layer(self, index: int) -> MixtureLayer:
        return self.layers[index - 1]

    def log_prob(
        self, latents: Sequence[Tensor], components: Sequence[Optional[np.ndarray]]
    ) -> Tuple[List[Tensor], Tensor]:
        """
        log p(z|y) por camada e avaliado sobre o vetor concatenado inteiro.

        Args:
            latents: z_ℓ por camada, [B, d_z]
            components: Índices de y_ℓ por camada; None só em camadas com K_ℓ = 1

        Returns:
            (lista por camada, valor conjunto)

        Raises:
            ValueError: Se faltar a componente de uma camada de mistura
        """
        if len(latents) != len(self.layers) or len(components) != len(self.layers):
            raise ShapeError(f"esperado {len(self.layers)} camadas, recebido {len(latents)} latentes")
        per_layer, means, stds = [], [], []
        for index, (layer, z, y) in enumerate(zip(self.layers, latents, components), start=1):
            z = z if isinstance(z, Tensor) else Tensor(z)
            if y is None and layer.is_mixture:
                raise ValueError(f"camada {index} é uma mistura e exige a componente y")
            gaussian = layer.component(np.zeros(0, dtype=np.int64) if y is None else y)
            per_layer.append(gaussian_log_prob(gaussian, z))
            means.append(gaussian.mean + np.zeros(z.shape))
            stds.append(gaussian.stddev + np.zeros(z.shape))
        joint_latents = concat([z if isinstance(z, Tensor) else Tensor(z) for z in latents], axis=-1)
        joint = gaussian_log_prob(DiagGaussian(concat(means, axis=-1), concat(stds, axis=-1)), joint_latents)
        return per_layer, joint


class VariationalLadder:
    """
    VLAE sem nenhuma maquinaria categórica.

    Args:
        config: Arquitetura (todas as camadas com K_ℓ = 1 são usadas como N(0, I))
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        self.logger = get_logger(__name__)
        self.encoders: List[MLP] = []
        self.mean_heads: List[MLP] = []
        self.std_heads: List[MLP] = []
        self.decoders: List[MLP] = []
        self._build()

    # largura de y_ℓ quando concatenado às entradas (0 no VLAE)
    def _y_width(self, index: int) -> int:
        return 0

    def _build(self) -> None:
        layers, x_dim = self.config.layers, self.config.x_dim
        for i, spec in enumerate(layers):
            in_dim = x_dim if i == 0 else layers[i - 1].hidden + self._y_width(i - 1)
            self.encoders.append(MLP.block(f"enc.g{i + 1}", in_dim, spec.hidden, spec.hidden, spec.depth))
            head_in = spec.hidden + self._y_width(i)
            self.mean_heads.append(MLP.linear(f"enc.mu{i + 1}", head_in, spec.d_z))
            self.std_heads.append(MLP.linear(f"enc.sigma{i + 1}", head_in, spec.d_z))
            dec_in = spec.d_z + (layers[i + 1].hidden if i + 1 < len(layers) else 0)
            self.decoders.append(MLP.block(f"dec.f{i + 1}", dec_in, spec.hidden, spec.hidden, spec.depth))
        self.output_net = MLP.block("dec.f0", layers[0].hidden, layers[0].hidden, x_dim, output="sigmoid")

    def networks(self) -> List[MLP]:
        nets = []
        for i in range(self.config.L):
            nets.extend([self.encoders[i], self.mean_heads[i], self.std_heads[i], self.decoders[i]])
        nets.append(self.output_net)
        return nets

    def init_params(self, seed: Optional[int] = None) -> ParameterStore:
        seed = self.config.seed if seed is None else seed
        store = ParameterStore()
        for net in self.networks():
            net.init(store, seed)
        self._init_extra(store, seed)
        self.logger.debug(f"{store.num_values} parâmetros inicializados (semente {seed})")
        return store

    def _init_extra(self, store: ParameterStore, seed: int) -> None:
        pass

    def prepare_input(self, x, dtype) -> Tensor:
        x = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=dtype))
        if x.ndim == 1:
            x = x.reshape(1, x.shape[0])
        if x.ndim != 2 or x.shape[1] != self.config.x_dim:
            raise ShapeError(f"entrada com forma {x.shape}, esperado (B, {self.config.x_dim})")
        return x

    def _check_noise(self, noise: LatentNoise, batch: int) -> None:
        if len(noise.gaussian) != self.config.L:
            raise ShapeError(f"ruído para {len(noise.gaussian)} camadas, modelo tem {self.config.L}")
        for spec, g in zip(self.config.layers, noise.gaussian):
            if g.shape != (batch, spec.d_z):
                raise ShapeError(f"ruído gaussiano {g.shape}, esperado {(batch, spec.d_z)}")

    def _posterior(self, params: Mapping[str, Tensor], index: int, head_in: Tensor) -> DiagGaussian:
        return DiagGaussian.from_raw(self.mean_heads[index](params, head_in), self.std_heads[index](params, head_in))

    def encode(
        self,
        params: Params,
        x,
        noise: LatentNoise,
        temperature: float = 1.0,
        straight_through: bool = False,
        forced: Optional[Sequence[Optional[np.ndarray]]] = None,
    ) -> LatentState:
        """h_ℓ = g_ℓ(h_{ℓ−1}) com h_0 = x; z_ℓ ~ N(μ_ℓ(h_ℓ), σ_ℓ(h_ℓ))."""
        params = as_tensors(params)
        x = self.prepare_input(x, self.param_dtype(params))
        self._check_noise(noise, x.shape[0])
        states, h_prev = [], x
        for i in range(self.config.L):
            h = self.encoders[i](params, h_prev)
            posterior = self._posterior(params, i, h)
            states.append(LayerState(h, gaussian_rsample(posterior, noise.gaussian[i]), posterior))
            h_prev = h
        return LatentState(states)

    def decode_with_intermediates(self, params: Params, latents: Sequence) -> Tuple[Tensor, List[Tensor]]:
        params = as_tensors(params)
        if len(latents) != self.config.L:
            raise ShapeError(f"decode recebeu {len(latents)} camadas, modelo tem {self.config.L}")
        if any(z is None for z in latents):
            raise ShapeError("decode exige um latente para cada camada")
        dtype = self.param_dtype(params)
        latents = [z if isinstance(z, Tensor) else Tensor(np.asarray(z, dtype=dtype)) for z in latents]
        batch = latents[0].shape[0] if latents[0].ndim == 2 else None
        for spec, z in zip(self.config.layers, latents):
            if z.ndim != 2 or z.shape != (batch, spec.d_z):
                raise ShapeError(f"latente com forma {z.shape}, esperado ({batch}, {spec.d_z})")
        z_tilde: List[Optional[Tensor]] = [None] * self.config.L
        top = self.config.L - 1
        z_tilde[top] = self.decoders[top](params, latents[top])
        for i in range(top - 1, -1, -1):
            z_tilde[i] = self.decoders[i](params, concat([latents[i], z_tilde[i + 1]], axis=-1))
        return self.output_net(params, z_tilde[0]), z_tilde

    def decode(self, params: Params, latents: Sequence) -> Tensor:
        """Média da verossimilhança gaussiana de variância fixa."""
        return self.decode_with_intermediates(params, latents)[0]

    def reconstruct(self, params: Params, state: LatentState) -> Tensor:
        x_mean, state.z_tilde = self.decode_with_intermediates(params, state.latents)
        return x_mean

    def prior(self, params: Params) -> MixturePrior:
        dtype = self.param_dtype(params)
        return MixturePrior([MixtureLayer(spec.d_z, dtype=dtype) for spec in self.config.layers])

    def classify(self, params: Params, x) -> Dict[int, CategoricalParams]:
        return {}

    @staticmethod
    def param_dtype(params: Params):
        for value in (params.values() if isinstance(params, Mapping) else (a for _, a in params.items())):
            return value.dtype
        return np.float64


class ClusteringLadder(VariationalLadder):
    """VLAC: a escada com prior de mistura nas camadas com K_ℓ > 1."""

    def _y_width(self, index: int) -> int:
        K = self.config.layers[index].K
        return K if K > 1 else 0

    def _build(self) -> None:
        super()._build()
        self.cluster_heads: Dict[int, MLP] = {}
        layers, x_dim = self.config.layers, self.config.x_dim
        for i, spec in enumerate(layers):
            if spec.K > 1:
                # π_ℓ lê h_{ℓ−1} do tronco determinístico (h_0 = x)
                in_dim = x_dim if i == 0 else layers[i - 1].hidden
                self.cluster_heads[i] = MLP(f"enc.pi{i + 1}", [in_dim, spec.hidden, spec.K])

    def networks(self) -> List[MLP]:
        return super().networks() + [self.cluster_heads[i] for i in sorted(self.cluster_heads)]

    def _init_extra(self, store: ParameterStore, seed: int) -> None:
        for i, spec in enumerate(self.config.layers):
            if spec.K > 1:
                name = f"prior.{i + 1}"
                store.add(f"{name}.means", parameter_rng(seed, f"{name}.means").normal(size=(spec.K, spec.d_z)))
                store.add(f"{name}.raw_std", np.full((spec.K, spec.d_z), RAW_UNIT_STD))

    def prior(self, params: Params) -> MixturePrior:
        params = as_tensors(params)
        layers = []
        for i, spec in enumerate(self.config.layers):
            if spec.K > 1:
                name = f"prior.{i + 1}"
                means, raw = params[f"{name}.means"], params[f"{name}.raw_std"]
                layers.append(MixtureLayer(spec.d_z, means, raw, dtype=means.dtype))
            else:
                layers.append(MixtureLayer(spec.d_z, dtype=self.param_dtype(params)))
        return MixturePrior(layers)

    def encode(
        self,
        params: Params,
        x,
        noise: LatentNoise,
        temperature: float = 1.0,
        straight_through: bool = False,
        forced: Optional[Sequence[Optional[np.ndarray]]] = None,
    ) -> LatentState:
        """
        Encoder com variáveis de cluster.

        Args:
            params: Parâmetros (ligados ao grafo ou snapshot)
            x: Lote [B, x_dim]
            noise: Ruído gaussiano e uniforme por camada
            temperature: τ da amostragem CONCRETE
            straight_through: Usa o y one-hot no forward (gradiente relaxado)
            forced: Componentes fixas por camada (enumeração exata); None sorteia
        """
        params = as_tensors(params)
        x = self.prepare_input(x, self.param_dtype(params))
        batch = x.shape[0]
        self._check_noise(noise, batch)
        posteriors = self._cluster_trunk(params, x)
        states: List[LayerState] = []
        h_prev, y_prev = x, None
        for i, spec in enumerate(self.config.layers):
            categorical, sample, y_input = None, None, None
            if spec.K > 1:
                categorical = posteriors[i]
                if forced is not None and forced[i] is not None:
                    y_input = Tensor(one_hot(forced[i], spec.K, dtype=categorical.logits.dtype))
                else:
                    uniform = noise.uniform[i]
                    if uniform is None or uniform.shape != (batch, spec.K):
                        raise ShapeError(f"ruído uniforme da camada {i + 1} ausente ou com forma errada")
                    sample = concrete_sample(categorical.logits, temperature, uniform)
                    y_input = sample.value(straight_through)

            h_in = h_prev if y_prev is None else concat([h_prev, y_prev], axis=-1)
            h = self.encoders[i](params, h_in)
            head_in = h if y_input is None else concat([h, y_input], axis=-1)
            posterior = self._posterior(params, i, head_in)
            z = gaussian_rsample(posterior, noise.gaussian[i])
            states.append(LayerState(h, z, posterior, categorical, sample, y_input))
            h_prev, y_prev = h, y_input
        return LatentState(states)

    def _cluster_trunk(self, params: Mapping[str, Tensor], x: Tensor) -> Dict[int, CategoricalParams]:
        """
        q(y_ℓ|x) de todas as camadas de mistura, indexado a partir de 0.

        O tronco repete os g_ℓ alimentando-os com as probabilidades de
        q(y_{ℓ−1}|x) no lugar de uma amostra, de modo que π_ℓ depende só de x
        e não do ruído. encode, classify e o ELBO exato usam este mesmo tronco.
        """
        result: Dict[int, CategoricalParams] = {}
        if not self.cluster_heads:
            return result
        last = max(self.cluster_heads)
        h_prev, y_prev = x, None
        for i, spec in enumerate(self.config.layers[:last + 1]):
            y_input = None
            if spec.K > 1:
                result[i] = CategoricalParams(self.cluster_heads[i](params, h_prev))
                y_input = result[i].probs
            if i < last:
                h_in = h_prev if y_prev is None else concat([h_prev, y_prev], axis=-1)
                h_prev, y_prev = self.encoders[i](params, h_in), y_input
        return result

    def classify(self, params: Params, x) -> Dict[int, CategoricalParams]:
        """q(y_ℓ|x) para cada camada com K_ℓ > 1, indexado por ℓ (a partir de 1)."""
        params = as_tensors(params)
        x = self.prepare_input(x, self.param_dtype(params))
        return {i + 1: categorical for i, categorical in self._cluster_trunk(params, x).items()}


@dataclass
class GMDGMOutput:
    latents: LatentState
    reconstruction: Tensor
    posteriors: Dict[int, CategoricalParams]


class GaussianMixtureDGM(ClusteringLadder):
    """DGM de mistura gaussiana com uma única camada z."""

    def __init__(self, config: ModelConfig):
        if config.L != 1:
            raise ShapeError(f"GM-DGM tem uma camada, configuração tem {config.L}")
        super().__init__(config)

    def forward(
        self, params: Params, x, noise: LatentNoise, temperature: float = 1.0, straight_through: bool = False
    ) -> GMDGMOutput:
        params = as_tensors(params)
        state = self.encode(params, x, noise, temperature, straight_through)
        reconstruction = self.reconstruct(params, state)
        posteriors = {1: state.layers[0].categorical} if state.layers[0].categorical is not None else {}
        return GMDGMOutput(state, reconstruction, posteriors)


def build_model(config: ModelConfig) -> VariationalLadder:
    if config.kind == "vlae":
        return VariationalLadder(config)
    if config.kind == GM_DGM:
        return GaussianMixtureDGM(config)
    return ClusteringLadder(config)
