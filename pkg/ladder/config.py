#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuração da arquitetura: larguras latentes, número de componentes por
camada e os presets de vetores K.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Sequence, Tuple

from utils.errors import ConfigError

K_ONE = (1, 1, 50, 1)
K_TWO = (1, 5, 50, 1)
K_DESK = (1, 4, 4, 1)
K_VLAE = (1, 1, 1, 1)

PRESETS: Dict[str, Tuple[int, ...]] = {
    "vlac-kone": K_ONE,
    "vlac-ktwo": K_TWO,
    "vlac-desk": K_DESK,
    "vlae": K_VLAE,
}
GM_DGM = "gm-dgm"
MODEL_KINDS = ("vlac", "vlae", GM_DGM)

# camada cujos sub-redes o GM-DGM reproduz
GM_DGM_MATCHED_LAYER = 3


@dataclass(frozen=True)
class LayerSpec:
    """Largura d^z_ℓ, número de componentes K_ℓ e largura das redes f_ℓ, g_ℓ."""

    d_z: int = 4
    K: int = 1
    hidden: int = 64
    depth: int = 1

    def __post_init__(self):
        if self.d_z < 1:
            raise ConfigError(f"d_z deve ser >= 1, recebeu {self.d_z}")
        if self.K < 1:
            raise ConfigError(f"K deve ser >= 1, recebeu {self.K}")
        if self.hidden < 1 or self.depth < 1:
            raise ConfigError(f"hidden e depth devem ser >= 1 ({self.hidden}, {self.depth})")

    @property
    def is_mixture(self) -> bool:
        return self.K > 1


@dataclass(frozen=True)
class ModelConfig:
    layers: Tuple[LayerSpec, ...]
    x_dim: int
    sigma_x: float = 0.1
    seed: int = 0
    kind: str = "vlac"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ConfigError("o modelo precisa de ao menos uma camada")
        if self.x_dim < 1:
            raise ConfigError(f"x_dim deve ser >= 1, recebeu {self.x_dim}")
        if not self.sigma_x > 0:
            raise ConfigError(f"sigma_x deve ser positivo, recebeu {self.sigma_x}")
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"tipo de modelo desconhecido: {self.kind}")
        if self.kind == "vlae" and any(spec.K > 1 for spec in self.layers):
            raise ConfigError("VLAE não admite camadas com K > 1")
        if self.kind == GM_DGM and len(self.layers) != 1:
            raise ConfigError("GM-DGM tem exatamente uma camada")

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def K(self) -> Tuple[int, ...]:
        return tuple(spec.K for spec in self.layers)

    @property
    def mixture_layers(self) -> Tuple[int, ...]:
        """Índices (a partir de 1) das camadas com K_ℓ > 1."""
        return tuple(i + 1 for i, spec in enumerate(self.layers) if spec.K > 1)

    def layer(self, index: int) -> LayerSpec:
        """Camada ℓ, contando a partir de 1."""
        if not 1 <= index <= self.L:
            raise ConfigError(f"camada {index} fora de 1..{self.L}")
        return self.layers[index - 1]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["layers"] = [asdict(spec) for spec in self.layers]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        data = dict(data)
        data["layers"] = tuple(LayerSpec(**spec) for spec in data["layers"])
        return cls(**data)


def ladder_config(
    K: Sequence[int],
    x_dim: int,
    d_z: int = 4,
    hidden: int = 64,
    sigma_x: float = 0.1,
    seed: int = 0,
    kind: str = "vlac",
) -> ModelConfig:
    layers = tuple(LayerSpec(d_z=d_z, K=int(k), hidden=hidden) for k in K)
    return ModelConfig(layers=layers, x_dim=x_dim, sigma_x=sigma_x, seed=seed, kind=kind)


def gm_dgm_config(
    x_dim: int,
    K: int = 50,
    d_z: int = 4,
    hidden: int = 64,
    sigma_x: float = 0.1,
    seed: int = 0,
    matched_layer: int = GM_DGM_MATCHED_LAYER,
) -> ModelConfig:
    """
    GM-DGM de uma camada cujo encoder/decoder empilha tantos blocos quanto as
    sub-redes necessárias para chegar à camada `matched_layer` da escada.
    """
    spec = LayerSpec(d_z=d_z, K=K, hidden=hidden, depth=matched_layer)
    return ModelConfig(layers=(spec,), x_dim=x_dim, sigma_x=sigma_x, seed=seed, kind=GM_DGM)


def preset_config(
    name: str,
    x_dim: int,
    d_z: int = 4,
    hidden: int = 64,
    sigma_x: float = 0.1,
    seed: int = 0,
    gm_components: int = 50,
) -> ModelConfig:
    if name == GM_DGM:
        return gm_dgm_config(x_dim, K=gm_components, d_z=d_z, hidden=hidden, sigma_x=sigma_x, seed=seed)
    if name not in PRESETS:
        raise ConfigError(f"preset desconhecido: {name} (disponíveis: {', '.join(sorted(PRESETS) + [GM_DGM])})")
    kind = "vlae" if name == "vlae" else "vlac"
    return ladder_config(PRESETS[name], x_dim, d_z=d_z, hidden=hidden, sigma_x=sigma_x, seed=seed, kind=kind)
