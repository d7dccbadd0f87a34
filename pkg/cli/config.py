#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
RunConfig - Configuração plana de uma execução

Precedência: padrões < arquivo JSON (--config) < ambiente (VLAC_PRECISION)
< flags da linha de comando. Chaves desconhecidas são rejeitadas e a
configuração efetiva é gravada em <out>/config.json.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from data import FactorSpec
from ladder import ModelConfig, preset_config
from training import TrainConfig
from utils.errors import ConfigError
from utils.logger import get_logger

CONFIG_ECHO = "config.json"
DEFAULT_LAYER = 3

logger = get_logger(__name__)


@dataclass(frozen=True)
class Key:
    default: Any
    kind: type
    help: str
    optional: bool = False


DOCUMENTED_KEYS: Dict[str, Key] = {
    # execução
    "seed": Key(0, int, "semente da inicialização, do ruído e da ordem dos lotes"),
    "out": Key("runs/latest", str, "diretório de saída"),
    "dataset": Key(None, str, "diretório com dataset.bin", optional=True),
    "checkpoint": Key(None, str, "diretório de checkpoint (padrão: <out>/checkpoint)", optional=True),
    "resume": Key(False, bool, "retoma o treino do checkpoint em <out>"),
    "n": Key(10000, int, "número de imagens sintéticas"),
    "test_size": Key(1000, int, "exemplos finais reservados para avaliação"),
    "layer": Key(None, int, "camada avaliada/gerada, a partir de 1 (padrão: camada 3 ou a única do GM-DGM)", optional=True),
    "mode": Key("conditional", str, "protocolo de geração: conditional ou marginal"),
    "grid_rows": Key(8, int, "linhas da grade gerada"),
    "grid_columns": Key(8, int, "reamostragens por linha no protocolo marginal"),
    "seeds": Key("0,1,2", str, "sementes da varredura, separadas por vírgula"),
    "sweep_workers": Key(2, int, "threads da varredura"),
    # modelo
    "preset": Key("vlac-desk", str, "vlac-kone, vlac-ktwo, vlac-desk, gm-dgm ou vlae"),
    "d_z": Key(4, int, "largura de cada camada latente"),
    "hidden": Key(64, int, "largura das redes f e g"),
    "sigma_x": Key(0.1, float, "desvio fixo da verossimilhança"),
    "gm_components": Key(50, int, "componentes do GM-DGM"),
    # treino
    "batch_size": Key(64, int, "tamanho do lote"),
    "steps": Key(5000, int, "passos de otimização"),
    "learning_rate": Key(1e-3, float, "passo do Adam"),
    "beta1": Key(0.9, float, "decaimento do primeiro momento"),
    "beta2": Key(0.999, float, "decaimento do segundo momento"),
    "epsilon": Key(1e-8, float, "estabilizador do Adam"),
    "tau_start": Key(1.0, float, "temperatura inicial"),
    "tau_end": Key(0.5, float, "temperatura final"),
    "anneal_steps": Key(None, int, "passos de recozimento (padrão: steps/2)", optional=True),
    "precision": Key("f64", str, "f32 ou f64 (também via VLAC_PRECISION)"),
    "straight_through": Key(False, bool, "y one-hot no forward"),
    "log_every": Key(100, int, "intervalo dos logs de progresso"),
    "eval_every": Key(500, int, "intervalo das avaliações (0 desliga)"),
    "checkpoint_every": Key(1000, int, "intervalo dos checkpoints (0 desliga)"),
    # fatores sintéticos
    "shapes": Key(4, int, "cardinalidade do fator forma"),
    "thicknesses": Key(2, int, "cardinalidade do fator espessura"),
    "hues": Key(4, int, "cardinalidade do fator cor"),
    "backgrounds": Key(2, int, "cardinalidade do fator fundo"),
    "height": Key(16, int, "altura da imagem"),
    "width": Key(16, int, "largura da imagem"),
    "channels": Key(3, int, "canais da imagem"),
    "jitter": Key(1, int, "deslocamento máximo do glifo"),
}


def _coerce(name: str, value: Any) -> Any:
    key = DOCUMENTED_KEYS[name]
    if value is None:
        if key.optional:
            return None
        raise ConfigError(f"'{name}' não aceita null")
    if key.kind is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "1", "yes", "false", "0", "no"):
            return value.lower() in ("true", "1", "yes")
        raise ConfigError(f"'{name}' deve ser booleano, recebeu {value!r}")
    if key.kind is int:
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ConfigError(f"'{name}' deve ser inteiro, recebeu {value!r}")
    try:
        return key.kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{name}' inválido: {value!r}") from e


class RunConfig:
    """Mapa validado chave → valor com acesso por atributo."""

    def __init__(self, values: Optional[Mapping[str, Any]] = None):
        self._values = {name: key.default for name, key in DOCUMENTED_KEYS.items()}
        self.update(values or {})

    def update(self, values: Mapping[str, Any]) -> None:
        unknown = sorted(set(values) - set(DOCUMENTED_KEYS))
        if unknown:
            raise ConfigError(f"chaves desconhecidas: {', '.join(unknown)}")
        for name, value in values.items():
            self._values[name] = _coerce(name, value)

    def __getattr__(self, name: str) -> Any:
        values = self.__dict__.get("_values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self._values)

    @classmethod
    def load(
        cls,
        path: Optional[str | Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "RunConfig":
        """
        Monta a configuração efetiva.

        Args:
            path: Arquivo JSON com um objeto plano
            overrides: Valores vindos das flags (None é ignorado)
            environ: Ambiente (padrão: os.environ)
        """
        config = cls()
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
            except OSError as e:
                raise ConfigError(f"não foi possível ler {path}: {e}") from e
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: JSON inválido ({e})") from e
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: esperado um objeto JSON plano")
            config.update(data)
        environ = os.environ if environ is None else environ
        if environ.get("VLAC_PRECISION"):
            config.update({"precision": environ["VLAC_PRECISION"]})
        config.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return config

    def seed_list(self) -> List[int]:
        try:
            return [int(s) for s in self.seeds.split(",") if s.strip()]
        except ValueError as e:
            raise ConfigError(f"sementes inválidas: {self.seeds!r}") from e

    def model_config(self, x_dim: int, seed: Optional[int] = None) -> ModelConfig:
        return preset_config(
            self.preset,
            x_dim,
            d_z=self.d_z,
            hidden=self.hidden,
            sigma_x=self.sigma_x,
            seed=self.seed if seed is None else seed,
            gm_components=self.gm_components,
        )

    def train_config(self, seed: Optional[int] = None) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            steps=self.steps,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            tau_start=self.tau_start,
            tau_end=self.tau_end,
            anneal_steps=self.anneal_steps,
            seed=self.seed if seed is None else seed,
            precision=self.precision,
            straight_through=self.straight_through,
            log_every=self.log_every,
            eval_every=self.eval_every,
            checkpoint_every=self.checkpoint_every,
        )

    def factor_spec(self) -> FactorSpec:
        return FactorSpec(
            shapes=self.shapes,
            thicknesses=self.thicknesses,
            hues=self.hues,
            backgrounds=self.backgrounds,
            height=self.height,
            width=self.width,
            channels=self.channels,
            jitter=self.jitter,
        )

    def echo(self, out_dir: str | Path) -> Path:
        """Grava a configuração efetiva em <out>/config.json."""
        path = Path(out_dir) / CONFIG_ECHO
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(self.to_dict(), f, indent=2, ensure_ascii=False, sort_keys=True)
        except OSError as e:
            raise ConfigError(f"não foi possível gravar {path}: {e}") from e
        logger.debug(f"Configuração gravada em {path}")
        return path
