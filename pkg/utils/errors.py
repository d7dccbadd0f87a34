#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Hierarquia de exceções do projeto.

O código de biblioteca lança estas exceções; somente a camada de linha de
comando as captura, registra com contexto e converte em código de saída.
"""

from __future__ import annotations


class VLACError(Exception):
    """Erro base de todo o projeto."""

    exit_code = 2


class ShapeError(VLACError, ValueError):
    """Formas de tensores incompatíveis."""


class GraphError(VLACError, RuntimeError):
    """Uso inválido do grafo de diferenciação (fita consumida, perda não escalar)."""


class NonFiniteError(VLACError, FloatingPointError):
    """Valor NaN/Inf detectado.

    Args:
        name: Nome da operação, termo do ELBO ou parâmetro onde o problema surgiu
    """

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        message = f"valor não finito em '{name}'"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ConfigError(VLACError, ValueError):
    """Configuração inválida (chave desconhecida, valor fora do domínio)."""

    exit_code = 1


class GuardExceededError(VLACError, ValueError):
    """Limite de enumeração excedido em um oráculo exaustivo."""


class CheckpointError(VLACError):
    """Manifesto ou blob de checkpoint inconsistente."""


class DatasetFormatError(VLACError):
    """Arquivo de dataset malformado.

    Args:
        path: Caminho do arquivo
        offset: Posição em bytes onde a leitura falhou
    """

    def __init__(self, path: str, offset: int, detail: str):
        self.path = path
        self.offset = offset
        super().__init__(f"{path}: byte {offset}: {detail}")
