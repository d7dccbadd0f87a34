"""Validação de caminhos de entrada e saída."""

import os
from pathlib import Path
from typing import Union

from utils.errors import ConfigError

PathLike = Union[str, Path]


class PathValidator:
    """Verificações estáticas usadas pelos comandos antes de ler ou gravar."""

    @staticmethod
    def ensure_output_dir(dir_path: PathLike) -> Path:
        """Cria (se preciso) e valida um diretório de saída gravável.

        Raises:
            ConfigError: caminho é um arquivo, não pode ser criado ou não é gravável
        """
        if not dir_path:
            raise ConfigError("diretório de saída não informado")
        path = Path(dir_path)
        if path.exists() and not path.is_dir():
            raise ConfigError(f"{path} existe e não é um diretório")
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"não foi possível criar {path}: {e}") from e
        if not os.access(path, os.W_OK):
            raise ConfigError(f"sem permissão de escrita em {path}")
        return path

    @staticmethod
    def require_dir(dir_path: PathLike, what: str = "diretório") -> Path:
        """Garante que um diretório de entrada existe."""
        path = Path(dir_path) if dir_path else None
        if path is None or not path.is_dir():
            raise ConfigError(f"{what} inexistente: {dir_path}")
        return path
