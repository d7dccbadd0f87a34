#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
CLI Package

Ponto de entrada da linha de comando: synth, train, eval, generate, sweep e
selfcheck. Códigos de saída: 0 sucesso, 1 erro de uso/configuração,
2 falha de execução ou numérica.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Dict, List, Optional

from utils.errors import ConfigError, VLACError
from utils.logger import get_logger, setup_logger

from .commands import cmd_eval, cmd_generate, cmd_selfcheck, cmd_synth, cmd_sweep, cmd_train, resolve_layer
from .config import DOCUMENTED_KEYS, RunConfig
from .selfcheck import SelfCheck

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

# flag → chave do RunConfig
FLAG_KEYS = ("seed", "out", "preset", "layer", "mode", "steps", "dataset", "checkpoint", "n", "seeds")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser que sinaliza erros de uso com código 1 em vez de 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="arquivo JSON com chaves do RunConfig")
    common.add_argument("--seed", type=int, help=DOCUMENTED_KEYS["seed"].help)
    common.add_argument("--out", help=DOCUMENTED_KEYS["out"].help)
    common.add_argument("--preset", help=DOCUMENTED_KEYS["preset"].help)
    common.add_argument("--layer", type=int, help=DOCUMENTED_KEYS["layer"].help)
    common.add_argument("--mode", help=DOCUMENTED_KEYS["mode"].help)
    common.add_argument("--steps", type=int, help=DOCUMENTED_KEYS["steps"].help)
    common.add_argument("--dataset", help=DOCUMENTED_KEYS["dataset"].help)
    common.add_argument("--checkpoint", help=DOCUMENTED_KEYS["checkpoint"].help)
    common.add_argument("--n", type=int, help=DOCUMENTED_KEYS["n"].help)
    common.add_argument("--seeds", help=DOCUMENTED_KEYS["seeds"].help)
    common.add_argument("--resume", action="store_true", default=None, help=DOCUMENTED_KEYS["resume"].help)
    common.add_argument("--verbose", "-v", action="store_true", help="logs em nível DEBUG")

    parser = _Parser(prog="vlac", description="Ladder variacional com clusterização em cada camada")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subparsers.add_parser("synth", parents=[common], help="gera o dataset sintético de fatores")
    subparsers.add_parser("train", parents=[common], help="treina um preset")
    subparsers.add_parser("eval", parents=[common], help="avalia a acurácia de clusterização de uma camada")
    subparsers.add_parser("generate", parents=[common], help="grade PPM condicional ou marginal")
    subparsers.add_parser("sweep", parents=[common], help="treina várias sementes e resume as acurácias")
    selfcheck = subparsers.add_parser("selfcheck", parents=[common], help="verificações numéricas")
    selfcheck.add_argument("--suite", action="append", dest="suites", help="restringe a uma suíte (repetível)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    values = {key: getattr(args, key, None) for key in FLAG_KEYS}
    values["resume"] = args.resume
    return values


def main(argv: Optional[List[str]] = None) -> int:
    """
    Executa um comando e devolve o código de saída.

    Args:
        argv: Argumentos (padrão: sys.argv[1:])
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logger(logging.DEBUG if args.verbose else logging.INFO)
    logger = get_logger("cli")
    try:
        config = RunConfig.load(args.config, _overrides(args))
        if args.command == "synth":
            cmd_synth(config)
        elif args.command == "train":
            cmd_train(config)
        elif args.command == "eval":
            cmd_eval(config)
        elif args.command == "generate":
            cmd_generate(config)
        elif args.command == "sweep":
            cmd_sweep(config)
        elif args.command == "selfcheck":
            report = cmd_selfcheck(config, args.suites)
            if not report.passed:
                for failure in report.failures():
                    logger.error(f"Falhou: {failure.suite}/{failure.name} ({failure.value:.3g} > {failure.bound:.3g}) {failure.detail}")
                return EXIT_RUNTIME
            logger.info(f"Todas as {len(report.results)} verificações passaram em {report.elapsed_s:.1f}s")
    except ConfigError as e:
        logger.error(f"Configuração inválida: {e}")
        return EXIT_USAGE
    except VLACError as e:
        logger.error(f"Falha em '{args.command}': {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrompido pelo usuário")
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"Erro inesperado em '{args.command}': {e}")
        return EXIT_RUNTIME
    return EXIT_OK


__all__ = [
    "EXIT_OK",
    "EXIT_RUNTIME",
    "EXIT_USAGE",
    "RunConfig",
    "SelfCheck",
    "build_parser",
    "cmd_eval",
    "cmd_generate",
    "cmd_selfcheck",
    "cmd_synth",
    "cmd_sweep",
    "cmd_train",
    "main",
    "resolve_layer",
]
