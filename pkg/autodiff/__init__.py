#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Autodiff Package

Motor mínimo de tensores densos com diferenciação reversa, suficiente para
as redes da escada e para o ELBO.

Módulos disponíveis:
- tensor: Tensor, Graph e as operações diferenciáveis
- gradcheck: Verificação por diferenças finitas
"""

from .gradcheck import GradcheckReport, gradcheck
from .tensor import (
    ELEMENTWISE_OPS,
    LOG_2PI,
    GradientMap,
    Graph,
    Tensor,
    concat,
    elementwise,
    log_softmax,
    matmul,
    one_hot,
    reduce,
    reshape,
    resolve_precision,
    softmax,
    stop_gradient,
)

__all__ = [
    "ELEMENTWISE_OPS",
    "LOG_2PI",
    "GradcheckReport",
    "GradientMap",
    "Graph",
    "Tensor",
    "concat",
    "elementwise",
    "gradcheck",
    "log_softmax",
    "matmul",
    "one_hot",
    "reduce",
    "reshape",
    "resolve_precision",
    "softmax",
    "stop_gradient",
]
