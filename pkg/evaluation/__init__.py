#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Evaluation Package

Acurácia de clusterização (atribuição ótima e oráculo exaustivo) e relatórios
por camada.
"""

from .accuracy import (
    INJECTIVE,
    MANY_TO_ONE,
    MODES,
    AssignmentResult,
    LabelPair,
    brute_force_accuracy,
    cluster_accuracy,
    contingency_table,
)
from .report import (
    ModelReport,
    evaluate_model,
    format_report,
    layer_factor_matrix,
    predict_clusters,
    write_report,
)

__all__ = [
    "INJECTIVE",
    "MANY_TO_ONE",
    "MODES",
    "AssignmentResult",
    "LabelPair",
    "ModelReport",
    "brute_force_accuracy",
    "cluster_accuracy",
    "contingency_table",
    "evaluate_model",
    "format_report",
    "layer_factor_matrix",
    "predict_clusters",
    "write_report",
]
