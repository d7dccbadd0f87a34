#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
VLAC - Main Application Entry Point

Ladder variacional com clusterização: geração do dataset sintético, treino,
avaliação, amostragem e verificações numéricas pela linha de comando.

Uso: python main.py <synth|train|eval|generate|sweep|selfcheck> [opções]
"""

import sys
import os

# Adiciona o diretório raiz ao path para importações
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli import main

if __name__ == "__main__":
    sys.exit(main())
