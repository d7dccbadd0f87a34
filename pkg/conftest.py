#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuração comum dos testes: raiz no sys.path, marcador slow e fixtures
de modelos e datasets pequenos.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from data import FactorSpec, synth_generate
from ladder import build_model, ladder_config


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="executa também os testes lentos")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: treinos longos, executados apenas com --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="use --runslow para executar")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tiny_spec():
    return FactorSpec(shapes=2, thicknesses=2, hues=2, backgrounds=2, height=8, width=8, channels=3, jitter=1)


@pytest.fixture
def tiny_dataset(tiny_spec):
    return synth_generate(tiny_spec, 48, seed=3)


@pytest.fixture
def tiny_vlac():
    """L=2, K=[2,2], d_z=2."""
    return build_model(ladder_config([2, 2], x_dim=6, d_z=2, hidden=5, sigma_x=0.5, seed=0))


@pytest.fixture
def image_vlac(tiny_spec):
    return build_model(ladder_config([1, 2, 3], x_dim=tiny_spec.x_dim, d_z=2, hidden=8, sigma_x=0.2, seed=0))
