#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes das distribuições: KL em forma fechada, CONCRETE e priors de mistura.
"""

import math
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from autodiff import Graph, Tensor
from cli.selfcheck import SelfCheck
from ladder import (
    CategoricalParams,
    DiagGaussian,
    MixtureLayer,
    concrete_sample,
    gaussian_log_prob,
    gaussian_rsample,
    kl_categorical_uniform,
    kl_gaussian_gaussian,
    mixture_marginal_sample,
)
from ladder.distributions import RAW_UNIT_STD, STD_FLOOR, positive_std
from utils.errors import ShapeError

means = arrays(np.float64, 3, elements=st.floats(-5, 5))
stddevs = arrays(np.float64, 3, elements=st.floats(0.05, 5))


@settings(max_examples=60, deadline=None)
@given(means, stddevs, means, stddevs)
def test_gaussian_kl_is_non_negative(mq, sq, mp, sp):
    kl = kl_gaussian_gaussian(DiagGaussian(Tensor(mq), Tensor(sq)), DiagGaussian(Tensor(mp), Tensor(sp)))
    assert kl.item() >= -1e-12


@settings(max_examples=60, deadline=None)
@given(means, stddevs)
def test_gaussian_kl_with_itself_is_zero(m, s):
    q = DiagGaussian(Tensor(m), Tensor(s))
    assert abs(kl_gaussian_gaussian(q, q).item()) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(-20, 20)))
def test_categorical_kl_is_bounded_by_log_k(logits):
    kl = kl_categorical_uniform(CategoricalParams(Tensor(logits))).item()
    assert -1e-12 <= kl <= math.log(logits.size) + 1e-9


def test_categorical_kl_of_uniform_is_zero():
    assert abs(kl_categorical_uniform(CategoricalParams(Tensor(np.zeros(5)))).item()) < 1e-15


def test_gaussian_kl_known_value():
    # KL(N(1, 2) || N(0, 1)) = log(1/2) + (4 + 1)/2 − 1/2
    q = DiagGaussian(Tensor(np.array([1.0])), Tensor(np.array([2.0])))
    expected = math.log(0.5) + 2.5 - 0.5
    assert kl_gaussian_gaussian(q, DiagGaussian.standard(1)).item() == pytest.approx(expected, abs=1e-12)


def test_gaussian_log_prob_matches_density():
    d = DiagGaussian(Tensor(np.array([0.5, -1.0])), Tensor(np.array([1.5, 0.3])))
    x = np.array([0.0, -0.8])
    density = np.prod(np.exp(-0.5 * ((x - [0.5, -1.0]) / [1.5, 0.3]) ** 2) / (np.sqrt(2 * np.pi) * np.array([1.5, 0.3])))
    assert gaussian_log_prob(d, Tensor(x)).item() == pytest.approx(np.log(density), abs=1e-12)


def test_reparameterised_sample_mean(rng):
    mean, stddev = np.array([0.3, -1.2, 2.0]), np.array([0.5, 1.5, 0.1])
    d = DiagGaussian(Tensor(mean), Tensor(stddev))
    samples = gaussian_rsample(d, rng.standard_normal((100_000, 3))).value
    assert samples.shape == (100_000, 3)
    standard_error = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    assert (np.abs(samples.mean(axis=0) - mean) <= 4.0 * standard_error).all()
    np.testing.assert_allclose(samples.std(axis=0), stddev, rtol=0.02)


def test_kl_shape_mismatch():
    with pytest.raises(ShapeError):
        kl_gaussian_gaussian(DiagGaussian.standard(3), DiagGaussian.standard(2))


def test_positive_std_has_floor_and_unit_point():
    assert positive_std(Tensor(np.array([-1000.0]))).item() >= STD_FLOOR
    assert positive_std(Tensor(np.array([RAW_UNIT_STD]))).item() == pytest.approx(1.0 + STD_FLOOR, abs=1e-12)


def test_divergence_suite_passes():
    results = SelfCheck().check_divergences(parameterisations=3)
    assert all(result.passed for result in results), [r for r in results if not r.passed]


def test_concrete_suite_passes():
    results = SelfCheck().check_concrete()
    assert len(results) == 12
    assert all(result.passed for result in results), [r for r in results if not r.passed]


def test_concrete_sample_lies_on_simplex(rng):
    logits = Tensor(rng.normal(size=(5, 4)))
    sample = concrete_sample(logits, 0.5, rng.random((5, 4)))
    np.testing.assert_allclose(sample.relaxed.value.sum(axis=-1), np.ones(5))
    assert (sample.hard.sum(axis=-1) == 1).all()
    np.testing.assert_array_equal(sample.hard.argmax(axis=-1), sample.relaxed.value.argmax(axis=-1))


def test_hard_sample_ignores_temperature(rng):
    logits = Tensor(rng.normal(size=(50, 3)))
    noise = rng.random((50, 3))
    hot = concrete_sample(logits, 5.0, noise).hard
    cold = concrete_sample(logits, 0.1, noise).hard
    np.testing.assert_array_equal(hot, cold)


def test_straight_through_forward_is_one_hot_and_backward_is_relaxed(rng):
    graph = Graph()
    logits = graph.parameter(rng.normal(size=(2, 3)), "logits")
    noise = rng.random((2, 3))
    sample = concrete_sample(logits, 0.5, noise)
    st_value = sample.straight_through()
    np.testing.assert_allclose(st_value.value, sample.hard, atol=1e-12)
    weights = rng.normal(size=(2, 3))
    st_grad = graph.backward((st_value * weights).sum()).by_name()["logits"]

    graph = Graph()
    logits = graph.parameter(logits.value, "logits")
    relaxed = concrete_sample(logits, 0.5, noise).relaxed
    relaxed_grad = graph.backward((relaxed * weights).sum()).by_name()["logits"]
    np.testing.assert_allclose(st_grad, relaxed_grad, atol=1e-12)


def test_concrete_rejects_bad_temperature_and_noise_shape():
    with pytest.raises(ValueError):
        concrete_sample(Tensor(np.zeros((1, 3))), 0.0, np.full((1, 3), 0.5))
    with pytest.raises(ShapeError):
        concrete_sample(Tensor(np.zeros((1, 3))), 1.0, np.full((1, 2), 0.5))


def test_mixture_component_and_mix_agree_on_one_hot():
    layer = MixtureLayer(2, Tensor(np.array([[0.0, 1.0], [2.0, -1.0], [5.0, 5.0]])), Tensor(np.full((3, 2), RAW_UNIT_STD)))
    by_index = layer.component(np.array([2, 0]))
    np.testing.assert_allclose(by_index.mean.value, [[5.0, 5.0], [0.0, 1.0]])
    np.testing.assert_allclose(by_index.stddev.value, np.full((2, 2), 1.0 + STD_FLOOR))
    with pytest.raises(ValueError):
        layer.component(np.array([3]))


def test_single_component_layer_is_standard_normal():
    layer = MixtureLayer(3)
    assert layer.K == 1 and not layer.is_mixture
    gaussian = layer.component(np.zeros(4, dtype=np.int64))
    np.testing.assert_array_equal(gaussian.mean.value, np.zeros(3))
    np.testing.assert_array_equal(gaussian.stddev.value, np.ones(3))


def test_mixture_marginal_sample_picks_components_uniformly(rng):
    layer = MixtureLayer(1, Tensor(np.array([[-10.0], [0.0], [10.0], [20.0]])), Tensor(np.full((4, 1), -8.0)))
    u = rng.random(40_000)
    z, components = mixture_marginal_sample(layer, u, rng.standard_normal((40_000, 1)))
    counts = np.bincount(components, minlength=4) / 40_000
    np.testing.assert_allclose(counts, 0.25, atol=0.01)
    np.testing.assert_allclose(z.value[:, 0], layer.means.value[components, 0], atol=0.01)
    # u → 1 continua dentro de 0..K−1
    _, edge = mixture_marginal_sample(layer, np.array([0.0, 0.999999999]), np.zeros((2, 1)))
    np.testing.assert_array_equal(edge, [0, 3])
