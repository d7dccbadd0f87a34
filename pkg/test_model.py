#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes da escada: inicialização, encoder/decoder, redução ao VLAE, GM-DGM,
protocolos de geração e checkpoints.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from autodiff import Tensor, gradcheck
from cli.selfcheck import SelfCheck
from ladder import (
    GM_DGM,
    PRESETS,
    CategoricalParams,
    Checkpoint,
    ClusteringLadder,
    GaussianMixtureDGM,
    LatentNoise,
    ParameterStore,
    VariationalLadder,
    build_model,
    conditional_grid,
    generate_conditional,
    gm_dgm_config,
    ladder_config,
    load_checkpoint,
    marginal_grid,
    preset_config,
    sample_prior_latents,
    save_checkpoint,
)
from ladder.config import GM_DGM_MATCHED_LAYER, LayerSpec, ModelConfig
from utils.errors import CheckpointError, ConfigError, NonFiniteError, ShapeError


# ---------------------------------------------------------------- configuração

def test_presets_hold_the_published_k_vectors():
    assert PRESETS["vlac-kone"] == (1, 1, 50, 1)
    assert PRESETS["vlac-ktwo"] == (1, 5, 50, 1)
    assert PRESETS["vlae"] == (1, 1, 1, 1)
    config = preset_config("vlac-ktwo", x_dim=12)
    assert config.L == 4 and config.K == (1, 5, 50, 1)
    assert config.mixture_layers == (2, 3)


def test_gm_dgm_preset_is_single_layer_and_deeper():
    config = preset_config(GM_DGM, x_dim=12, gm_components=16)
    assert config.kind == GM_DGM and config.L == 1 and config.K == (16,)
    assert config.layers[0].depth == GM_DGM_MATCHED_LAYER
    assert isinstance(build_model(config), GaussianMixtureDGM)


def test_invalid_configurations():
    with pytest.raises(ConfigError):
        preset_config("vlac-huge", x_dim=4)
    with pytest.raises(ConfigError):
        LayerSpec(K=0)
    with pytest.raises(ConfigError):
        ladder_config([1, 2], x_dim=4, kind="vlae")
    with pytest.raises(ConfigError):
        ModelConfig(layers=(LayerSpec(), LayerSpec()), x_dim=4, kind=GM_DGM)
    with pytest.raises(ConfigError):
        ladder_config([1, 2], x_dim=4).layer(3)


def test_model_config_dict_round_trip():
    config = ladder_config([1, 3, 2], x_dim=10, d_z=3, hidden=7, sigma_x=0.3, seed=5)
    assert ModelConfig.from_dict(config.to_dict()) == config


# ---------------------------------------------------------------- parâmetros

def test_init_is_deterministic_and_seed_dependent(tiny_vlac):
    a, b = tiny_vlac.init_params(), tiny_vlac.init_params()
    c = tiny_vlac.init_params(seed=1)
    assert list(a) == list(b)
    for name, array in a.items():
        np.testing.assert_array_equal(array, b[name])
    assert any(not np.array_equal(array, c[name]) for name, array in a.items())


def test_init_depends_on_names_not_on_creation_order():
    vlae = build_model(ladder_config([1, 1], x_dim=6, d_z=2, hidden=5, kind="vlae"))
    vlac = build_model(ladder_config([1, 2], x_dim=6, d_z=2, hidden=5))
    shared = vlae.init_params()
    extended = vlac.init_params()
    np.testing.assert_array_equal(shared["enc.g1.0.W"], extended["enc.g1.0.W"])
    np.testing.assert_array_equal(shared["dec.f0.0.W"], extended["dec.f0.0.W"])
    assert "prior.2.means" in extended and "enc.pi2.0.W" in extended
    assert "prior.1.means" not in extended


def test_parameter_store_guards():
    store = ParameterStore({"w": np.zeros(3)})
    with pytest.raises(KeyError):
        store.add("w", np.ones(3))
    with pytest.raises(ValueError):
        store.update({"w": np.zeros(4)})
    with pytest.raises(NonFiniteError):
        store.update({"w": np.array([0.0, np.inf, 0.0])})
    snapshot = store.snapshot()
    with pytest.raises(RuntimeError):
        snapshot.update({"w": np.ones(3)})
    store.update({"w": np.ones(3)})
    np.testing.assert_array_equal(snapshot["w"], np.zeros(3))


# ---------------------------------------------------------------- encoder/decoder

def test_encode_and_reconstruct_shapes(tiny_vlac, rng):
    params = tiny_vlac.init_params()
    x = rng.uniform(size=(4, 6))
    state = tiny_vlac.encode(params, x, LatentNoise.draw(tiny_vlac.config, 4, rng), temperature=0.5)
    assert [z.shape for z in state.latents] == [(4, 2), (4, 2)]
    for layer in state.layers:
        assert layer.categorical.K == 2
        np.testing.assert_allclose(layer.y_input.value.sum(axis=-1), np.ones(4))
    x_mean = tiny_vlac.reconstruct(params, state)
    assert x_mean.shape == (4, 6)
    assert ((x_mean.value > 0) & (x_mean.value < 1)).all()
    assert len(state.z_tilde) == 2


def test_forced_components_enter_as_one_hot(tiny_vlac, rng):
    params = tiny_vlac.init_params()
    forced = [np.array([1, 0, 1]), np.array([0, 0, 1])]
    state = tiny_vlac.encode(params, rng.uniform(size=(3, 6)), LatentNoise.draw(tiny_vlac.config, 3, rng), forced=forced)
    np.testing.assert_array_equal(state.layers[0].y_input.value, [[0, 1], [1, 0], [0, 1]])
    assert state.layers[1].y is None


def test_noise_and_input_shapes_are_checked(tiny_vlac, rng):
    params = tiny_vlac.init_params()
    noise = LatentNoise.draw(tiny_vlac.config, 3, rng)
    with pytest.raises(ShapeError):
        tiny_vlac.encode(params, rng.uniform(size=(2, 6)), noise)
    with pytest.raises(ShapeError):
        tiny_vlac.encode(params, rng.uniform(size=(3, 5)), noise)
    with pytest.raises(ShapeError):
        tiny_vlac.encode(params, rng.uniform(size=(3, 6)), LatentNoise(noise.gaussian, [None, None]))


def test_decode_requires_every_latent(tiny_vlac, rng):
    params = tiny_vlac.init_params()
    with pytest.raises(ShapeError):
        tiny_vlac.decode(params, [rng.normal(size=(2, 2))])
    with pytest.raises(ShapeError):
        tiny_vlac.decode(params, [rng.normal(size=(2, 2)), None])
    with pytest.raises(ShapeError):
        tiny_vlac.decode(params, [rng.normal(size=(2, 2)), rng.normal(size=(2, 3))])


def test_classify_returns_mixture_layers_only(image_vlac, tiny_dataset):
    params = image_vlac.init_params()
    posteriors = image_vlac.classify(params, tiny_dataset.flat(np.arange(5)))
    assert sorted(posteriors) == [2, 3]
    np.testing.assert_allclose(posteriors[3].probs.value.sum(axis=-1), np.ones(5))
    assert posteriors[3].argmax().shape == (5,)


def test_cluster_posterior_ignores_the_sampled_components(rng):
    model = build_model(ladder_config([2, 2, 2], x_dim=6, d_z=2, hidden=5, sigma_x=0.5, seed=0))
    params = model.init_params()
    x = rng.uniform(size=(1, 6))
    gaussian = [rng.standard_normal((1, 2)) for _ in range(3)]
    shared = [rng.random((1, 2)) for _ in range(2)]
    first = LatentNoise(gaussian, [np.array([[0.999, 0.001]])] + shared)
    second = LatentNoise(gaussian, [np.array([[0.001, 0.999]])] + shared)
    a = model.encode(params, x, first, temperature=0.5)
    b = model.encode(params, x, second, temperature=0.5)
    # o y amostrado na camada 1 muda, q(y_3|x) não
    assert not np.allclose(a.layers[0].y_input.value, b.layers[0].y_input.value)
    posteriors = model.classify(params, x)
    for i in range(3):
        np.testing.assert_array_equal(a.layers[i].categorical.logits.value, b.layers[i].categorical.logits.value)
        np.testing.assert_array_equal(a.layers[i].categorical.logits.value, posteriors[i + 1].logits.value)
    forced = model.encode(params, x, first, forced=[np.array([1]), np.array([0]), None])
    np.testing.assert_array_equal(forced.layers[2].categorical.logits.value, posteriors[3].logits.value)


def test_classify_argmax_survives_uniform_logit_shifts(image_vlac, tiny_dataset):
    params = image_vlac.init_params()
    x = tiny_dataset.flat(np.arange(12))
    before = image_vlac.classify(params, x)
    shifted = dict(params.constants())
    shifted["enc.pi2.1.b"] = Tensor(params["enc.pi2.1.b"] + 3.5)
    after = image_vlac.classify(shifted, x)
    np.testing.assert_allclose(after[2].logits.value, before[2].logits.value + 3.5)
    for layer in (2, 3):
        np.testing.assert_array_equal(after[layer].argmax(), before[layer].argmax())
        np.testing.assert_allclose(after[layer].probs.value, before[layer].probs.value, atol=1e-12)
    logits = before[3].logits.value
    assert (CategoricalParams(Tensor(logits - 7.0)).argmax() == before[3].argmax()).all()


def test_latents_are_differentiable_in_the_encoder_weights(tiny_vlac, rng):
    store = tiny_vlac.init_params()
    base = store.constants()
    x = rng.uniform(size=(3, 6))
    noise = LatentNoise.draw(tiny_vlac.config, 3, rng)
    for name in ("enc.g1.0.W", "enc.g2.0.W", "enc.mu2.0.W", "enc.sigma1.0.W", "enc.pi2.0.W"):
        weights = rng.normal(size=(3, 2))

        def total_latent(value, name=name, weights=weights):
            params = dict(base)
            params[name] = value
            state = tiny_vlac.encode(params, x, noise, temperature=0.7)
            total = None
            for z in state.latents:
                term = (z * weights).sum()
                total = term if total is None else total + term
            return total

        report = gradcheck(total_latent, np.array(store[name]))
        assert report.passed, (name, report.failures[:3])


def test_decode_is_differentiable_in_latents_and_weights(tiny_vlac, rng):
    store = tiny_vlac.init_params()
    base = store.constants()
    latents = [rng.normal(size=(2, 2)), rng.normal(size=(2, 2))]
    weights = rng.normal(size=(2, 6))

    def in_latent(value):
        return (tiny_vlac.decode(base, [value, Tensor(latents[1])]) * weights).sum()

    def in_weight(value):
        params = dict(base)
        params["dec.f2.0.W"] = value
        return (tiny_vlac.decode(params, latents) * weights).sum()

    for fn, point in ((in_latent, latents[0]), (in_weight, np.array(store["dec.f2.0.W"]))):
        report = gradcheck(fn, point)
        assert report.passed, report.failures[:3]


def test_decode_is_pure(tiny_vlac, rng):
    params = tiny_vlac.init_params()
    latents = [rng.normal(size=(4, 2)), rng.normal(size=(4, 2))]
    copies = [z.copy() for z in latents]
    first = tiny_vlac.decode(params, latents).value
    second = tiny_vlac.decode(params, latents).value
    np.testing.assert_array_equal(first, second)
    for z, copy in zip(latents, copies):
        np.testing.assert_array_equal(z, copy)


def test_prior_log_prob_factorises_over_layers(rng):
    model = build_model(ladder_config([1, 3, 2], x_dim=6, d_z=2, hidden=5, sigma_x=0.5, seed=2))
    prior = model.prior(model.init_params())
    latents = [rng.normal(size=(5, 2)) for _ in range(3)]
    components = [None, rng.integers(0, 3, 5), rng.integers(0, 2, 5)]
    per_layer, joint = prior.log_prob(latents, components)
    assert [value.shape for value in per_layer] == [(5,)] * 3
    total = per_layer[0].value + per_layer[1].value + per_layer[2].value
    np.testing.assert_allclose(total, joint.value, rtol=1e-12, atol=1e-12)
    # a componente escolhida importa
    other = [None, (components[1] + 1) % 3, components[2]]
    assert not np.allclose(prior.log_prob(latents, other)[0][1].value, per_layer[1].value)


def test_prior_log_prob_requires_mixture_components(rng):
    model = build_model(ladder_config([1, 3, 2], x_dim=6, d_z=2, hidden=5, seed=2))
    prior = model.prior(model.init_params())
    latents = [rng.normal(size=(2, 2)) for _ in range(3)]
    with pytest.raises(ValueError):
        prior.log_prob(latents, [None, None, np.array([0, 1])])
    with pytest.raises(ShapeError):
        prior.log_prob(latents[:2], [None, np.array([0, 1])])


def test_vlae_has_no_categorical_machinery(rng):
    model = build_model(ladder_config([1, 1], x_dim=6, d_z=2, hidden=5, kind="vlae"))
    assert type(model) is VariationalLadder
    params = model.init_params()
    assert model.classify(params, rng.uniform(size=(2, 6))) == {}
    assert not any(name.startswith(("prior.", "enc.pi")) for name in params)


def test_all_single_component_vlac_reduces_to_vlae():
    results = SelfCheck().check_vlae_reduction()
    assert all(result.passed for result in results), [r.detail for r in results]


def test_gm_dgm_forward_exposes_the_posterior(rng):
    model = build_model(gm_dgm_config(x_dim=6, K=3, d_z=2, hidden=5))
    params = model.init_params()
    out = model.forward(params, rng.uniform(size=(4, 6)), LatentNoise.draw(model.config, 4, rng))
    assert out.reconstruction.shape == (4, 6)
    assert out.posteriors[1].K == 3
    with pytest.raises((ShapeError, ConfigError)):
        GaussianMixtureDGM(ladder_config([2, 2], x_dim=6))


# ---------------------------------------------------------------- geração

def test_conditional_grid_has_one_column_per_component(image_vlac, tiny_spec):
    params = image_vlac.init_params()
    grid = conditional_grid(image_vlac, params, 3, rows=4, rng=np.random.default_rng(1))
    assert grid.shape == (4, 3, tiny_spec.x_dim)
    again = conditional_grid(image_vlac, params, 3, rows=4, rng=np.random.default_rng(1))
    np.testing.assert_array_equal(grid, again)


def test_conditional_generation_needs_a_mixture_layer(image_vlac, rng):
    params = image_vlac.init_params()
    with pytest.raises(ConfigError):
        conditional_grid(image_vlac, params, 1, rows=2, rng=rng)
    fixed = sample_prior_latents(image_vlac, params, 2, rng)
    with pytest.raises(ValueError):
        generate_conditional(image_vlac, params, 2, 2, fixed, rng.standard_normal((2, 2)))


def test_marginal_grid_keeps_reconstruction_in_first_column(image_vlac, tiny_spec, rng):
    params = image_vlac.init_params()
    base = sample_prior_latents(image_vlac, params, 3, rng)
    grid = marginal_grid(image_vlac, params, 2, base, columns=5, rng=rng)
    assert grid.shape == (3, 6, tiny_spec.x_dim)
    np.testing.assert_array_equal(grid[:, 0], image_vlac.decode(params, base).value)
    # camada com K=1: o marginal é N(0, I) e ainda funciona
    assert marginal_grid(image_vlac, params, 1, base, columns=2, rng=rng).shape == (3, 3, tiny_spec.x_dim)


# ---------------------------------------------------------------- checkpoints

def test_checkpoint_round_trip_is_bit_exact(tmp_path, tiny_vlac):
    params = tiny_vlac.init_params()
    slots = {"adam.m": params.astype(np.float64), "adam.v": params.astype(np.float64)}
    checkpoint = Checkpoint(tiny_vlac.config, params, 17, slots, {"batch_size": 8}, {"image_shape": [2, 1, 3]})
    save_checkpoint(tmp_path / "ckpt", checkpoint)
    loaded = load_checkpoint(tmp_path / "ckpt")
    assert loaded.config == tiny_vlac.config
    assert loaded.step == 17
    assert loaded.train == {"batch_size": 8}
    assert loaded.meta == {"image_shape": [2, 1, 3]}
    assert list(loaded.params) == list(params)
    for name, array in params.items():
        assert loaded.params[name].dtype == array.dtype
        np.testing.assert_array_equal(loaded.params[name], array)
    assert sorted(loaded.slots) == ["adam.m", "adam.v"]


def test_checkpoint_keeps_single_precision(tmp_path, tiny_vlac):
    params = tiny_vlac.init_params().astype(np.float32)
    save_checkpoint(tmp_path, Checkpoint(tiny_vlac.config, params))
    loaded = load_checkpoint(tmp_path)
    assert loaded.precision == "f32"
    assert all(array.dtype == np.float32 for _, array in loaded.params.items())


def test_corrupt_checkpoints_are_rejected(tmp_path, tiny_vlac):
    directory = save_checkpoint(tmp_path / "ok", Checkpoint(tiny_vlac.config, tiny_vlac.init_params()))
    blob = (directory / "params.bin").read_bytes()
    (directory / "params.bin").write_bytes(blob[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(directory)

    manifest = directory / "manifest.txt"
    manifest.write_text("# outro formato\n", encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_checkpoint(directory)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "inexistente")


def test_model_kinds_are_built_from_config():
    assert isinstance(build_model(ladder_config([1, 2], x_dim=4)), ClusteringLadder)
    assert type(build_model(ladder_config([1, 1], x_dim=4, kind="vlae"))) is VariationalLadder
