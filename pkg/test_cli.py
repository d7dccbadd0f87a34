#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes da linha de comando: precedência de configuração, códigos de saída e
o fluxo synth → train → eval → generate num diretório temporário.
"""

import io
import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from autodiff import stop_gradient
from cli import EXIT_OK, EXIT_USAGE, RunConfig, build_parser, main, resolve_layer
from cli.commands import FACTORS_FILE, PREVIEW_FILE, SELFCHECK_FILE, SWEEP_FILE, SWEEP_SUMMARY_FILE
from cli.config import CONFIG_ECHO
from cli.selfcheck import SelfCheck, run_selfcheck
from data import load_raw
from evaluation import MANY_TO_ONE, MODES, LabelPair, brute_force_accuracy, evaluate_model, predict_clusters
from ladder import build_model, gm_dgm_config, ladder_config, load_checkpoint
from training import CHECKPOINT_DIR, EVALUATIONS_FILE, METRICS_FILE
from utils.errors import ConfigError

SMALL_RUN = {
    "shapes": 2,
    "thicknesses": 2,
    "hues": 2,
    "backgrounds": 2,
    "height": 8,
    "width": 8,
    "n": 48,
    "test_size": 8,
    "d_z": 2,
    "hidden": 8,
    "batch_size": 8,
    "steps": 4,
    "anneal_steps": 4,
    "log_every": 2,
    "eval_every": 2,
    "checkpoint_every": 0,
    "grid_rows": 3,
    "grid_columns": 4,
}


def _ppm_size(path):
    magic, size, maxval = path.read_bytes().split(b"\n", 3)[:3]
    assert magic == b"P6" and maxval == b"255"
    width, height = (int(v) for v in size.split())
    return width, height


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL_RUN), encoding="utf-8")
    return path


@pytest.fixture
def synth_dir(tmp_path, run_config):
    out = tmp_path / "data"
    assert main(["synth", "--config", str(run_config), "--out", str(out)]) == EXIT_OK
    return out


@pytest.fixture
def trained(tmp_path, run_config, synth_dir):
    out = tmp_path / "run"
    code = main(["train", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(out), "--seed", "1"])
    assert code == EXIT_OK
    return out


# ---------------------------------------------------------------- configuração

def test_config_precedence(run_config):
    config = RunConfig.load(
        run_config,
        {"steps": 11, "seed": None, "preset": "vlae"},
        environ={"VLAC_PRECISION": "f32"},
    )
    assert config.steps == 11
    assert config.seed == 0
    assert config.hidden == 8
    assert config.preset == "vlae"
    assert config.precision == "f32"
    assert config.learning_rate == 1e-3
    assert RunConfig.load(run_config, {"precision": "f64"}, environ={"VLAC_PRECISION": "f32"}).precision == "f64"


def test_config_rejects_unknown_and_malformed_values(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"stepz": 3}), encoding="utf-8")
    with pytest.raises(ConfigError, match="stepz"):
        RunConfig.load(path)
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.load(path)
    with pytest.raises(ConfigError):
        RunConfig({"steps": 2.5})
    with pytest.raises(ConfigError):
        RunConfig({"straight_through": "talvez"})
    assert RunConfig({"straight_through": "true"}).straight_through is True
    with pytest.raises(ConfigError):
        RunConfig({"seeds": "1,a"}).seed_list()


def test_echoed_config_reproduces_the_run(tmp_path, run_config):
    config = RunConfig.load(run_config, {"seed": 4})
    path = config.echo(tmp_path)
    echoed = RunConfig.load(path)
    assert echoed.to_dict() == config.to_dict()


def test_layer_resolution():
    config = RunConfig()
    desk = build_model(ladder_config([1, 4, 4, 1], x_dim=6, d_z=2, hidden=4))
    assert resolve_layer(config, desk) == 3
    assert resolve_layer(RunConfig({"layer": 2}), desk) == 2
    assert resolve_layer(config, build_model(ladder_config([1, 3], x_dim=6, d_z=2, hidden=4))) == 2
    assert resolve_layer(config, build_model(gm_dgm_config(x_dim=6, K=3, d_z=2, hidden=4))) == 1
    with pytest.raises(ConfigError):
        resolve_layer(RunConfig({"layer": 5}), desk)


# ---------------------------------------------------------------- códigos de saída

@pytest.mark.parametrize("argv", [[], ["treinar"], ["train", "--bogus"], ["train", "--steps", "muitos"]])
def test_usage_errors_exit_with_one(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_invalid_values_exit_with_one(tmp_path):
    assert main(["synth", "--n", "0", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["train", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["eval", "--out", str(tmp_path / "vazio")]) == EXIT_USAGE
    assert main(["selfcheck", "--suite", "nenhuma", "--out", str(tmp_path)]) == EXIT_USAGE


def test_parser_keeps_flags_optional():
    args = build_parser().parse_args(["generate", "--mode", "marginal", "--layer", "2"])
    assert args.command == "generate"
    assert (args.mode, args.layer, args.steps, args.resume) == ("marginal", 2, None, None)


# ---------------------------------------------------------------- synth

def test_synth_writes_dataset_preview_and_config(synth_dir, tmp_path, run_config):
    dataset = load_raw(synth_dir)
    assert dataset.n == 48 and dataset.image_shape == (8, 8, 3)
    assert _ppm_size(synth_dir / PREVIEW_FILE) == (8 * 9 + 1, 8 * 9 + 1)
    echoed = json.loads((synth_dir / CONFIG_ECHO).read_text(encoding="utf-8"))
    assert echoed["n"] == 48 and echoed["height"] == 8

    again = tmp_path / "data2"
    assert main(["synth", "--config", str(run_config), "--out", str(again)]) == EXIT_OK
    assert (again / "dataset.bin").read_bytes() == (synth_dir / "dataset.bin").read_bytes()
    assert (again / PREVIEW_FILE).read_bytes() == (synth_dir / PREVIEW_FILE).read_bytes()


# ---------------------------------------------------------------- train / eval / generate

def test_train_writes_metrics_checkpoint_and_factors(trained):
    metrics = pd.read_csv(trained / METRICS_FILE)
    assert list(metrics["step"]) == [1, 2, 3, 4]
    assert {"total", "reconstruction", "kl_z_1", "kl_y_4", "tau", "wall_ms"} <= set(metrics.columns)
    checkpoint = load_checkpoint(trained / CHECKPOINT_DIR)
    assert checkpoint.step == 4
    assert checkpoint.config.K == (1, 4, 4, 1)
    assert checkpoint.meta["image_shape"] == [8, 8, 3]
    evaluations = pd.read_csv(trained / EVALUATIONS_FILE)
    assert sorted(set(evaluations["step"])) == [2, 4]
    factors = pd.read_csv(trained / FACTORS_FILE, index_col="layer")
    assert list(factors.index) == [2, 3]


def test_train_with_zero_steps(tmp_path, run_config, synth_dir):
    out = tmp_path / "zero"
    assert main(["train", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(out), "--steps", "0"]) == EXIT_OK
    assert pd.read_csv(out / METRICS_FILE).empty
    assert not (out / CHECKPOINT_DIR).exists()


def test_resume_continues_from_the_checkpoint(tmp_path, run_config, synth_dir):
    straight = tmp_path / "straight"
    split = tmp_path / "split"
    common = ["--config", str(run_config), "--dataset", str(synth_dir)]
    assert main(["train", *common, "--out", str(straight), "--steps", "6"]) == EXIT_OK
    assert main(["train", *common, "--out", str(split), "--steps", "3"]) == EXIT_OK
    assert main(["train", *common, "--out", str(split), "--steps", "6", "--resume"]) == EXIT_OK

    a = load_checkpoint(straight / CHECKPOINT_DIR)
    b = load_checkpoint(split / CHECKPOINT_DIR)
    assert a.step == b.step == 6
    for name, array in a.params.items():
        np.testing.assert_array_equal(array, b.params[name])
    # o log de métricas é anexado na retomada
    assert list(pd.read_csv(split / METRICS_FILE)["step"]) == [1, 2, 3, 4, 5, 6]


def test_eval_reports_both_modes(trained, run_config, synth_dir):
    assert main(["eval", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(trained)]) == EXIT_OK
    text = (trained / "report_layer3.txt").read_text(encoding="utf-8")
    assert "injective" in text and "many-to-one" in text
    assert "# contingency shape" in text


def test_eval_of_a_single_component_layer_fails(trained, run_config, synth_dir):
    args = ["eval", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(trained)]
    assert main(args + ["--layer", "1"]) == EXIT_USAGE
    assert main(args + ["--layer", "9"]) == EXIT_USAGE


def test_eval_matches_the_exhaustive_oracle(trained, run_config, synth_dir):
    assert main(["eval", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(trained)]) == EXIT_OK
    checkpoint = load_checkpoint(trained / CHECKPOINT_DIR)
    model = build_model(checkpoint.config)
    _, test_set = load_raw(synth_dir).split(8)
    predictions = predict_clusters(model, checkpoint.params, test_set, 3)

    text = (trained / "report_layer3.txt").read_text(encoding="utf-8")
    section = text.split("# accuracy\n", 1)[1].split("\n#", 1)[0]
    table = pd.read_csv(io.StringIO(section))
    assert len(table) == 2 * len(test_set.channels)
    for j, channel in enumerate(test_set.channels):
        pairs = LabelPair(predictions, test_set.labels[:, j], K=4, T=channel.cardinality)
        for mode in MODES:
            row = table[(table["channel"] == channel.name) & (table["mode"] == mode)]
            assert row["layer"].item() == 3
            assert row["accuracy"].item() == pytest.approx(brute_force_accuracy(pairs, mode).accuracy, abs=1e-12)


def test_conditional_grid_has_one_column_per_component(trained, run_config):
    assert main(["generate", "--config", str(run_config), "--out", str(trained), "--mode", "conditional"]) == EXIT_OK
    path = trained / "conditional_layer3.ppm"
    # K_3 = 4 colunas, grid_rows = 3 linhas de imagens 8×8
    assert _ppm_size(path) == (4 * 9 + 1, 3 * 9 + 1)
    first = path.read_bytes()
    assert main(["generate", "--config", str(run_config), "--out", str(trained), "--mode", "conditional"]) == EXIT_OK
    assert path.read_bytes() == first

    assert main(["generate", "--config", str(run_config), "--out", str(trained), "--layer", "1"]) == EXIT_USAGE


def test_marginal_grid_from_real_images(trained, run_config, synth_dir):
    args = ["generate", "--config", str(run_config), "--out", str(trained), "--mode", "marginal", "--layer", "2"]
    assert main(args + ["--dataset", str(synth_dir)]) == EXIT_OK
    # coluna de reconstrução + grid_columns reamostragens
    assert _ppm_size(trained / "marginal_layer2.ppm") == (5 * 9 + 1, 3 * 9 + 1)
    assert main(["generate", "--out", str(trained), "--mode", "sideways"]) == EXIT_USAGE


def test_generate_without_checkpoint_fails(tmp_path):
    assert main(["generate", "--out", str(tmp_path / "vazio")]) == EXIT_USAGE


# ---------------------------------------------------------------- sweep

def test_sweep_summarises_seeds(tmp_path, run_config, synth_dir):
    out = tmp_path / "sweep"
    args = ["sweep", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(out), "--seeds", "0,1", "--steps", "2"]
    assert main(args) == EXIT_OK
    table = pd.read_csv(out / SWEEP_FILE, index_col="seed")
    assert list(table.index) == [0, 1]
    summary = pd.read_csv(out / SWEEP_SUMMARY_FILE, index_col="metric")
    assert "shape/many-to-one" in summary.index
    assert (summary["runs"] == 2).all()
    assert (out / "seed_1" / CHECKPOINT_DIR / "manifest.txt").exists()


def test_sweep_without_mixture_layer_is_a_usage_error(tmp_path, run_config, synth_dir):
    out = tmp_path / "vlae"
    args = ["sweep", "--config", str(run_config), "--dataset", str(synth_dir), "--out", str(out), "--preset", "vlae", "--seeds", "0"]
    assert main(args) == EXIT_USAGE


# ---------------------------------------------------------------- selfcheck

def test_selfcheck_suite_from_the_command_line(tmp_path):
    assert main(["selfcheck", "--suite", "assignment", "--suite", "vlae_reduction", "--out", str(tmp_path)]) == EXIT_OK
    table = pd.read_csv(tmp_path / SELFCHECK_FILE)
    assert set(table["suite"]) == {"assignment", "vlae_reduction"}
    assert table["passed"].all()


def test_selfcheck_names_a_broken_operation():
    def broken_cases(rng):
        point = rng.normal(size=4)
        return {"square_broken": (lambda x: (stop_gradient(x) * x).sum(), point)}

    messages = []
    report = run_selfcheck(broken_cases, seeds=[0, 1], suites=["gradients"], log_callback=messages.append)
    assert not report.passed
    assert [failure.name for failure in report.failures()] == ["square_broken"]
    assert any("square_broken" in message for message in messages)


def test_selfcheck_rejects_unknown_suites():
    with pytest.raises(ConfigError):
        SelfCheck().run(["gradients", "velocidade"])


@pytest.mark.slow
def test_full_selfcheck_passes(tmp_path):
    assert main(["selfcheck", "--out", str(tmp_path)]) == EXIT_OK


@pytest.mark.slow
def test_desk_scale_clustering(tmp_path):
    """Escada K=[1,4,4,1] separa as formas melhor que o GM-DGM com K=16."""
    config = tmp_path / "desk.json"
    config.write_text(
        json.dumps({"shapes": 4, "hues": 4, "n": 8000, "test_size": 1000, "steps": 5000, "eval_every": 0}),
        encoding="utf-8",
    )
    data = tmp_path / "data"
    assert main(["synth", "--config", str(config), "--out", str(data)]) == EXIT_OK

    scores = {}
    for preset, extra in (("vlac-desk", {}), ("gm-dgm", {"gm_components": 16})):
        run = tmp_path / preset
        preset_config_path = tmp_path / f"{preset}.json"
        preset_config_path.write_text(json.dumps({**json.loads(config.read_text()), **extra}), encoding="utf-8")
        argv = ["train", "--config", str(preset_config_path), "--dataset", str(data), "--out", str(run), "--preset", preset]
        assert main(argv) == EXIT_OK
        assert main(["eval", "--config", str(preset_config_path), "--dataset", str(data), "--out", str(run)]) == EXIT_OK
        checkpoint = load_checkpoint(run / CHECKPOINT_DIR)
        _, test_set = load_raw(data).split(1000)
        layer = 1 if preset == "gm-dgm" else 3
        report = evaluate_model(build_model(checkpoint.config), checkpoint.params, test_set, layer)
        scores[preset] = report.accuracy("shape", MANY_TO_ONE)

    assert scores["vlac-desk"] >= 0.7
    assert scores["gm-dgm"] < scores["vlac-desk"]
