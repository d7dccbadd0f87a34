#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
SelfCheck - Suítes de verificação numérica

Executa, com sementes fixas:
- gradcheck de cada operação do motor e do −ELBO completo;
- KL em forma fechada contra estimativas de Monte Carlo;
- frequências do argmax da CONCRETE contra softmax(logits);
- atribuição ótima contra o oráculo exaustivo;
- identidade VLAC com todos os K = 1 contra o VLAE;
- média do ELBO estocástico (straight-through) contra o ELBO exato.

Cada verificação vira uma linha do relatório; qualquer falha reprova o conjunto.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from autodiff import Tensor, concat, elementwise, gradcheck, log_softmax, matmul, reshape, softmax
from evaluation import MODES, LabelPair, brute_force_accuracy, cluster_accuracy
from ladder import (
    CategoricalParams,
    DiagGaussian,
    LatentNoise,
    VariationalLadder,
    build_model,
    concrete_sample,
    gaussian_log_prob,
    kl_categorical_uniform,
    kl_gaussian_gaussian,
    ladder_config,
)
from training import elbo, exact_elbo_per_example
from utils.errors import ConfigError
from utils.logger import get_logger

# (função escalar, ponto de avaliação)
GradCase = Tuple[Callable[[Tensor], Tensor], np.ndarray]
CaseFactory = Callable[[np.random.Generator], Dict[str, GradCase]]

GRAD_SEEDS = tuple(range(10))
MC_SAMPLES = 100_000
MC_SIGMAS = 3.0
CONCRETE_TEMPERATURES = (0.1, 0.5, 1.0)
ORACLE_INSTANCES = 200
ESTIMATOR_DRAWS = 10_000


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float = 0.0
    bound: float = 0.0
    detail: str = ""


@dataclass
class SelfCheckReport:
    results: List[CheckResult] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    def failures(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]

    def table(self) -> pd.DataFrame:
        return pd.DataFrame(
            [vars(result) for result in self.results],
            columns=["suite", "name", "passed", "value", "bound", "detail"],
        )

    def summary(self) -> pd.DataFrame:
        table = self.table()
        return table.groupby("suite", sort=False)["passed"].agg(["sum", "count"]).rename(
            columns={"sum": "passed", "count": "checks"}
        )


def _tiny_model(K: Sequence[int], kind: str = "vlac", seed: int = 0) -> VariationalLadder:
    return build_model(ladder_config(K, x_dim=6, d_z=2, hidden=5, sigma_x=0.5, seed=seed, kind=kind))


def _weighted(fn: Callable[[Tensor], Tensor], weights: np.ndarray) -> Callable[[Tensor], Tensor]:
    """Projeção escalar Σ w ⊙ fn(x), para que todas as coordenadas do gradiente importem."""
    return lambda x: (fn(x) * weights).sum()


def default_cases(rng: np.random.Generator) -> Dict[str, GradCase]:
    """Uma função escalar por operação, com pontos longe de dobras (relu, max) e de log(0)."""
    shape = (3, 4)
    w = rng.normal(size=shape)
    normal = rng.normal(size=shape)
    positive = rng.uniform(0.5, 2.0, size=shape)
    away_from_zero = np.sign(normal) * rng.uniform(0.2, 1.5, size=shape)
    other = rng.normal(size=shape)
    row = rng.uniform(0.5, 2.0, size=shape[1])

    cases: Dict[str, GradCase] = {}
    for kind in ("exp", "tanh", "sigmoid", "softplus", "square", "negate"):
        cases[kind] = (_weighted(lambda x, k=kind: elementwise(k, x), w), normal)
    cases["log"] = (_weighted(lambda x: elementwise("log", x), w), positive)
    cases["relu"] = (_weighted(lambda x: elementwise("relu", x), w), away_from_zero)
    for kind in ("add", "sub", "mul", "div"):
        cases[kind] = (_weighted(lambda x, k=kind: elementwise(k, x, row), w), normal)
        # segundo operando com broadcast pelas linhas
        cases[f"{kind}/rhs"] = (_weighted(lambda b, k=kind: elementwise(k, other, b), w), row)

    right = rng.normal(size=(4, 2))
    left = rng.normal(size=(2, 3))
    w_out = rng.normal(size=(3, 2))
    cases["matmul"] = (_weighted(lambda x: matmul(x, right), w_out), normal)
    cases["matmul/rhs"] = (_weighted(lambda b: matmul(left, b), rng.normal(size=(2, 4))), normal)

    w_rows = rng.normal(size=shape[0])
    cases["sum"] = (_weighted(lambda x: x.sum(axis=1), w_rows), normal)
    cases["mean"] = (_weighted(lambda x: x.mean(axis=1), w_rows), normal)
    # máximo único por linha
    distinct = normal + np.arange(shape[1]) * 0.5
    cases["max"] = (_weighted(lambda x: x.max(axis=1), w_rows), distinct)
    w_cat = rng.normal(size=(3, 7))
    cases["concat"] = (_weighted(lambda x: concat([x, other[:, :3]], axis=1), w_cat), normal)
    cases["reshape"] = (_weighted(lambda x: reshape(x, (2, 6)), w.reshape(2, 6)), normal)
    cases["log_softmax"] = (_weighted(lambda x: log_softmax(x, axis=-1), w), normal)
    cases["softmax"] = (_weighted(lambda x: softmax(x, axis=-1), w), normal)
    cases.update(neg_elbo_cases(rng))
    return cases


def neg_elbo_cases(rng: np.random.Generator) -> Dict[str, GradCase]:
    """−ELBO de um modelo pequeno (L=2, K=[2,2]) em função de alguns blocos de parâmetros."""
    model = _tiny_model([2, 2], seed=int(rng.integers(1 << 31)))
    store = model.init_params()
    base = store.constants()
    x = rng.uniform(size=(3, model.config.x_dim))
    noise = LatentNoise.draw(model.config, 3, rng)
    names = [name for name, _ in store.items() if name.endswith(".0.W") or name.startswith("prior.")]

    def case(name: str) -> GradCase:
        def neg_elbo(value: Tensor) -> Tensor:
            params = dict(base)
            params[name] = value
            return -elbo(model, params, x, noise, temperature=0.7).total

        return neg_elbo, np.array(store[name])

    return {f"neg_elbo[{name}]": case(name) for name in names}


class SelfCheck:
    """
    Executa as suítes e acumula um SelfCheckReport.

    Args:
        cases: Fábrica de casos de gradcheck (padrão: default_cases)
        seeds: Sementes do gradcheck
        log_callback: Função de callback para logs
    """

    def __init__(
        self,
        cases: Optional[CaseFactory] = None,
        seeds: Sequence[int] = GRAD_SEEDS,
        log_callback: Optional[Callable] = None,
    ):
        self.cases = cases or default_cases
        self.seeds = tuple(seeds)
        self.log_callback = log_callback
        self.logger = get_logger(__name__) if log_callback is None else None

    def _log(self, message: str, level: str = 'info'):
        """Registra uma mensagem de log."""
        if self.log_callback:
            self.log_callback(message)
        elif self.logger:
            getattr(self.logger, level)(message)

    def run(self, suites: Optional[Sequence[str]] = None) -> SelfCheckReport:
        available = {
            "gradients": self.check_gradients,
            "divergences": self.check_divergences,
            "concrete": self.check_concrete,
            "assignment": self.check_assignment,
            "vlae_reduction": self.check_vlae_reduction,
            "estimator": self.check_estimator,
        }
        unknown = sorted(set(suites or ()) - set(available))
        if unknown:
            raise ConfigError(f"suítes desconhecidas: {', '.join(unknown)}")
        report = SelfCheckReport()
        started = time.time()
        for suite in suites or list(available):
            results = available[suite]()
            report.results.extend(results)
            failed = [r for r in results if not r.passed]
            if failed:
                self._log(f"✗ {suite}: {len(failed)} de {len(results)} falharam ({', '.join(r.name for r in failed[:5])})", 'error')
            else:
                self._log(f"✓ {suite}: {len(results)} verificações")
        report.elapsed_s = time.time() - started
        return report

    def check_gradients(self) -> List[CheckResult]:
        """Pior erro relativo de cada operação sobre todas as sementes."""
        worst: Dict[str, Tuple[float, float, int]] = {}
        for seed in self.seeds:
            for name, (fn, point) in self.cases(np.random.default_rng(seed)).items():
                report = gradcheck(fn, point)
                previous = worst.get(name)
                if previous is None or report.max_relative_error > previous[0]:
                    worst[name] = (report.max_relative_error, report.tolerance, seed)
        return [
            CheckResult("gradients", name, error <= tol, error, tol, f"semente {seed}")
            for name, (error, tol, seed) in worst.items()
        ]

    def check_divergences(self, parameterisations: int = 10) -> List[CheckResult]:
        rng = np.random.default_rng(1234)
        results = []
        for i in range(parameterisations):
            d = 3
            q = DiagGaussian(Tensor(rng.normal(size=d)), Tensor(rng.uniform(0.5, 1.5, size=d)))
            p = DiagGaussian(Tensor(rng.normal(size=d)), Tensor(rng.uniform(0.5, 1.5, size=d)))
            z = q.mean.value + q.stddev.value * rng.standard_normal((MC_SAMPLES, d))
            ratio = (gaussian_log_prob(q, Tensor(z)) - gaussian_log_prob(p, Tensor(z))).value
            closed = float(kl_gaussian_gaussian(q, p).value)
            results.append(self._mc_result("divergences", f"kl_gaussian[{i}]", ratio, closed))

            self_kl = abs(float(kl_gaussian_gaussian(q, q).value))
            results.append(CheckResult("divergences", f"kl_gaussian_self[{i}]", self_kl <= 1e-12, self_kl, 1e-12))

            K = int(rng.integers(2, 7))
            categorical = CategoricalParams(Tensor(rng.normal(size=K) * 1.5))
            probs = categorical.probs.value
            draws = rng.choice(K, size=MC_SAMPLES, p=probs / probs.sum())
            ratio = categorical.log_probs.value[draws] + np.log(K)
            closed = float(kl_categorical_uniform(categorical).value)
            results.append(self._mc_result("divergences", f"kl_categorical[{i}]", ratio, closed))
        return results

    @staticmethod
    def _mc_result(suite: str, name: str, samples: np.ndarray, closed: float) -> CheckResult:
        estimate = float(samples.mean())
        bound = MC_SIGMAS * float(samples.std(ddof=1)) / np.sqrt(samples.size) + 1e-12
        gap = abs(estimate - closed)
        return CheckResult(suite, name, gap <= bound, gap, bound, f"MC {estimate:.5f} vs fechado {closed:.5f}")

    def check_concrete(self) -> List[CheckResult]:
        """Gumbel-max: a frequência do argmax não depende de τ."""
        rng = np.random.default_rng(4321)
        logits = np.array([1.0, -0.5, 0.3, 0.0])
        expected = softmax(Tensor(logits)).value
        results = []
        for tau in CONCRETE_TEMPERATURES:
            tiled = Tensor(np.tile(logits, (MC_SAMPLES, 1)))
            sample = concrete_sample(tiled, tau, rng.random(tiled.shape))
            frequency = sample.hard.mean(axis=0)
            for k, (observed, p) in enumerate(zip(frequency, expected)):
                bound = MC_SIGMAS * np.sqrt(p * (1.0 - p) / MC_SAMPLES)
                gap = abs(float(observed) - float(p))
                results.append(CheckResult("concrete", f"tau={tau}/k={k}", gap <= bound, gap, float(bound)))
        return results

    def check_assignment(self, instances: int = ORACLE_INSTANCES) -> List[CheckResult]:
        rng = np.random.default_rng(99)
        mismatches = {mode: 0 for mode in MODES}
        for _ in range(instances):
            T, K, n = int(rng.integers(1, 5)), int(rng.integers(1, 6)), int(rng.integers(1, 40))
            pairs = LabelPair(rng.integers(0, K, size=n), rng.integers(0, T, size=n), K=K, T=T)
            for mode in MODES:
                if cluster_accuracy(pairs, mode).accuracy != brute_force_accuracy(pairs, mode).accuracy:
                    mismatches[mode] += 1
        results = [
            CheckResult("assignment", f"oracle/{mode}", count == 0, float(count), 0.0, f"{instances} instâncias")
            for mode, count in mismatches.items()
        ]
        # contagens [[2,1],[1,2]]
        hand = LabelPair(np.array([0, 0, 1, 0, 1, 1]), np.array([0, 0, 0, 1, 1, 1]), K=2, T=2)
        accuracy = cluster_accuracy(hand, "injective").accuracy
        results.append(CheckResult("assignment", "hand_case", accuracy == 4 / 6, accuracy, 4 / 6))
        return results

    def check_vlae_reduction(self) -> List[CheckResult]:
        """VLAC com todos os K = 1 reproduz o ELBO do VLAE bit a bit."""
        results = []
        for seed in (0, 1, 2):
            clustering = _tiny_model([1, 1, 1], kind="vlac", seed=seed)
            plain = _tiny_model([1, 1, 1], kind="vlae", seed=seed)
            rng = np.random.default_rng(seed)
            x = rng.uniform(size=(4, plain.config.x_dim))
            noise = LatentNoise.draw(plain.config, 4, rng)
            a = elbo(clustering, clustering.init_params(), x, noise).total.item()
            b = elbo(plain, plain.init_params(), x, noise).total.item()
            results.append(CheckResult("vlae_reduction", f"seed={seed}", a == b, abs(a - b), 0.0, f"{a!r} vs {b!r}"))
        return results

    def check_estimator(self, draws: int = ESTIMATOR_DRAWS) -> List[CheckResult]:
        """Média de ELBOs straight-through (ruído gaussiano fixo) contra a marginalização exata."""
        model = _tiny_model([2, 2], seed=7)
        params = model.init_params()
        rng = np.random.default_rng(7)
        x = rng.uniform(size=(1, model.config.x_dim))
        gaussian = [rng.standard_normal((1, spec.d_z)) for spec in model.config.layers]
        exact = float(exact_elbo_per_example(model, params, x, gaussian).value[0])
        noise = LatentNoise(
            [np.repeat(g, draws, axis=0) for g in gaussian],
            [rng.random((draws, spec.K)) for spec in model.config.layers],
        )
        samples = elbo(model, params, np.repeat(x, draws, axis=0), noise, straight_through=True).per_example.value
        return [self._mc_result("estimator", "straight_through_vs_exact", samples, exact)]


def run_selfcheck(
    cases: Optional[CaseFactory] = None,
    seeds: Sequence[int] = GRAD_SEEDS,
    suites: Optional[Sequence[str]] = None,
    log_callback: Optional[Callable] = None,
) -> SelfCheckReport:
    return SelfCheck(cases, seeds, log_callback).run(suites)
