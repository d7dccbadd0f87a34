#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Async Processor - Execução concorrente

- BatchPrefetcher: produz lotes numa thread separada e os entrega por uma
  fila limitada, na mesma ordem do iterador síncrono.
- SeedSweep: roda jobs independentes (um por semente) num pool de threads,
  coleta os resultados conforme terminam e permite cancelamento.
"""

import queue
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional

import pandas as pd

from utils.logger import get_logger
from .observer import Subject

_DONE = object()


class BatchPrefetcher:
    """
    Iterador com pré-busca em thread de fundo.

    Args:
        source: Iterável de lotes (consumido somente pela thread produtora)
        depth: Capacidade da fila
    """

    def __init__(self, source: Iterable[Any], depth: int = 2):
        if depth < 1:
            raise ValueError(f"depth deve ser >= 1, recebeu {depth}")
        self._source = source
        self._queue: "queue.Queue[Any]" = queue.Queue(maxsize=depth)
        self._stop = threading.Event()
        self._error: Optional[BaseException] = None
        self._thread = threading.Thread(target=self._produce, name="batch-prefetch", daemon=True)
        self._thread.start()

    def _put(self, item: Any) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _produce(self) -> None:
        try:
            for item in self._source:
                if not self._put(item):
                    return
        except BaseException as e:
            self._error = e
        self._put(_DONE)

    def __iter__(self) -> Iterator[Any]:
        while True:
            item = self._queue.get()
            if item is _DONE:
                if self._error is not None:
                    raise self._error
                return
            yield item

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=1.0)

    def __enter__(self) -> "BatchPrefetcher":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


@dataclass
class SweepResult:
    results: Dict[int, Dict[str, float]] = field(default_factory=dict)
    errors: Dict[int, str] = field(default_factory=dict)
    cancelled: bool = False

    def table(self) -> pd.DataFrame:
        """Uma linha por semente, ordenadas."""
        frame = pd.DataFrame.from_dict(self.results, orient="index")
        frame.index.name = "seed"
        return frame.sort_index()

    def summary(self) -> pd.DataFrame:
        """Média e desvio padrão (amostral) de cada métrica sobre as sementes."""
        table = self.table()
        if table.empty:
            return pd.DataFrame(columns=["mean", "std", "runs"])
        return pd.DataFrame({"mean": table.mean(), "std": table.std(ddof=1).fillna(0.0), "runs": table.count()})


class SeedSweep(Subject):
    """
    Executa o mesmo job para várias sementes em paralelo.

    Cada job deve possuir seu próprio grafo e ParameterStore.
    """

    def __init__(self, max_workers: int = 2, log_callback: Optional[Callable] = None):
        super().__init__()
        self.max_workers = max_workers
        self.log_callback = log_callback
        self.logger = get_logger(__name__) if log_callback is None else None
        self._lock = threading.Lock()
        self._active: Dict[int, Future] = {}
        self._cancelled = False

    def _log(self, message: str, level: str = 'info'):
        """Registra uma mensagem de log."""
        if self.log_callback:
            self.log_callback(message)
        elif self.logger:
            getattr(self.logger, level)(message)

    def run(self, seeds: List[int], job: Callable[[int], Dict[str, float]]) -> SweepResult:
        """
        Args:
            seeds: Sementes a executar
            job: Função semente → métricas

        Returns:
            SweepResult com métricas por semente e erros
        """
        result = SweepResult()
        if not seeds:
            return result
        self._cancelled = False
        self._log(f"Iniciando varredura de {len(seeds)} sementes com {self.max_workers} threads")
        self.notify('sweep_start', {'seeds': list(seeds)})

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {}
            with self._lock:
                for seed in seeds:
                    future = executor.submit(self._run_one, job, seed)
                    futures[future] = seed
                    self._active[seed] = future

            completed = 0
            for future in as_completed(futures):
                seed = futures[future]
                completed += 1
                if future.cancelled():
                    result.cancelled = True
                    continue
                try:
                    metrics, elapsed = future.result()
                    result.results[seed] = metrics
                    self._log(f"✓ Semente {seed} concluída em {elapsed:.1f}s")
                except Exception as e:
                    result.errors[seed] = f"{type(e).__name__}: {e}"
                    self._log(f"✗ Semente {seed}: {e}", 'error')
                self.notify('progress', {'completed': completed, 'total': len(seeds), 'seed': seed})
                with self._lock:
                    self._active.pop(seed, None)

        result.cancelled = result.cancelled or self._cancelled
        self.notify('sweep_complete', {'successful': len(result.results), 'failed': len(result.errors)})
        return result

    def _run_one(self, job: Callable[[int], Dict[str, float]], seed: int):
        if self._cancelled:
            raise RuntimeError("varredura cancelada")
        start = time.time()
        return job(seed), time.time() - start

    def cancel(self) -> int:
        """Cancela jobs ainda não iniciados; retorna quantos foram cancelados."""
        with self._lock:
            self._cancelled = True
            cancelled = sum(1 for future in self._active.values() if future.cancel())
        self._log(f"Jobs cancelados: {cancelled}", 'warning')
        return cancelled
