"""Padrão Observer para eventos de treino e de execução em lote."""

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional
import threading

from utils.logger import get_logger


class Observer(ABC):
    """Interface para observadores."""

    @abstractmethod
    def update(self, event_type: str, data: Dict[str, Any]) -> None:
        """Método chamado quando um evento é notificado.

        Args:
            event_type: Tipo do evento (ex: 'progress', 'evaluation', 'train_complete')
            data: Dados do evento
        """
        pass


class Subject:
    """Classe base para objetos observáveis."""

    def __init__(self):
        self._observers: List[Observer] = []
        self._observer_lock = threading.Lock()

    def attach(self, observer: Observer) -> None:
        """Adiciona um observador."""
        with self._observer_lock:
            if observer not in self._observers:
                self._observers.append(observer)

    def detach(self, observer: Observer) -> None:
        """Remove um observador."""
        with self._observer_lock:
            if observer in self._observers:
                self._observers.remove(observer)

    def notify(self, event_type: str, data: Optional[Dict[str, Any]] = None) -> None:
        """Notifica todos os observadores sobre um evento."""
        if data is None:
            data = {}

        with self._observer_lock:
            observers_copy = self._observers.copy()

        # Notificar fora do lock para evitar deadlocks
        for observer in observers_copy:
            try:
                observer.update(event_type, data)
            except Exception as e:
                # Um observador com falha não interrompe os demais
                get_logger(__name__).error(f"Erro ao notificar observador: {e}")


class TrainingLogObserver(Observer):
    """Converte eventos do treino em linhas de log (ou em chamadas de callback)."""

    def __init__(self, log_callback: Optional[Callable[[str], None]] = None):
        self.log_callback = log_callback
        self.logger = get_logger("training") if log_callback is None else None

    def _emit(self, message: str, level: str = "info") -> None:
        if self.log_callback:
            self.log_callback(message)
        else:
            getattr(self.logger, level)(message)

    def update(self, event_type: str, data: Dict[str, Any]) -> None:
        if event_type == "train_start":
            self._emit(f"Treino iniciado: {data.get('steps', 0)} passos a partir do passo {data.get('start_step', 0)}")
        elif event_type == "progress":
            memory = data.get("rss_mb")
            suffix = f" | mem {memory:.0f} MB" if memory is not None else ""
            self._emit(
                f"passo {data.get('step')}/{data.get('steps')} | ELBO {data.get('total', float('nan')):.3f} "
                f"| τ {data.get('tau', float('nan')):.3f} | {data.get('steps_per_s', 0.0):.1f} passos/s{suffix}"
            )
        elif event_type == "evaluation":
            scores = ", ".join(f"{name}={acc:.3f}" for name, acc in data.get("accuracy", {}).items())
            self._emit(f"Avaliação no passo {data.get('step')}: {scores}")
        elif event_type == "checkpoint":
            self._emit(f"Checkpoint salvo: {data.get('path')}", "debug")
        elif event_type == "train_complete":
            self._emit(f"Treino concluído em {data.get('elapsed_s', 0.0):.1f}s ({data.get('step')} passos)")
        elif event_type == "error":
            self._emit(f"Erro no treino: {data.get('error')}", "error")
