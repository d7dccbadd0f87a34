"""Utilitários compartilhados: logging, exceções, observadores, concorrência e caminhos."""
