import logging

import coloredlogs

BASE_NAME = "vlac"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"


def setup_logger(level: int | str = logging.INFO):
    logger = logging.getLogger(BASE_NAME)
    logger.setLevel(level)
    if not logger.handlers:
        coloredlogs.install(level=level, logger=logger, fmt=LOG_FORMAT)
    return logger


def get_logger(name: str | None = None):
    """
    Obtém um logger nomeado sob o namespace base "vlac".
    Se o logger base ainda não tiver handlers (setup_logger não foi chamado),
    um StreamHandler simples é configurado para evitar logs silenciosos.
    """
    logger_name = f"{BASE_NAME}.{name}" if name else BASE_NAME
    logger = logging.getLogger(logger_name)

    base_logger = logging.getLogger(BASE_NAME)
    if not logger.handlers and not base_logger.handlers:
        # Configuração mínima para evitar ausência de handlers
        ch = logging.StreamHandler()
        ch.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(ch)
        logger.setLevel(logging.INFO)

    return logger
