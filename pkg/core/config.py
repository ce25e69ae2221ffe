import logging
import os

from dotenv import load_dotenv

load_dotenv()  # Carga las variables de .env

logger = logging.getLogger(__name__)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
        if value < 1:
            raise ValueError(raw)
        return value
    except ValueError:
        logger.warning("Valor inválido para %s=%r; se usa %d", name, raw, default)
        return default


def _level_env(name: str, default: str) -> str:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    level = raw.strip().upper()
    if not isinstance(logging.getLevelName(level), int):
        logger.warning("Nivel de log inválido %s=%r; se usa %s", name, raw, default)
        return default
    return level


# Configuración desde .env
OUTPUT_DIR = os.getenv("ZERMELO_OUTPUT_DIR", "results")
ODE_STEPS = _int_env("ZERMELO_ODE_STEPS", 10000)
SCAN_POINTS = _int_env("ZERMELO_SCAN_POINTS", 4096)
LOG_LEVEL = _level_env("ZERMELO_LOG_LEVEL", "INFO")
BATCH_WORKERS = _int_env("ZERMELO_BATCH_WORKERS", 4)
