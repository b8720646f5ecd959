"""
Loguru configuration shared by the CLI, the trainer and the inference service.
"""
import sys
from typing import Any

from loguru import logger

from skipsnn.config.settings import LOG_DIR, LOG_JSON, LOG_LEVEL, LOG_TO_FILE

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)

_configured = False


def setup_logging(level: str = LOG_LEVEL, to_file: bool = LOG_TO_FILE) -> None:
    """
    Install the console, file and audit sinks.
    Safe to call more than once; only the first call has an effect unless sinks were reset.
    """
    global _configured
    if _configured:
        return

    logger.remove()
    logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT, colorize=True)

    if to_file:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        logger.add(
            LOG_DIR / "skipsnn.log",
            level=level,
            rotation="10 MB",
            retention=5,
            serialize=LOG_JSON,
            filter=lambda record: not record["extra"].get("audit", False),
        )
        logger.add(
            LOG_DIR / "audit.log",
            level="INFO",
            rotation="10 MB",
            serialize=True,
            filter=lambda record: record["extra"].get("audit", False),
        )

    _configured = True


def audit_log(event_type: str, details: str, **extra: Any) -> None:
    """Record a run or service lifecycle event on the audit sink"""
    logger.bind(audit=True, event_type=event_type, **extra).info(f"[{event_type}] {details}")


setup_logging()

__all__ = ["logger", "audit_log", "setup_logging"]
