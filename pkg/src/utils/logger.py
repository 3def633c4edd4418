"""
Logging configuration for the data-assimilation toolkit.

Provides structured logging with configurable levels and formatting.
"""

import logging
import sys
from typing import Optional, Set
from ..config.settings import settings

_CONFIGURED: Set[str] = set()


def setup_logger(
    name: str,
    level: Optional[str] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Set up a logger with the specified name and level.

    Args:
        name: Logger name (typically __name__ of the calling module).
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
               If None, uses settings.LOG_LEVEL.
        log_file: Optional file path to write logs to. If None, uses
                  settings.LOG_FILE when that is set.

    Returns:
        logging.Logger: Configured logger instance.
    """
    logger = logging.getLogger(name)
    _CONFIGURED.add(name)

    log_level = level or settings.LOG_LEVEL
    logger.setLevel(getattr(logging, log_level.upper()))

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    formatter = logging.Formatter(settings.LOG_FORMAT)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    log_file = log_file or settings.LOG_FILE
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # Library loggers must not double-print through the root logger.
    logger.propagate = False
    return logger


def set_level(level: str) -> None:
    """
    Change the level of every logger created by ``setup_logger``.

    Args:
        level: New logging level name.
    """
    numeric = getattr(logging, level.upper())
    for name in _CONFIGURED:
        logging.getLogger(name).setLevel(numeric)
