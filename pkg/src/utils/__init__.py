"""Utility modules: logging, errors, factor cache and artifact I/O."""

from .logger import setup_logger, set_level
from .cache import FactorCache, stable_cache_key
from .errors import HdaError, ConfigError, NumericalError

__all__ = [
    'setup_logger',
    'set_level',
    'FactorCache',
    'stable_cache_key',
    'HdaError',
    'ConfigError',
    'NumericalError',
]
