"""Configuration: runtime settings and experiment files."""

from .settings import settings, Settings
from .experiment import ExperimentConfig, TruthConfig, load_config, parse_config

__all__ = [
    'settings',
    'Settings',
    'ExperimentConfig',
    'TruthConfig',
    'load_config',
    'parse_config',
]
