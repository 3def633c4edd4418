"""
Hierarchical data assimilation for CO2 storage monitoring.

Infers geostatistical hyperparameters of a permeability field from
monitoring-well pressure and saturation, then conditions field
realizations on the same data. Ships a synthetic-truth twin-experiment
harness, a rejection-sampling reference and JS-divergence diagnostics.
"""

__version__ = "1.0.0"

from .config import settings
from .core import ExperimentRunner

__all__ = ['ExperimentRunner', 'settings']
