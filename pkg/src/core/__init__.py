"""Core application logic: twin-experiment orchestration and run records."""

from .experiment import METHODS, ExperimentRunner, RunSummary, TruthBundle

__all__ = ['METHODS', 'ExperimentRunner', 'RunSummary', 'TruthBundle']
