"""Geostatistical model: hyperparameters, hyperpriors and Gaussian fields."""

from .hyperparams import (
    PARAMETER_NAMES,
    TRUTH_PRESETS,
    GridSpec,
    HyperParams,
    HyperPrior,
    sample_prior,
)
from .field import (
    FieldRealization,
    VariogramConfig,
    covariance,
    generate_field,
)
from .field_io import field_frame, read_field, read_field_csv, write_field, write_field_csv

__all__ = [
    'PARAMETER_NAMES',
    'TRUTH_PRESETS',
    'GridSpec',
    'HyperParams',
    'HyperPrior',
    'sample_prior',
    'FieldRealization',
    'VariogramConfig',
    'covariance',
    'generate_field',
    'field_frame',
    'read_field',
    'read_field_csv',
    'write_field',
    'write_field_csv',
]
