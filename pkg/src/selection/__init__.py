"""Resampling and representative selection between the SMC-ABC and ESMDA stages."""

from .resampling import WeightedSamples, systematic_resample
from .medoids import kmedoids_indices, kmedoids_select, standardize

__all__ = [
    'WeightedSamples',
    'systematic_resample',
    'kmedoids_indices',
    'kmedoids_select',
    'standardize',
]
