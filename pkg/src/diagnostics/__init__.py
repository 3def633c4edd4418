"""Posterior diagnostics: JS divergence, percentile envelopes and field statistics."""

from .divergence import (
    DEFAULT_BINS,
    MarginalDensity,
    SampleSet,
    convergence_curve,
    curve_frame,
    histogram_density,
    js_divergence,
    marginal_js,
    prior_edges,
)
from .summaries import FieldStats, field_posterior_stats, percentile_frame, series_percentiles

__all__ = [
    'DEFAULT_BINS',
    'MarginalDensity',
    'SampleSet',
    'convergence_curve',
    'curve_frame',
    'histogram_density',
    'js_divergence',
    'marginal_js',
    'prior_edges',
    'FieldStats',
    'field_posterior_stats',
    'percentile_frame',
    'series_percentiles',
]
