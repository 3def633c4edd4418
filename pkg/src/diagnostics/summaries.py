"""
Ensemble summaries: percentile envelopes of monitoring-well series and
cell-wise posterior field statistics.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..utils.errors import EmptyEnsemble, InsufficientMembers, ShapeMismatch

DEFAULT_PROBS = (0.1, 0.5, 0.9)


def series_percentiles(series: np.ndarray, probs: Sequence[float] = DEFAULT_PROBS) -> np.ndarray:
    """
    Per-time percentiles across ensemble members.

    Args:
        series: (n_members, n_times) values.
        probs: Percentile levels in [0, 1].

    Returns:
        np.ndarray: (len(probs), n_times), linear interpolation between order statistics.

    Raises:
        EmptyEnsemble: If there are no members.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series[None, :]
    if series.shape[0] == 0:
        raise EmptyEnsemble("no members to summarize")
    return np.quantile(series, np.asarray(probs, dtype=float), axis=0, method="linear")


def percentile_frame(times: Sequence[float], series: np.ndarray, probs: Sequence[float] = DEFAULT_PROBS) -> pd.DataFrame:
    """Percentile envelope as a table with columns time, p10, p50, p90 (per ``probs``)."""
    bands = series_percentiles(series, probs)
    times = np.asarray(times, dtype=float)
    if bands.shape[1] != times.size:
        raise ShapeMismatch(f"{times.size} times for series of length {bands.shape[1]}")
    frame = pd.DataFrame({"time": times})
    for p, band in zip(probs, bands):
        frame[f"p{int(round(p * 100))}"] = band
    return frame


@dataclass(frozen=True)
class FieldStats:
    """Cell-wise posterior mean, variance and variance reduction."""

    mean: np.ndarray
    variance: np.ndarray
    reduction: Optional[np.ndarray] = None


def field_posterior_stats(ensembles: Sequence[np.ndarray], prior: Optional[np.ndarray] = None) -> FieldStats:
    """
    Pool ensembles and compute cell-wise statistics.

    Args:
        ensembles: (n_members, n_cells) arrays; all members are pooled.
        prior: Optional (n_members, n_cells) prior ensemble for the reduction map.

    Returns:
        FieldStats: Mean, unbiased variance and 1 - var_post / var_prior
        (zero where the prior variance vanishes).

    Raises:
        InsufficientMembers: If fewer than two members are pooled.
    """
    arrays = [np.atleast_2d(np.asarray(e, dtype=float)) for e in ensembles]
    if not arrays:
        raise InsufficientMembers("no ensembles given")
    pooled = np.vstack(arrays)
    if pooled.shape[0] < 2:
        raise InsufficientMembers(f"need at least 2 members, got {pooled.shape[0]}")
    mean = pooled.mean(axis=0)
    variance = pooled.var(axis=0, ddof=1)

    reduction = None
    if prior is not None:
        prior = np.atleast_2d(np.asarray(prior, dtype=float))
        if prior.shape[0] < 2:
            raise InsufficientMembers(f"prior ensemble needs at least 2 members, got {prior.shape[0]}")
        if prior.shape[1] != pooled.shape[1]:
            raise ShapeMismatch(f"prior has {prior.shape[1]} cells, posterior {pooled.shape[1]}")
        prior_var = prior.var(axis=0, ddof=1)
        reduction = np.zeros_like(prior_var)
        positive = prior_var > 0
        reduction[positive] = 1.0 - variance[positive] / prior_var[positive]
    return FieldStats(mean=mean, variance=variance, reduction=reduction)
