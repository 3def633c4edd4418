"""
Marginal-posterior comparison: shared-edge histograms and the
Jensen-Shannon divergence between them (natural-log units).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import rel_entr

from ..geomodel.hyperparams import HyperPrior
from ..utils.errors import DivergenceOutOfBounds, EdgeMismatch, EmptySampleSet
from ..utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_BINS = 20
JS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MarginalDensity:
    """
    Histogram probabilities on fixed bin edges.

    Attributes:
        edges: Strictly increasing bin edges (n_bins + 1).
        probs: Bin probabilities summing to one.
        clipped_mass: Share of the mass that fell outside the edges and was
            clipped into the end bins.
    """

    edges: np.ndarray
    probs: np.ndarray
    clipped_mass: float = 0.0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be a strictly increasing 1-D array of length >= 2")
        if probs.shape != (edges.size - 1,):
            raise ValueError(f"expected {edges.size - 1} probabilities, got {probs.shape}")
        if np.any(probs < 0):
            raise ValueError("probabilities must be non-negative")


@dataclass(frozen=True)
class SampleSet:
    """
    Hyperparameter samples for marginal comparisons.

    Attributes:
        names: Parameter names, one per column.
        values: (n, d) sample matrix.
        weights: Optional non-negative weights (equal weights when None).
    """

    names: Tuple[str, ...]
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        values = np.asarray(self.values, dtype=float).reshape(-1, len(self.names))
        object.__setattr__(self, "values", values)
        if self.weights is not None:
            object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).ravel())

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, names: Sequence[str], weight_column: Optional[str] = "weight") -> "SampleSet":
        weights = frame[weight_column].to_numpy() if weight_column and weight_column in frame else None
        return cls(names=tuple(names), values=frame[list(names)].to_numpy(), weights=weights)


def prior_edges(prior: HyperPrior, bins: int = DEFAULT_BINS) -> Dict[str, np.ndarray]:
    """Equal-width edges over the prior range of every active parameter."""
    return {
        name: np.linspace(lo, hi, bins + 1)
        for name, lo, hi in zip(prior.active, prior.lower, prior.upper)
    }


def histogram_density(
    samples: Sequence[float],
    edges: Sequence[float],
    weights: Optional[Sequence[float]] = None,
) -> MarginalDensity:
    """
    Weighted normalized histogram on fixed edges.

    Samples outside the edges are clipped into the end bins and reported in
    ``clipped_mass``.

    Raises:
        EmptySampleSet: If there are no samples or the total weight is zero.
    """
    x = np.asarray(samples, dtype=float).ravel()
    edges = np.asarray(edges, dtype=float)
    if x.size == 0:
        raise EmptySampleSet("no samples")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float).ravel()
    total = w.sum()
    if total <= 0:
        raise EmptySampleSet("total sample weight is zero")

    n_bins = edges.size - 1
    outside = (x < edges[0]) | (x > edges[-1])
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_bins - 1)
    probs = np.bincount(idx, weights=w, minlength=n_bins) / total
    clipped = float(w[outside].sum() / total)
    if clipped > 0:
        logger.debug(f"Clipped {clipped:.3%} of the mass into the end bins")
    return MarginalDensity(edges=edges, probs=probs, clipped_mass=clipped)


def js_divergence(p: MarginalDensity, q: MarginalDensity) -> float:
    """
    Jensen-Shannon divergence in nats, bounded by ln 2.

    Raises:
        EdgeMismatch: If the densities use different bin edges.
        DivergenceOutOfBounds: If the result leaves [0, ln 2] by more than
            ``JS_TOLERANCE`` (unnormalized inputs).
    """
    if p.edges.shape != q.edges.shape or not np.array_equal(p.edges, q.edges):
        raise EdgeMismatch("densities are defined on different bin edges")
    m = 0.5 * (p.probs + q.probs)
    value = 0.5 * np.sum(rel_entr(p.probs, m)) + 0.5 * np.sum(rel_entr(q.probs, m))
    upper = np.log(2.0)
    if value < -JS_TOLERANCE or value > upper + JS_TOLERANCE:
        raise DivergenceOutOfBounds(f"JS divergence {value:.6g} outside [0, ln 2]")
    # Rounding only.
    return float(min(max(0.0, value), upper))


def marginal_js(a: SampleSet, b: SampleSet, edges: Mapping[str, np.ndarray]) -> Dict[str, float]:
    """JS divergence per parameter between two sample sets."""
    out = {}
    for name, e in edges.items():
        p = histogram_density(a.column(name), e, a.weights)
        q = histogram_density(b.column(name), e, b.weights)
        out[name] = js_divergence(p, q)
    return out


def convergence_curve(
    snapshots: Sequence[Tuple[int, SampleSet]],
    reference: SampleSet,
    edges: Mapping[str, np.ndarray],
) -> List[Tuple[int, Dict[str, float]]]:
    """
    JS divergence of each snapshot's marginals against a reference.

    Args:
        snapshots: (forward-run count, samples) ordered by run count.
        reference: Reference posterior samples.
        edges: Bin edges per parameter.

    Returns:
        List of (run count, {parameter: js}).

    Raises:
        ValueError: If the run counts are not non-decreasing.
    """
    counts = [c for c, _ in snapshots]
    if any(b < a for a, b in zip(counts, counts[1:])):
        raise ValueError(f"snapshot run counts must be non-decreasing, got {counts}")
    return [(count, marginal_js(samples, reference, edges)) for count, samples in snapshots]


def curve_frame(curve: Sequence[Tuple[int, Dict[str, float]]], method: str = "") -> pd.DataFrame:
    """Long-format table (method, parameter, run_count, js)."""
    rows = [
        {"method": method, "parameter": name, "run_count": count, "js": value}
        for count, values in curve
        for name, value in values.items()
    ]
    return pd.DataFrame(rows, columns=["method", "parameter", "run_count", "js"])
