"""
Conversion of weighted samples into equally weighted ones.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..geomodel.hyperparams import HyperParams

WEIGHT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightedSamples:
    """Hyperparameter points with normalized non-negative weights."""

    points: Tuple[HyperParams, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        weights = np.asarray(self.weights, dtype=float).ravel()
        object.__setattr__(self, "weights", weights)
        if len(self.points) != weights.size:
            raise ValueError(f"{len(self.points)} points but {weights.size} weights")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def normalized(cls, points: Sequence[HyperParams], weights: Sequence[float]) -> "WeightedSamples":
        w = np.asarray(weights, dtype=float)
        return cls(points=tuple(points), weights=w / w.sum())


def systematic_resample(ws: WeightedSamples, m: int, rng: np.random.Generator) -> np.ndarray:
    """
    Systematic resampling with a single uniform offset.

    Args:
        ws: Weighted samples.
        m: Number of indices to draw (>= 1).
        rng: Random source for the offset.

    Returns:
        np.ndarray: ``m`` sorted indices into ``ws.points``.
    """
    if m < 1:
        raise ValueError(f"output count must be >= 1, got {m}")
    cumulative = np.cumsum(ws.weights)
    cumulative[-1] = 1.0
    positions = rng.uniform(0.0, 1.0 / m) + np.arange(m) / m
    return np.searchsorted(cumulative, positions, side="right")
