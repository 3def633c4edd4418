"""
Representative hyperparameter selection: k-means in standardized space,
then each centroid is replaced by its cluster medoid so every representative
is an actual sample.
"""

from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

from ..geomodel.hyperparams import DEFAULT_ACTIVE, HyperParams
from ..utils.errors import InsufficientDistinctPoints
from ..utils.logger import setup_logger

logger = setup_logger(__name__)


def standardize(x: np.ndarray) -> np.ndarray:
    """Per-column z-scores; constant columns are only centered."""
    x = np.asarray(x, dtype=float)
    std = x.std(axis=0)
    std[std == 0] = 1.0
    return (x - x.mean(axis=0)) / std


def medoids_from_labels(z: np.ndarray, labels: np.ndarray, k: int) -> List[int]:
    """
    Medoid row of each of the k clusters.

    A cluster left empty takes the unused row farthest from the medoids
    chosen so far, so the result always has k distinct entries.

    Args:
        z: (n, d) standardized points.
        labels: Cluster label per row, in [0, k).
        k: Number of clusters.

    Returns:
        List[int]: Row indices ordered by cluster label.
    """
    slots: List[Optional[int]] = []
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            slots.append(None)
            continue
        cost = cdist(z[members], z[members]).sum(axis=1)
        slots.append(int(members[np.argmin(cost)]))

    for c, slot in enumerate(slots):
        if slot is not None:
            continue
        chosen = [s for s in slots if s is not None]
        gap = cdist(z, z[chosen]).min(axis=1) if chosen else np.ones(z.shape[0])
        gap[chosen] = -np.inf
        slots[c] = int(np.argmax(gap))
        logger.warning(f"Cluster {c} is empty; using row {slots[c]} as its medoid")
    return [int(s) for s in slots]


def kmedoids_indices(x: np.ndarray, k: int, rng: np.random.Generator, n_init: int = 10) -> List[int]:
    """
    Indices of k medoids of the rows of ``x``.

    Args:
        x: (n, d) points.
        k: Number of representatives.
        rng: Seeds the k-means++ restarts.
        n_init: k-means restarts; the lowest-inertia run is kept.

    Returns:
        List[int]: Medoid row indices, ordered by cluster label.

    Raises:
        InsufficientDistinctPoints: If ``x`` has fewer than k distinct rows.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_distinct = np.unique(x, axis=0).shape[0]
    if k < 1 or k > n_distinct:
        raise InsufficientDistinctPoints(f"requested {k} representatives from {n_distinct} distinct points")

    z = standardize(x)
    km = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=n_init,
        random_state=int(rng.integers(2 ** 31 - 1)),
    )
    labels = km.fit_predict(z)
    medoids = medoids_from_labels(z, labels, k)
    logger.debug(f"Selected {len(medoids)} medoids from {x.shape[0]} points (inertia {km.inertia_:.4g})")
    return medoids


def kmedoids_select(
    points: Sequence[HyperParams],
    k: int,
    rng: np.random.Generator,
    names: Sequence[str] = DEFAULT_ACTIVE,
    n_init: int = 10,
) -> List[HyperParams]:
    """
    Pick k representative hyperparameter sets.

    Args:
        points: Candidate hyperparameters (typically a resampled posterior).
        k: Number of representatives.
        rng: Random source.
        names: Parameters spanning the clustering space.
        n_init: k-means restarts.

    Returns:
        List[HyperParams]: Members of ``points``.
    """
    x = np.vstack([p.vector(names) for p in points])
    return [points[i] for i in kmedoids_indices(x, k, rng, n_init=n_init)]
