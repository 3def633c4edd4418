"""
Data-mismatch measures: the weighted Euclidean distance used by SMC-ABC and
the Gaussian log-likelihood used by rejection sampling.
"""

import numpy as np

from ..forward.observation import CHANNELS, DataVector, NoiseModel
from ..utils.errors import ShapeMismatch, ZeroSigma


def distance(y: DataVector, d: DataVector, nm: NoiseModel) -> float:
    """
    Sum of squared channel-normalized residuals.

    Args:
        y: Simulated data.
        d: Observed data with the same layout.
        nm: Noise model providing the per-channel normalization.

    Returns:
        float: sum_i ((y_i - d_i) / sigma_channel(i))^2.

    Raises:
        ShapeMismatch: If the layouts differ.
        ZeroSigma: If a channel present in the data has zero sigma.
    """
    y.require_same_layout(d)
    for channel in CHANNELS:
        if channel in d.channels and nm.sigma_for(channel) == 0:
            raise ZeroSigma(f"{channel} sigma is zero")
    residual = (y.values - d.values) / nm.sigmas(d)
    return float(np.dot(residual, residual))


def log_likelihood(y: DataVector, d_obs: DataVector, r_diag: np.ndarray) -> float:
    """
    Natural log of the Gaussian likelihood with diagonal covariance R.

    -1/2 ln det(2 pi R) - 1/2 (d_obs - y)^T R^-1 (d_obs - y)

    Raises:
        ShapeMismatch: If the vectors or R disagree in length.
    """
    y.require_same_layout(d_obs)
    r_diag = np.asarray(r_diag, dtype=float)
    if r_diag.shape != d_obs.values.shape:
        raise ShapeMismatch(f"R diagonal has shape {r_diag.shape}, data has {d_obs.values.shape}")
    if np.any(r_diag <= 0):
        raise ZeroSigma("R diagonal must be strictly positive")
    residual = d_obs.values - y.values
    quad = float(np.sum(residual ** 2 / r_diag))
    log_det = float(np.sum(np.log(2.0 * np.pi * r_diag)))
    return -0.5 * log_det - 0.5 * quad
