"""
Unconditional Gaussian simulation of log-permeability.

The covariance model is exponential. Fields are drawn exactly by dense
Cholesky factorization of the cell-to-cell correlation matrix, which is
feasible for desk-scale grids and samples the same Gaussian law a
sequential Gaussian simulation would target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.spatial.distance import pdist, squareform

from ..config.settings import settings
from ..utils.cache import FactorCache, stable_cache_key
from ..utils.errors import CellCapExceeded, ConfigError, FactorizationFailure
from ..utils.logger import setup_logger
from .hyperparams import GridSpec, HyperParams

logger = setup_logger(__name__)

# Exponent scale of the two supported conventions: the practical range puts
# the correlation at e^-3 (about 5%) at one correlation length.
RANGE_FACTORS = {"practical": 3.0, "exponential": 1.0}


@dataclass(frozen=True)
class VariogramConfig:
    """
    Covariance-model options.

    Attributes:
        convention: "practical" for C(h) = s^2 exp(-3h/l), "exponential" for exp(-h/l).
        corr_len_v: vertical correlation length in cells.
        jitter: relative diagonal jitter added before factorization.
        cell_cap: largest grid that may be factorized densely.
    """

    convention: str = "practical"
    corr_len_v: float = 1.0
    jitter: float = 1e-10
    cell_cap: int = settings.FIELD_CELL_CAP

    def __post_init__(self):
        if self.convention not in RANGE_FACTORS:
            raise ConfigError("variogram.convention", f"expected one of {sorted(RANGE_FACTORS)}, got {self.convention!r}")
        if self.corr_len_v <= 0:
            raise ConfigError("variogram.corr_len_v", f"must be > 0, got {self.corr_len_v}")
        if self.jitter < 0:
            raise ConfigError("variogram.jitter", f"must be >= 0, got {self.jitter}")

    @property
    def range_factor(self) -> float:
        return RANGE_FACTORS[self.convention]


@dataclass(frozen=True)
class FieldRealization:
    """Per-cell natural-log horizontal permeability (ln md) on a grid."""

    grid: GridSpec
    log_k: np.ndarray
    hyper: HyperParams

    def __post_init__(self):
        if self.log_k.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {self.log_k.shape}")
        if not np.all(np.isfinite(self.log_k)):
            raise ValueError("field contains non-finite values")

    @property
    def log_kv(self) -> np.ndarray:
        """Vertical ln-permeability, k_v = a_r * k_h."""
        return self.log_k + np.log(self.hyper.anisotropy_ratio)

    def as_array(self) -> np.ndarray:
        """Field reshaped to (nz, ny, nx)."""
        return self.log_k.reshape(self.grid.shape)


_FACTORS: FactorCache[np.ndarray] = FactorCache(max_items=settings.FACTOR_CACHE_ITEMS)


def covariance(lag, h: HyperParams, variogram: Optional[VariogramConfig] = None):
    """
    Exponential covariance at a lag measured in horizontal cells.

    Args:
        lag: Non-negative distance (scalar or array) in cells.
        h: Hyperparameters providing sigma_logk and corr_len_h.
        variogram: Convention options; practical range by default.

    Returns:
        Covariance value(s) with the shape of ``lag``.
    """
    variogram = variogram or VariogramConfig()
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise ValueError("lag must be >= 0")
    value = h.sigma_logk ** 2 * np.exp(-variogram.range_factor * lag / h.corr_len_h)
    return float(value) if value.ndim == 0 else value


def anisotropic_lags(grid: GridSpec, corr_len_h: float, corr_len_v: float) -> np.ndarray:
    """
    Pairwise cell lags in horizontal-cell units.

    Vertical separations are stretched by corr_len_h / corr_len_v so one
    vertical correlation length maps onto one horizontal correlation length.
    """
    coords = grid.cell_coordinates()
    coords[:, 2] *= corr_len_h / corr_len_v
    return squareform(pdist(coords))


def correlation_factor(grid: GridSpec, corr_len_h: float, variogram: VariogramConfig) -> np.ndarray:
    """
    Lower Cholesky factor of the unit-variance correlation matrix.

    Factors are cached per (grid, corr_len_h, convention, corr_len_v, jitter).

    Raises:
        CellCapExceeded: If the grid has more cells than ``variogram.cell_cap``.
        FactorizationFailure: If the jittered matrix is not positive definite.
    """
    if grid.n_cells > variogram.cell_cap:
        raise CellCapExceeded(
            f"grid has {grid.n_cells} cells, dense factorization is capped at {variogram.cell_cap}"
        )
    key = stable_cache_key(
        grid.nx, grid.ny, grid.nz, float(corr_len_h),
        variogram.convention, float(variogram.corr_len_v), float(variogram.jitter),
    )

    def compute() -> np.ndarray:
        lags = anisotropic_lags(grid, corr_len_h, variogram.corr_len_v)
        corr = np.exp(-variogram.range_factor * lags / corr_len_h)
        corr[np.diag_indices_from(corr)] += variogram.jitter
        try:
            factor = linalg.cholesky(corr, lower=True, check_finite=False)
        except linalg.LinAlgError as e:
            raise FactorizationFailure(
                f"correlation matrix for corr_len_h={corr_len_h} is not positive definite"
            ) from e
        factor.setflags(write=False)
        logger.debug(f"Factorized {grid.n_cells}-cell correlation matrix (corr_len_h={corr_len_h})")
        return factor

    return _FACTORS.get_or_compute(key, compute)


def generate_field(
    h: HyperParams,
    grid: GridSpec,
    rng: np.random.Generator,
    variogram: Optional[VariogramConfig] = None,
) -> FieldRealization:
    """
    Draw one unconditional log-permeability realization.

    log_k = mu_logk + sigma_logk * L z with L L^T the correlation matrix and
    z i.i.d. standard normal. The jitter is relative to the variance, so
    scaling the unit-variance factor by sigma equals factorizing the jittered
    covariance directly.

    Args:
        h: Hyperparameters.
        grid: Target grid.
        rng: Seeded random source; the draw is deterministic given its state.
        variogram: Covariance-model options.

    Returns:
        FieldRealization: The realization tagged with ``h``.
    """
    variogram = variogram or VariogramConfig()
    factor = correlation_factor(grid, h.corr_len_h, variogram)
    z = rng.standard_normal(grid.n_cells)
    log_k = h.mu_logk + h.sigma_logk * (factor @ z)
    return FieldRealization(grid=grid, log_k=log_k, hyper=h)


def factor_cache_stats():
    return _FACTORS.stats()
