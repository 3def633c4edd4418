"""
Hyperparameters, hyperpriors and grid geometry.

A ``HyperParams`` is one point h of the geostatistical hyperparameter space;
a ``HyperPrior`` is the box of independent uniforms it is drawn from. Only
the *active* parameters are inferred, the others stay at configured values.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from ..utils.errors import ConfigError

PARAMETER_NAMES: Tuple[str, ...] = ("mu_logk", "sigma_logk", "log10_ar", "corr_len_h", "porosity")

# Hyperprior box of the storage-aquifer study (log-k in ln(md), corr_len_h in cells).
DEFAULT_BOUNDS: Dict[str, Tuple[float, float]] = {
    "mu_logk": (2.5, 4.5),
    "sigma_logk": (0.5, 2.0),
    "log10_ar": (-2.0, 0.0),
    "corr_len_h": (5.0, 20.0),
    "porosity": (0.13, 0.23),
}
DEFAULT_ACTIVE: Tuple[str, ...] = ("mu_logk", "sigma_logk", "log10_ar")
DEFAULT_FIXED: Dict[str, float] = {"corr_len_h": 8.0, "porosity": 0.2}

TRUTH_PRESETS: Dict[str, Dict[str, float]] = {
    "true_model_1": {"mu_logk": 3.3, "sigma_logk": 0.9, "log10_ar": -0.5},
    "true_model_2": {"mu_logk": 2.7, "sigma_logk": 1.2, "log10_ar": -1.7},
}


@dataclass(frozen=True)
class HyperParams:
    """One set of geostatistical hyperparameters."""

    mu_logk: float
    sigma_logk: float
    log10_ar: float
    corr_len_h: float
    porosity: float

    def __post_init__(self):
        if not self.sigma_logk >= 0.0:
            raise ValueError(f"sigma_logk must be >= 0, got {self.sigma_logk}")
        if not 0.0 < self.porosity < 1.0:
            raise ValueError(f"porosity must lie in (0, 1), got {self.porosity}")
        if not self.corr_len_h > 0.0:
            raise ValueError(f"corr_len_h must be > 0, got {self.corr_len_h}")

    @property
    def anisotropy_ratio(self) -> float:
        """Vertical-to-horizontal permeability ratio a_r."""
        return float(10.0 ** self.log10_ar)

    def vector(self, names: Sequence[str] = PARAMETER_NAMES) -> np.ndarray:
        return np.array([getattr(self, n) for n in names], dtype=float)

    def with_values(self, names: Sequence[str], values: Sequence[float]) -> "HyperParams":
        return replace(self, **{n: float(v) for n, v in zip(names, values)})

    def shifted_mean(self, delta: float) -> "HyperParams":
        return replace(self, mu_logk=self.mu_logk + delta)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Mapping[str, float]) -> "HyperParams":
        return cls(**{n: float(values[n]) for n in PARAMETER_NAMES})


@dataclass(frozen=True)
class HyperPrior:
    """
    Independent uniform hyperprior with an active mask.

    Attributes:
        bounds: name -> (lower, upper) for every parameter.
        active: names of the inferred parameters, in inference order.
        fixed: values used for inactive parameters.
    """

    bounds: Dict[str, Tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    active: Tuple[str, ...] = DEFAULT_ACTIVE
    fixed: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_FIXED))

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            if name not in self.bounds:
                raise ConfigError(f"prior.bounds.{name}", "missing bounds")
            lo, hi = self.bounds[name]
            if not lo <= hi:
                raise ConfigError(f"prior.bounds.{name}", f"lower {lo} exceeds upper {hi}")
        for name in self.active:
            if name not in PARAMETER_NAMES:
                raise ConfigError("prior.active", f"unknown parameter {name!r}")
        if len(set(self.active)) != len(self.active):
            raise ConfigError("prior.active", "duplicate parameter names")
        for name in self.inactive:
            if name not in self.fixed:
                raise ConfigError(f"prior.fixed.{name}", "inactive parameter needs a fixed value")
        # Validate fixed values through the HyperParams invariants once.
        try:
            self.midpoint()
        except ValueError as e:
            raise ConfigError("prior", str(e)) from e

    @property
    def inactive(self) -> Tuple[str, ...]:
        return tuple(n for n in PARAMETER_NAMES if n not in self.active)

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in self.active], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in self.active], dtype=float)

    @property
    def ranges(self) -> np.ndarray:
        return self.upper - self.lower

    def build(self, active_values: Sequence[float]) -> HyperParams:
        """Assemble a HyperParams from active-parameter values plus fixed values."""
        values = dict(self.fixed)
        values.update({n: float(v) for n, v in zip(self.active, active_values)})
        return HyperParams.from_dict(values)

    def midpoint(self) -> HyperParams:
        return self.build((self.lower + self.upper) / 2.0)

    def sample(self, rng: np.random.Generator) -> HyperParams:
        """Draw active parameters independently and uniformly; inactive ones take their fixed values."""
        return self.build(rng.uniform(self.lower, self.upper))

    def contains(self, values: Sequence[float]) -> bool:
        """True when active-parameter values lie inside the box (p(h) > 0)."""
        v = np.asarray(values, dtype=float)
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))

    def log_density(self, values: Sequence[float]) -> float:
        """Log of the uniform prior density over active parameters."""
        if not self.contains(values):
            return -np.inf
        widths = self.ranges
        # A point-mass dimension contributes a factor of one.
        return float(-np.sum(np.log(widths[widths > 0])))

    def active_vector(self, h: HyperParams) -> np.ndarray:
        return h.vector(self.active)


def sample_prior(prior: HyperPrior, rng: np.random.Generator) -> HyperParams:
    """
    Draw one hyperparameter set from the prior box.

    Args:
        prior: Uniform hyperprior (bounds already validated).
        rng: Random source owned by the caller.

    Returns:
        HyperParams: Active parameters uniform in their bounds, inactive ones fixed.
    """
    return prior.sample(rng)


@dataclass(frozen=True)
class GridSpec:
    """Structured grid: cell counts and cell dimensions in metres."""

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ConfigError("grid", f"cell counts must be >= 1, got {(self.nx, self.ny, self.nz)}")
        if min(self.dx, self.dy, self.dz) <= 0:
            raise ConfigError("grid", f"cell dimensions must be > 0, got {(self.dx, self.dy, self.dz)}")

    @property
    def shape(self) -> Tuple[int, int, int]:
        """Array shape (nz, ny, nx) for x-fastest flat ordering."""
        return (self.nz, self.ny, self.nx)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    def index(self, i: int, j: int, k: int) -> int:
        """Flat index of cell (i, j, k) in x-fastest order."""
        return i + self.nx * (j + self.ny * k)

    def cell_coordinates(self) -> np.ndarray:
        """(n_cells, 3) integer cell coordinates (i, j, k) in flat order."""
        k, j, i = np.meshgrid(np.arange(self.nz), np.arange(self.ny), np.arange(self.nx), indexing="ij")
        return np.column_stack([i.ravel(), j.ravel(), k.ravel()]).astype(float)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)
