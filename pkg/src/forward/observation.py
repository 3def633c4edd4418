"""
Monitoring-well data vectors, observation schedules and measurement noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import ConfigError, IndexOutOfRange, ShapeMismatch

PRESSURE = "pressure"
SATURATION = "saturation"
CHANNELS: Tuple[str, ...] = (PRESSURE, SATURATION)


@dataclass(frozen=True)
class DataVector:
    """
    Flat vector of observations with per-entry channel tags and times.

    Attributes:
        values: Observation values (MPa for pressure, fraction for saturation).
        channels: Channel tag of every entry.
        times: Observation time of every entry (years).
        layers: Grid layer of every entry.
    """

    values: np.ndarray
    channels: Tuple[str, ...]
    times: Tuple[float, ...]
    layers: Tuple[int, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        layers = tuple(int(k) for k in self.layers) or tuple(0 for _ in self.channels)
        object.__setattr__(self, "layers", layers)
        if not (len(self.channels) == len(self.times) == len(self.layers) == values.size):
            raise ShapeMismatch(
                f"values ({values.size}), channels ({len(self.channels)}), times ({len(self.times)}) "
                f"and layers ({len(self.layers)}) must have equal length"
            )
        unknown = set(self.channels) - set(CHANNELS)
        if unknown:
            raise ShapeMismatch(f"unknown channel tags {sorted(unknown)}")

    def __len__(self) -> int:
        return int(self.values.size)

    def mask(self, channel: str) -> np.ndarray:
        return np.array([c == channel for c in self.channels], dtype=bool)

    def with_values(self, values: np.ndarray) -> "DataVector":
        return DataVector(values=np.asarray(values, dtype=float), channels=self.channels,
                          times=self.times, layers=self.layers)

    def same_layout(self, other: "DataVector") -> bool:
        return (self.channels == other.channels and self.times == other.times
                and self.layers == other.layers)

    def require_same_layout(self, other: "DataVector") -> None:
        if len(self) != len(other):
            raise ShapeMismatch(f"data vectors have lengths {len(self)} and {len(other)}")
        if not self.same_layout(other):
            raise ShapeMismatch("data vectors differ in channel tags, times or layers")

    @classmethod
    def empty(cls) -> "DataVector":
        return cls(values=np.empty(0), channels=(), times=(), layers=())


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian measurement-error standard deviations per channel."""

    sigma_p: float = 0.1
    sigma_s: float = 0.05

    def __post_init__(self):
        if self.sigma_p < 0 or self.sigma_s < 0:
            raise ConfigError("noise", f"standard deviations must be >= 0, got {(self.sigma_p, self.sigma_s)}")

    def sigma_for(self, channel: str) -> float:
        return self.sigma_p if channel == PRESSURE else self.sigma_s

    def sigmas(self, d: DataVector) -> np.ndarray:
        """Per-entry standard deviations for the layout of ``d``."""
        return np.array([self.sigma_for(c) for c in d.channels], dtype=float)

    def r_diag(self, d: DataVector) -> np.ndarray:
        """Diagonal of the measurement-error covariance R for the layout of ``d``."""
        return self.sigmas(d) ** 2


@dataclass(frozen=True)
class ObservationSchedule:
    """
    Which report-time indices, channels and layers are observed.

    Attributes:
        indices: Report-time indices (0-based).
        channels: Observed channels; pressure entries always precede saturation.
        layers: Monitor-column layers; None means the configured monitor layer.
    """

    indices: Tuple[int, ...] = (0, 1, 2, 3, 4)
    channels: Tuple[str, ...] = CHANNELS
    layers: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.layers is not None:
            object.__setattr__(self, "layers", tuple(int(k) for k in self.layers))
        unknown = set(self.channels) - set(CHANNELS)
        if unknown:
            raise ConfigError("observation.channels", f"unknown channels {sorted(unknown)}")


def observe(out, schedule: ObservationSchedule) -> DataVector:
    """
    Extract monitoring-well observations from a simulation output.

    Entries are ordered channel-major (pressure block, then saturation
    block), then by layer, then by scheduled time index.

    Args:
        out: ``SimOutput`` of a forward run.
        schedule: Observation schedule.

    Returns:
        DataVector: Tagged observation vector (empty for an empty schedule).

    Raises:
        IndexOutOfRange: If an index or layer lies outside the output.
    """
    n_times = len(out.times)
    for i in schedule.indices:
        if not 0 <= i < n_times:
            raise IndexOutOfRange(f"observation index {i} outside report-time range [0, {n_times})")
    layers = schedule.layers if schedule.layers is not None else (out.monitor_layer,)
    for k in layers:
        if not 0 <= k < out.grid.nz:
            raise IndexOutOfRange(f"monitor layer {k} outside [0, {out.grid.nz})")

    values, channels, times, tags = [], [], [], []
    order = [c for c in CHANNELS if c in schedule.channels]
    for channel in order:
        for layer in layers:
            series = out.monitor_series(channel, layer)
            for i in schedule.indices:
                values.append(series[i])
                channels.append(channel)
                times.append(out.times[i])
                tags.append(layer)
    if not values:
        return DataVector.empty()
    return DataVector(values=np.array(values), channels=tuple(channels), times=tuple(times), layers=tuple(tags))


def add_noise(d: DataVector, nm: NoiseModel, rng: np.random.Generator) -> DataVector:
    """
    Add i.i.d. zero-mean Gaussian noise with the channel's standard deviation.

    Args:
        d: Noise-free data.
        nm: Noise model.
        rng: Seeded random source.

    Returns:
        DataVector: Noisy copy with the same layout.
    """
    noise = rng.standard_normal(len(d)) * nm.sigmas(d)
    return d.with_values(d.values + noise)


def stack_values(vectors: Iterable[DataVector]) -> np.ndarray:
    """(n_vectors, n_obs) array of values from vectors sharing one layout."""
    vectors = list(vectors)
    if not vectors:
        return np.empty((0, 0))
    return np.vstack([v.values for v in vectors])


def schedule_from_times(report_times: Sequence[float], observed_times: Sequence[float]) -> Tuple[int, ...]:
    """Map observation times (years) onto report-time indices."""
    lookup = {float(t): i for i, t in enumerate(report_times)}
    missing = [t for t in observed_times if float(t) not in lookup]
    if missing:
        raise IndexOutOfRange(f"observation times {missing} are not report times")
    return tuple(lookup[float(t)] for t in observed_times)
