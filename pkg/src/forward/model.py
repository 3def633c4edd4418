"""
Forward-evaluation closures handed to the samplers.

Each call is one forward run: build a field, simulate it and extract the
monitoring-well observations. The closures are plain frozen dataclasses so
they pickle cleanly into worker processes.
"""

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..geomodel.field import FieldRealization, VariogramConfig, generate_field
from ..geomodel.hyperparams import HyperParams
from .observation import DataVector, ObservationSchedule, observe
from .simulator import SimConfig, SimOutput, simulate

Seed = Union[int, Sequence[int]]


@dataclass(frozen=True)
class ForwardModel:
    """
    Hyperparameters (plus a realization seed) to observations.

    Attributes:
        sim: Simulation configuration.
        schedule: Observation schedule applied to every run.
        variogram: Covariance-model options for field generation.
    """

    sim: SimConfig
    schedule: ObservationSchedule = field(default_factory=ObservationSchedule)
    variogram: VariogramConfig = field(default_factory=VariogramConfig)

    def realize(self, h: HyperParams, seed: Seed) -> FieldRealization:
        """Draw the field a given seed stands for."""
        rng = np.random.default_rng(seed)
        return generate_field(h, self.sim.grid, rng, self.variogram)

    def run_output(self, m: FieldRealization) -> SimOutput:
        return simulate(m, self.sim)

    def run_field(self, m: FieldRealization) -> DataVector:
        return observe(simulate(m, self.sim), self.schedule)

    def run_state(self, log_k: np.ndarray, h: HyperParams) -> DataVector:
        """Observations for an explicit log-permeability vector."""
        m = FieldRealization(grid=self.sim.grid, log_k=np.asarray(log_k, dtype=float), hyper=h)
        return self.run_field(m)

    def forecast_state(self, log_k: np.ndarray, h: HyperParams) -> np.ndarray:
        """
        Full monitor series for one state.

        Returns:
            np.ndarray: (2, n_report_times) pressure (MPa) and saturation rows.
        """
        m = FieldRealization(grid=self.sim.grid, log_k=np.asarray(log_k, dtype=float), hyper=h)
        out = simulate(m, self.sim)
        return np.vstack([out.monitor_pressure, out.monitor_saturation])

    def state_forward(self, h: HyperParams) -> "FieldStateForward":
        return FieldStateForward(model=self, hyper=h)

    def augmented_forward(self, base: HyperParams) -> "AugmentedStateForward":
        return AugmentedStateForward(model=self, base=base)

    def __call__(self, h: HyperParams, seed: Seed) -> DataVector:
        return self.run_field(self.realize(h, seed))


@dataclass(frozen=True)
class FieldStateForward:
    """ESMDA state (per-cell log-k) to observations at fixed hyperparameters."""

    model: ForwardModel
    hyper: HyperParams

    def __call__(self, state: np.ndarray) -> DataVector:
        return self.model.run_state(state, self.hyper)


@dataclass(frozen=True)
class AugmentedStateForward:
    """
    Augmented ESMDA state (per-cell log-k followed by log10 a_r) to observations.

    Mean and std of the member's field stand in for mu_logk and sigma_logk;
    they do not enter the flow physics.
    """

    model: ForwardModel
    base: HyperParams

    def hyper_of(self, state: np.ndarray) -> HyperParams:
        return hyper_from_augmented(state, self.base)

    def __call__(self, state: np.ndarray) -> DataVector:
        state = np.asarray(state, dtype=float)
        return self.model.run_state(state[:-1], self.hyper_of(state))


def hyper_from_augmented(state: np.ndarray, base: HyperParams) -> HyperParams:
    """Per-member hyperparameters read off an augmented state vector."""
    log_k = np.asarray(state[:-1], dtype=float)
    return base.with_values(
        ("mu_logk", "sigma_logk", "log10_ar"),
        (float(np.mean(log_k)), float(np.std(log_k)), float(state[-1])),
    )
