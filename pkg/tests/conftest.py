"""Shared fixtures: tiny grids and cheap toy forward models."""

import json
from dataclasses import dataclass

import numpy as np
import pytest

from src.forward.observation import DataVector, NoiseModel
from src.forward.simulator import SimConfig
from src.geomodel.field import FieldRealization
from src.geomodel.hyperparams import GridSpec, HyperParams, HyperPrior
from src.utils.logger import set_level


@dataclass(frozen=True)
class GaussianToyForward:
    """Observes mu_logk plus N(0, noise_sd^2) noise drawn from the field seed."""

    noise_sd: float = 0.5

    def __call__(self, h: HyperParams, seed) -> DataVector:
        z = np.random.default_rng(list(seed)).standard_normal()
        return DataVector(values=[h.mu_logk + self.noise_sd * z], channels=("pressure",), times=(1.0,))


@dataclass(frozen=True)
class ConstantForward:
    """Returns the same data for every h, so the likelihood is flat over the prior."""

    value: float = 3.3

    def __call__(self, h: HyperParams, seed) -> DataVector:
        return DataVector(values=[self.value], channels=("pressure",), times=(1.0,))


@dataclass(frozen=True)
class LinearStateForward:
    """y = G m, with every entry tagged as a pressure observation."""

    g: tuple

    def __call__(self, state: np.ndarray) -> DataVector:
        y = np.asarray(self.g) @ np.asarray(state, dtype=float)
        return DataVector(values=y, channels=("pressure",) * y.size, times=tuple(float(i + 1) for i in range(y.size)))


@dataclass(frozen=True)
class ToyFieldModel:
    """
    Stand-in for ForwardModel on a tiny grid: fields are i.i.d. normal around
    mu_logk and the data are the field mean and the last cell.
    """

    grid: GridSpec = GridSpec(4, 1, 1, 1.0, 1.0, 1.0)

    def realize(self, h: HyperParams, seed) -> FieldRealization:
        rng = np.random.default_rng(list(seed))
        log_k = h.mu_logk + h.sigma_logk * rng.standard_normal(self.grid.n_cells)
        return FieldRealization(grid=self.grid, log_k=log_k, hyper=h)

    def state_forward(self, h: HyperParams):
        return _ToyStateForward()

    def augmented_forward(self, base: HyperParams):
        return _ToyAugmentedForward()

    def __call__(self, h: HyperParams, seed) -> DataVector:
        return _ToyStateForward()(self.realize(h, seed).log_k)


@dataclass(frozen=True)
class _ToyStateForward:
    def __call__(self, state: np.ndarray) -> DataVector:
        state = np.asarray(state, dtype=float)
        return DataVector(values=[state.mean(), state[-1]], channels=("pressure", "pressure"), times=(1.0, 2.0))


@dataclass(frozen=True)
class _ToyAugmentedForward:
    def __call__(self, state: np.ndarray) -> DataVector:
        state = np.asarray(state, dtype=float)
        return DataVector(
            values=[state[:-1].mean(), state[:-1].mean() + state[-1]],
            channels=("pressure", "pressure"),
            times=(1.0, 2.0),
        )


@pytest.fixture(autouse=True, scope="session")
def quiet_logs():
    set_level("WARNING")


@pytest.fixture
def tiny_grid() -> GridSpec:
    return GridSpec(6, 6, 2, 100.0, 100.0, 10.0)


@pytest.fixture
def tiny_sim(tiny_grid) -> SimConfig:
    return SimConfig(
        grid=tiny_grid,
        injector=(3, 3),
        monitor=(4, 3),
        report_times=(1.0, 2.0, 3.0, 4.0, 5.0),
        inner_steps=2,
    )


@pytest.fixture
def hyper() -> HyperParams:
    return HyperParams(mu_logk=3.3, sigma_logk=0.9, log10_ar=-0.5, corr_len_h=8.0, porosity=0.2)


@pytest.fixture
def mu_only_prior() -> HyperPrior:
    """U(2.5, 4.5) on mu_logk; everything else fixed."""
    return HyperPrior(
        active=("mu_logk",),
        fixed={"sigma_logk": 1.0, "log10_ar": -1.0, "corr_len_h": 8.0, "porosity": 0.2},
    )


@pytest.fixture
def unit_noise() -> NoiseModel:
    return NoiseModel(sigma_p=1.0, sigma_s=1.0)


def tiny_config_dict(**overrides) -> dict:
    """A complete experiment configuration that runs in seconds."""
    raw = {
        "name": "tiny",
        "seed": 7,
        "grid": {"nx": 6, "ny": 6, "nz": 2, "dx": 100.0, "dy": 100.0, "dz": 10.0},
        "simulation": {
            "injector": [3, 3],
            "monitor": [4, 3],
            "report_times": [1.0, 2.0, 3.0, 4.0, 5.0],
            "inner_steps": 1,
        },
        "prior": {"active": ["mu_logk", "sigma_logk", "log10_ar"]},
        "observation": {"times": [1.0, 2.0, 3.0]},
        "noise": {"sigma_p": 0.1, "sigma_s": 0.05},
        "truth": {"preset": "true_model_1"},
        "smc_abc": {"n_particles": 20, "max_iterations": 2, "stop_rate": 0.0},
        "rejection": {"budget": 60, "pilot_count": 10, "batch_size": 25, "snapshots": [30, 60]},
        "esmda": {"n_ensemble": 6, "alphas": "four_step"},
        "hierarchical": {"n_rep": 2, "n_init": 2},
        "modified_esmda": {"n_ensemble": 6, "alphas": "four_step"},
        "diagnostics": {"bins": 5},
        "forecast": {"members": 3},
    }
    raw.update(overrides)
    return raw


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_config_dict()))
    return path
