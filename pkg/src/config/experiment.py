"""
Experiment configuration: one JSON file per twin experiment.

The file is parsed into frozen dataclasses. Any validation failure raises
``ConfigError`` whose message starts with the dotted path of the offending
key, e.g. ``esmda.alphas: sum of 1/alpha is 0.87, expected 1 within 0.001``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..forward.model import ForwardModel
from ..forward.observation import NoiseModel, ObservationSchedule, schedule_from_times
from ..forward.simulator import SimConfig
from ..geomodel.field import VariogramConfig
from ..geomodel.hyperparams import (
    DEFAULT_ACTIVE,
    DEFAULT_BOUNDS,
    DEFAULT_FIXED,
    TRUTH_PRESETS,
    GridSpec,
    HyperParams,
    HyperPrior,
)
from ..inference.esmda import EsmdaConfig
from ..inference.hierarchical import HierarchicalConfig
from ..inference.rejection import RsConfig
from ..inference.smc_abc import SmcAbcConfig, StopPolicy
from ..utils.errors import ConfigError, HdaError, IndexOutOfRange
from .settings import settings

# Rejection-sampling snapshot budgets for convergence curves.
DEFAULT_SNAPSHOTS: Tuple[int, ...] = (2_000, 5_000, 10_000, 20_000, 50_000, 100_000, 200_000)

_TOP_LEVEL_KEYS = {
    "name", "seed", "output_dir", "grid", "simulation", "variogram", "prior", "observation", "noise",
    "truth", "smc_abc", "rejection", "esmda", "hierarchical", "modified_esmda", "diagnostics", "forecast",
}


@dataclass(frozen=True)
class TruthConfig:
    """
    How the synthetic truth is chosen.

    Attributes:
        preset: Name in ``TRUTH_PRESETS``.
        values: Explicit active-parameter values.
        Neither set means the truth is sampled from the hyperprior.
    """

    preset: Optional[str] = None
    values: Optional[Dict[str, float]] = None

    def resolve(self, prior: HyperPrior, rng: np.random.Generator) -> HyperParams:
        if self.preset is not None:
            values = dict(prior.fixed)
            values.update(TRUTH_PRESETS[self.preset])
            return HyperParams.from_dict({**prior.midpoint().to_dict(), **values})
        if self.values is not None:
            return HyperParams.from_dict({**prior.midpoint().to_dict(), **prior.fixed, **self.values})
        return prior.sample(rng)

    @property
    def mode(self) -> str:
        if self.preset is not None:
            return f"preset:{self.preset}"
        return "values" if self.values is not None else "sampled"


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration."""

    name: str
    seed: int
    output_dir: Path
    sim: SimConfig
    variogram: VariogramConfig
    prior: HyperPrior
    schedule: ObservationSchedule
    noise: NoiseModel
    truth: TruthConfig
    smc: SmcAbcConfig
    rejection: RsConfig
    esmda: EsmdaConfig
    hierarchical: HierarchicalConfig
    modified_esmda: EsmdaConfig
    bins: int = 20
    forecast_members: int = 100
    raw: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def forward_model(self) -> ForwardModel:
        return ForwardModel(sim=self.sim, schedule=self.schedule, variogram=self.variogram)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        raw = dict(self.raw, seed=int(seed))
        return replace(self, seed=int(seed), raw=raw)


class _Block:
    """Read access to one JSON object that reports dotted key paths."""

    def __init__(self, raw: Any, path: str, allowed: Optional[set] = None):
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigError(path, f"expected an object, got {type(raw).__name__}")
        self.raw = dict(raw)
        self.path = path
        if allowed is not None:
            for key in self.raw:
                if key not in allowed:
                    raise ConfigError(self.key_path(key), "unknown key")

    def key_path(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def get(self, key: str, kind, default: Any = None, required: bool = False) -> Any:
        if key not in self.raw or self.raw[key] is None:
            if required:
                raise ConfigError(self.key_path(key), "missing required key")
            return default
        value = self.raw[key]
        try:
            if kind is bool:
                if not isinstance(value, bool):
                    raise TypeError
                return value
            if kind is int and (isinstance(value, bool) or float(value) != int(value)):
                raise TypeError
            if kind in (tuple, list):
                if not isinstance(value, (list, tuple)):
                    raise TypeError
                return tuple(value)
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigError(self.key_path(key), f"expected {kind.__name__}, got {value!r}") from None

    def block(self, key: str, allowed: Optional[set] = None) -> "_Block":
        return _Block(self.raw.get(key), self.key_path(key), allowed)


def _guard(path: str, build):
    """Run a constructor and turn plain validation errors into ConfigError."""
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, TypeError, HdaError) as e:
        raise ConfigError(path, str(e)) from e


def _parse_grid(b: _Block) -> GridSpec:
    return _guard(b.path, lambda: GridSpec(
        nx=b.get("nx", int, 16), ny=b.get("ny", int, 16), nz=b.get("nz", int, 4),
        dx=b.get("dx", float, 100.0), dy=b.get("dy", float, 100.0), dz=b.get("dz", float, 10.0),
    ))


def _parse_simulation(b: _Block, grid: GridSpec) -> SimConfig:
    defaults = SimConfig(grid=GridSpec(16, 16, 4, 100.0, 100.0, 10.0))
    injector = b.get("injector", tuple, defaults.injector)
    monitor = b.get("monitor", tuple, defaults.monitor)
    return _guard(b.path, lambda: SimConfig(
        grid=grid,
        injector=tuple(int(v) for v in injector),
        monitor=tuple(int(v) for v in monitor),
        monitor_layer=b.get("monitor_layer", int, defaults.monitor_layer),
        injection_rate=b.get("injection_rate", float, defaults.injection_rate),
        viscosity=b.get("viscosity", float, defaults.viscosity),
        compressibility=b.get("compressibility", float, defaults.compressibility),
        initial_pressure=b.get("initial_pressure", float, defaults.initial_pressure),
        report_times=b.get("report_times", tuple, defaults.report_times),
        inner_steps=b.get("inner_steps", int, defaults.inner_steps),
        boundary_pv_multiplier=b.get("boundary_pv_multiplier", float, defaults.boundary_pv_multiplier),
        solver_tol=b.get("solver_tol", float, defaults.solver_tol),
        solver_maxiter_factor=b.get("solver_maxiter_factor", int, defaults.solver_maxiter_factor),
        cfl=b.get("cfl", float, defaults.cfl),
        substep_limiter=b.get("substep_limiter", bool, defaults.substep_limiter),
    ))


def _parse_prior(b: _Block) -> HyperPrior:
    bounds = dict(DEFAULT_BOUNDS)
    raw_bounds = b.block("bounds")
    for name in raw_bounds.raw:
        if name not in bounds:
            raise ConfigError(raw_bounds.key_path(name), "unknown parameter")
        value = raw_bounds.get(name, tuple)
        if len(value) != 2:
            raise ConfigError(raw_bounds.key_path(name), f"expected [lower, upper], got {list(value)}")
        bounds[name] = (float(value[0]), float(value[1]))
    fixed = dict(DEFAULT_FIXED)
    raw_fixed = b.block("fixed")
    for name in raw_fixed.raw:
        fixed[name] = raw_fixed.get(name, float)
    active = b.get("active", tuple, DEFAULT_ACTIVE)
    return HyperPrior(bounds=bounds, active=tuple(active), fixed=fixed)


def _parse_observation(b: _Block, sim: SimConfig) -> ObservationSchedule:
    times = b.get("times", tuple, (1.0, 4.0, 7.0, 10.0, 13.0))
    try:
        indices = schedule_from_times(sim.report_times, times)
    except IndexOutOfRange as e:
        raise ConfigError(b.key_path("times"), str(e)) from e
    channels = b.get("channels", tuple, ("pressure", "saturation"))
    layers = b.get("layers", tuple, None)
    if layers is not None:
        for k in layers:
            if not 0 <= int(k) < sim.grid.nz:
                raise ConfigError(b.key_path("layers"), f"layer {k} outside [0, {sim.grid.nz})")
    return _guard(b.path, lambda: ObservationSchedule(indices=indices, channels=channels, layers=layers))


def _parse_truth(b: _Block) -> TruthConfig:
    preset = b.get("preset", str)
    values = b.raw.get("values")
    if preset is not None and values is not None:
        raise ConfigError(b.path, "give either preset or values, not both")
    if preset is not None and preset not in TRUTH_PRESETS:
        raise ConfigError(b.key_path("preset"), f"unknown preset {preset!r}, expected one of {sorted(TRUTH_PRESETS)}")
    if values is not None:
        vb = b.block("values", set(DEFAULT_BOUNDS))
        values = {k: vb.get(k, float) for k in vb.raw}
    return TruthConfig(preset=preset, values=values)


def _parse_esmda(b: _Block, default_alphas: Union[str, Tuple[float, ...]] = "four_step") -> EsmdaConfig:
    preset = b.get("preset", str)
    if preset is not None and ("n_ensemble" in b.raw or "alphas" in b.raw):
        raise ConfigError(b.path, "give either preset or n_ensemble/alphas, not both")
    raw_alphas = b.raw.get("alphas", default_alphas)
    if not isinstance(raw_alphas, str):
        raw_alphas = b.get("alphas", tuple)
    try:
        if preset is not None:
            return EsmdaConfig.from_preset(preset)
        return _guard(b.key_path("alphas"), lambda: EsmdaConfig(
            n_ensemble=b.get("n_ensemble", int, 500),
            alphas=raw_alphas,
        ))
    except ConfigError as e:
        # EsmdaConfig reports paths under "esmda"; re-root them at this block.
        head, _, rest = e.path.partition(".")
        if head in ("esmda", "modified_esmda") and head != b.path:
            raise ConfigError(f"{b.path}.{rest}" if rest else b.path, e.message) from e
        raise


def parse_config(raw: Mapping[str, Any], source: Optional[Path] = None) -> ExperimentConfig:
    """
    Validate a configuration mapping.

    Args:
        raw: Decoded JSON document.
        source: File the document came from (for relative output paths).

    Returns:
        ExperimentConfig: The validated configuration.

    Raises:
        ConfigError: On the first invalid key.
    """
    top = _Block(raw, "", _TOP_LEVEL_KEYS)
    name = top.get("name", str, source.stem if source else "experiment")
    seed = top.get("seed", int, 0)
    output_dir = Path(top.get("output_dir", str, str(settings.OUTPUT_ROOT / name)))

    grid = _parse_grid(top.block("grid", {"nx", "ny", "nz", "dx", "dy", "dz"}))
    sim = _parse_simulation(top.block("simulation", {
        "injector", "monitor", "monitor_layer", "injection_rate", "viscosity", "compressibility",
        "initial_pressure", "report_times", "inner_steps", "boundary_pv_multiplier", "solver_tol",
        "solver_maxiter_factor", "cfl", "substep_limiter",
    }), grid)

    vb = top.block("variogram", {"convention", "corr_len_v", "jitter", "cell_cap"})
    variogram = _guard(vb.path, lambda: VariogramConfig(
        convention=vb.get("convention", str, "practical"),
        corr_len_v=vb.get("corr_len_v", float, 1.0),
        jitter=vb.get("jitter", float, 1e-10),
        cell_cap=vb.get("cell_cap", int, settings.FIELD_CELL_CAP),
    ))
    if grid.n_cells > variogram.cell_cap:
        raise ConfigError("grid", f"{grid.n_cells} cells exceed the dense factorization cap of {variogram.cell_cap}")

    prior = _parse_prior(top.block("prior", {"bounds", "active", "fixed"}))
    schedule = _parse_observation(top.block("observation", {"times", "channels", "layers"}), sim)

    nb = top.block("noise", {"sigma_p", "sigma_s"})
    noise = NoiseModel(sigma_p=nb.get("sigma_p", float, 0.1), sigma_s=nb.get("sigma_s", float, 0.05))
    truth = _parse_truth(top.block("truth", {"preset", "values"}))

    sb = top.block("smc_abc", {"n_particles", "stop_rate", "max_iterations", "budget", "batch_size", "jitter"})
    smc = _guard(sb.path, lambda: SmcAbcConfig(
        n_particles=sb.get("n_particles", int, 500),
        stop=StopPolicy(
            rate=sb.get("stop_rate", float, 0.05),
            max_iterations=sb.get("max_iterations", int, 12),
            budget=sb.get("budget", int, None),
        ),
        batch_size=sb.get("batch_size", int, None),
        jitter=sb.get("jitter", float, 1e-8),
    ))

    rb = top.block("rejection", {"budget", "pilot_count", "batch_size", "snapshots"})
    rejection = _guard(rb.path, lambda: RsConfig(
        budget=rb.get("budget", int, 200_000),
        pilot_count=rb.get("pilot_count", int, None),
        batch_size=rb.get("batch_size", int, 1000),
        snapshots=rb.get("snapshots", tuple, DEFAULT_SNAPSHOTS),
    ))

    esmda = _parse_esmda(top.block("esmda", {"n_ensemble", "alphas", "preset"}))
    hb = top.block("hierarchical", {"n_rep", "n_resample", "n_init"})
    hierarchical = _guard(hb.path, lambda: HierarchicalConfig(
        n_rep=hb.get("n_rep", int, 10),
        n_resample=hb.get("n_resample", int, None),
        n_init=hb.get("n_init", int, 10),
    ))
    modified = _parse_esmda(top.block("modified_esmda", {"n_ensemble", "alphas", "preset"}))

    db = top.block("diagnostics", {"bins"})
    bins = db.get("bins", int, 20)
    if bins < 1:
        raise ConfigError(db.key_path("bins"), f"must be >= 1, got {bins}")
    fb = top.block("forecast", {"members"})
    forecast_members = fb.get("members", int, 100)
    if forecast_members < 2:
        raise ConfigError(fb.key_path("members"), f"must be >= 2, got {forecast_members}")

    return ExperimentConfig(
        name=name,
        seed=seed,
        output_dir=output_dir,
        sim=sim,
        variogram=variogram,
        prior=prior,
        schedule=schedule,
        noise=noise,
        truth=truth,
        smc=smc,
        rejection=rejection,
        esmda=esmda,
        hierarchical=hierarchical,
        modified_esmda=modified,
        bins=bins,
        forecast_members=forecast_members,
        raw=dict(raw),
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment configuration file.

    Args:
        path: JSON file, or the name of a bundled file in ``configs/``.

    Returns:
        ExperimentConfig: The validated configuration.
    """
    path = Path(path)
    if not path.exists() and not path.is_absolute():
        bundled = settings.get_config_path(str(path))
        if bundled.exists():
            path = bundled
    if not path.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fp:
            raw = json.load(fp)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path} is not valid JSON: {e}") from e
    return parse_config(raw, source=path)
