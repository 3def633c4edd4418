"""
Two-stage hierarchical assimilation and the augmented-state ESMDA baseline.

The hierarchical driver turns the final SMC-ABC population into equally
weighted samples, picks representative hyperparameter sets by k-medoids and
runs one ESMDA per representative on fields generated at that set. The
baseline instead samples hyperparameters per member and lets ESMDA update the
fields together with log10 a_r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..forward.model import hyper_from_augmented
from ..forward.observation import DataVector
from ..geomodel.hyperparams import HyperParams, HyperPrior, sample_prior
from ..selection.medoids import kmedoids_select
from ..selection.resampling import WeightedSamples, systematic_resample
from ..utils.errors import ConfigError
from ..utils.logger import setup_logger
from .esmda import EnsembleState, EsmdaConfig, EsmdaResult, esmda_run
from .evaluator import Evaluator, task_rng, task_seed
from .smc_abc import Population

logger = setup_logger(__name__)


@dataclass(frozen=True)
class HierarchicalConfig:
    """
    Second-stage options.

    Attributes:
        n_rep: Representative hyperparameter sets.
        n_resample: Equally weighted samples drawn before clustering (None for N).
        n_init: k-means restarts.
    """

    n_rep: int = 10
    n_resample: Optional[int] = None
    n_init: int = 10

    def __post_init__(self):
        if self.n_rep < 1:
            raise ConfigError("hierarchical.n_rep", f"must be >= 1, got {self.n_rep}")
        if self.n_resample is not None and self.n_resample < self.n_rep:
            raise ConfigError("hierarchical.n_resample", "must be >= n_rep")


@dataclass
class RepresentativePosterior:
    """ESMDA posterior ensemble generated at one representative."""

    hyper: HyperParams
    result: EsmdaResult

    @property
    def state(self) -> EnsembleState:
        return self.result.state


@dataclass
class HierarchicalResult:
    """
    Joint posterior bundle.

    Attributes:
        representatives: Selected hyperparameter sets.
        posteriors: One ESMDA posterior per representative.
        smc_runs: Forward runs spent by SMC-ABC.
        esmda_runs: Forward runs spent by all ESMDA runs.
    """

    representatives: List[HyperParams]
    posteriors: List[RepresentativePosterior]
    smc_runs: int
    esmda_runs: int

    @property
    def total_runs(self) -> int:
        return self.smc_runs + self.esmda_runs

    @property
    def n_realizations(self) -> int:
        return sum(p.state.size for p in self.posteriors)

    def members(self) -> np.ndarray:
        """All posterior fields stacked, (k * N_e, n_state)."""
        return np.vstack([p.state.members for p in self.posteriors])


def select_representatives(
    population: Population,
    cfg: HierarchicalConfig,
    names,
    seed: int,
) -> List[HyperParams]:
    """Resample the population to equal weights and pick k medoids."""
    ws = WeightedSamples.normalized(population.hypers(), population.weights)
    m = cfg.n_resample or len(ws)
    idx = systematic_resample(ws, m, task_rng(seed, "hier.resample"))
    resampled = [ws.points[i] for i in idx]
    return kmedoids_select(resampled, cfg.n_rep, task_rng(seed, "hier.kmedoids"), names=names, n_init=cfg.n_init)


def initial_ensemble(model, h: HyperParams, n_ensemble: int, seed: int, rep: int) -> EnsembleState:
    """N_e fields generated at one hyperparameter set."""
    fields = [model.realize(h, task_seed(seed, "hier.member", rep, i)) for i in range(n_ensemble)]
    return EnsembleState(members=np.vstack([f.log_k for f in fields]), hyper=h)


def hierarchical_run(
    population: Population,
    model,
    d_obs: DataVector,
    r_diag: np.ndarray,
    esmda_cfg: EsmdaConfig,
    cfg: HierarchicalConfig,
    seed: int,
    names=None,
    smc_runs: int = 0,
    evaluator: Optional[Evaluator] = None,
) -> HierarchicalResult:
    """
    Run ESMDA at each representative of a final SMC-ABC population.

    Args:
        population: Final SMC-ABC population.
        model: Provides ``realize(h, seed)`` and ``state_forward(h)``.
        d_obs: Observed data.
        r_diag: Measurement-error variances.
        esmda_cfg: ESMDA options shared by every representative.
        cfg: Second-stage options.
        seed: Master seed.
        names: Parameters spanning the clustering space (defaults to the active set).
        smc_runs: Forward runs already spent by SMC-ABC, for accounting.
        evaluator: Batch evaluator (serial if omitted).

    Returns:
        HierarchicalResult: k posterior ensembles and run accounting.
    """
    evaluator = evaluator or Evaluator(workers=1)
    names = names or ("mu_logk", "sigma_logk", "log10_ar")
    reps = select_representatives(population, cfg, names, seed)
    logger.info(f"Selected {len(reps)} representative hyperparameter sets")

    start_runs = evaluator.n_runs
    posteriors = []
    for r, h in enumerate(reps):
        initial = initial_ensemble(model, h, esmda_cfg.n_ensemble, seed, r)
        result = esmda_run(
            initial, model.state_forward(h), d_obs, esmda_cfg, seed,
            evaluator=evaluator, r_diag=r_diag, stream=f"hier.esmda.{r}",
        )
        posteriors.append(RepresentativePosterior(hyper=h, result=result))
        logger.info(
            f"Representative {r + 1}/{len(reps)} "
            f"(mu={h.mu_logk:.3f}, sigma={h.sigma_logk:.3f}, log10_ar={h.log10_ar:.3f}) done"
        )
    esmda_runs = evaluator.n_runs - start_runs
    logger.info(f"Hierarchical stage: {esmda_runs} ESMDA runs on top of {smc_runs} SMC-ABC runs")
    return HierarchicalResult(representatives=reps, posteriors=posteriors, smc_runs=smc_runs, esmda_runs=esmda_runs)


@dataclass
class ModifiedEsmdaResult:
    """
    Augmented-state ESMDA posterior.

    Attributes:
        esmda: Posterior ensemble of [log_k..., log10_ar] states.
        prior_hypers: Hyperparameters each member was generated at.
        posterior_hypers: Per-member hyperparameters read off the posterior.
    """

    esmda: EsmdaResult
    prior_hypers: List[HyperParams]
    posterior_hypers: List[HyperParams] = field(default_factory=list)

    @property
    def n_runs(self) -> int:
        return self.esmda.n_runs


def augmented_ensemble(
    prior: HyperPrior,
    model,
    n_ensemble: int,
    seed: int,
) -> Tuple[EnsembleState, List[HyperParams]]:
    """Members drawn at their own prior hyperparameters, log10_ar appended."""
    hypers = [sample_prior(prior, task_rng(seed, "mod.prior", i)) for i in range(n_ensemble)]
    states = [
        np.append(model.realize(h, task_seed(seed, "mod.member", i)).log_k, h.log10_ar)
        for i, h in enumerate(hypers)
    ]
    return EnsembleState(members=np.vstack(states)), hypers


def modified_esmda_run(
    prior: HyperPrior,
    model,
    d_obs: DataVector,
    r_diag: np.ndarray,
    cfg: EsmdaConfig,
    seed: int,
    evaluator: Optional[Evaluator] = None,
) -> ModifiedEsmdaResult:
    """
    Standalone ESMDA with log10 a_r appended to the state.

    Posterior mu_logk and sigma_logk per member are the mean and standard
    deviation of its posterior field; log10_ar is the appended entry.

    Args:
        prior: Hyperprior the initial members are drawn from.
        model: Provides ``realize(h, seed)`` and ``augmented_forward(base)``.
        d_obs: Observed data.
        r_diag: Measurement-error variances.
        cfg: ESMDA options (N_e, alphas).
        seed: Master seed.
        evaluator: Batch evaluator (serial if omitted).

    Returns:
        ModifiedEsmdaResult: Posterior ensemble and per-member hyperparameters.
    """
    initial, prior_hypers = augmented_ensemble(prior, model, cfg.n_ensemble, seed)
    base = prior.midpoint()
    result = esmda_run(
        initial, model.augmented_forward(base), d_obs, cfg, seed,
        evaluator=evaluator, r_diag=r_diag, stream="mod.esmda",
    )
    posterior_hypers = [hyper_from_augmented(m, base) for m in result.state.members]
    return ModifiedEsmdaResult(esmda=result, prior_hypers=prior_hypers, posterior_hypers=posterior_hypers)
