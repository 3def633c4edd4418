"""Samplers: SMC-ABC, rejection sampling, ESMDA and the hierarchical driver."""

from .likelihood import distance, log_likelihood
from .evaluator import Evaluator, task_rng, task_seed
from .smc_abc import Particle, Population, SmcAbcConfig, SmcAbcResult, StopPolicy, smc_abc
from .rejection import RsConfig, RsResult, RsSample, rejection_sampling
from .esmda import (
    ALPHA_PRESETS,
    BUDGET_PRESETS,
    EnsembleState,
    EsmdaConfig,
    EsmdaResult,
    ensemble_prior_norm,
    esmda_run,
    esmda_step,
    objective,
    perturb_observations,
)
from .hierarchical import (
    HierarchicalConfig,
    HierarchicalResult,
    ModifiedEsmdaResult,
    hierarchical_run,
    modified_esmda_run,
)

__all__ = [
    'distance',
    'log_likelihood',
    'Evaluator',
    'task_rng',
    'task_seed',
    'Particle',
    'Population',
    'SmcAbcConfig',
    'SmcAbcResult',
    'StopPolicy',
    'smc_abc',
    'RsConfig',
    'RsResult',
    'RsSample',
    'rejection_sampling',
    'ALPHA_PRESETS',
    'BUDGET_PRESETS',
    'EnsembleState',
    'EsmdaConfig',
    'EsmdaResult',
    'ensemble_prior_norm',
    'esmda_run',
    'esmda_step',
    'objective',
    'perturb_observations',
    'HierarchicalConfig',
    'HierarchicalResult',
    'ModifiedEsmdaResult',
    'hierarchical_run',
    'modified_esmda_run',
]
