"""
Likelihood-based rejection sampling over hyperparameters.

A pilot phase of prior draws fixes the likelihood bound S_L to the largest
pilot likelihood. The main phase then accepts each fresh prior draw with
probability min(1, likelihood / S_L), evaluated in log space. Draws whose
likelihood exceeds the frozen bound are accepted and counted as bound
violations; the bound is never revised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..forward.observation import DataVector
from ..geomodel.hyperparams import HyperParams, HyperPrior, sample_prior
from ..utils.errors import ConfigError
from ..utils.logger import setup_logger
from .evaluator import Evaluator, task_rng, task_seed
from .likelihood import log_likelihood

logger = setup_logger(__name__)

ForwardFn = Callable[[HyperParams, Tuple[int, ...]], DataVector]


@dataclass(frozen=True)
class RsConfig:
    """
    Rejection-sampling options.

    Attributes:
        budget: Total forward runs, pilot included.
        pilot_count: Runs spent estimating S_L (defaults to 5% of the budget).
        log_bound: Known ln S_L; skips the pilot phase when given.
        batch_size: Proposals evaluated per batch.
        snapshots: Run counts at which the accepted set is recorded.
    """

    budget: int
    pilot_count: Optional[int] = None
    log_bound: Optional[float] = None
    batch_size: int = 1000
    snapshots: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("rejection.budget", f"must be >= 1, got {self.budget}")
        if self.log_bound is None and not 1 <= self.pilot_runs < self.budget:
            raise ConfigError(
                "rejection.pilot_count", f"must lie in [1, budget), got {self.pilot_runs} for budget {self.budget}"
            )
        if self.batch_size < 1:
            raise ConfigError("rejection.batch_size", f"must be >= 1, got {self.batch_size}")
        object.__setattr__(self, "snapshots", tuple(sorted(int(s) for s in self.snapshots)))

    @property
    def pilot_runs(self) -> int:
        if self.log_bound is not None:
            return 0
        if self.pilot_count is not None:
            return int(self.pilot_count)
        return max(1, int(math.ceil(0.05 * self.budget)))


@dataclass(frozen=True)
class RsSample:
    """One accepted prior draw."""

    h: HyperParams
    log_likelihood: float
    seed: Tuple[int, ...]
    run: int


@dataclass
class RsResult:
    """
    Accepted samples and run accounting.

    Attributes:
        accepted: Accepted samples in run order.
        n_runs: Forward runs spent (pilot included).
        n_pilot: Pilot runs.
        log_bound: The frozen ln S_L.
        bound_violations: Main-phase draws whose likelihood exceeded S_L.
        snapshots: (run count, accepted count) at each configured snapshot.
        budget_exhausted: Always True; rejection sampling runs to its budget.
    """

    accepted: List[RsSample]
    n_runs: int
    n_pilot: int
    log_bound: float
    bound_violations: int = 0
    snapshots: List[Tuple[int, int]] = field(default_factory=list)
    budget_exhausted: bool = True

    @property
    def acceptance_rate(self) -> float:
        main = self.n_runs - self.n_pilot
        return len(self.accepted) / main if main > 0 else 0.0

    def accepted_until(self, n_runs: int) -> List[RsSample]:
        """Samples accepted within the first ``n_runs`` forward runs."""
        return [s for s in self.accepted if s.run < n_runs]


def accept(log_u: float, log_lik: float, log_bound: float) -> bool:
    """Acceptance test ln u <= ln l - ln S_L."""
    return log_u <= log_lik - log_bound


def _log_likelihoods(outputs: Sequence[DataVector], d_obs: DataVector, r_diag: np.ndarray) -> np.ndarray:
    return np.array([log_likelihood(y, d_obs, r_diag) for y in outputs])


def rejection_sampling(
    prior: HyperPrior,
    fwd: ForwardFn,
    d_obs: DataVector,
    r_diag: np.ndarray,
    cfg: RsConfig,
    seed: int,
    evaluator: Optional[Evaluator] = None,
) -> RsResult:
    """
    Draw posterior samples by rejection against a pilot-estimated bound.

    Args:
        prior: Hyperprior.
        fwd: Forward closure ``fwd(h, field_seed) -> DataVector``.
        d_obs: Observed data.
        r_diag: Measurement-error variances.
        cfg: Rejection-sampling options.
        seed: Master seed.
        evaluator: Batch evaluator (serial if omitted).

    Returns:
        RsResult: Accepted samples; total runs equal ``cfg.budget`` exactly.
    """
    evaluator = evaluator or Evaluator(workers=1)
    start_runs = evaluator.n_runs
    r_diag = np.asarray(r_diag, dtype=float)

    n_pilot = cfg.pilot_runs
    if n_pilot:
        hypers = [sample_prior(prior, task_rng(seed, "rs.pilot", k)) for k in range(n_pilot)]
        seeds = [task_seed(seed, "rs.pilot.field", k) for k in range(n_pilot)]
        log_liks = _log_likelihoods(evaluator.map(fwd, list(zip(hypers, seeds))), d_obs, r_diag)
        log_bound = float(np.max(log_liks))
        logger.info(f"RS pilot: {n_pilot} runs, ln S_L = {log_bound:.4f}")
    else:
        log_bound = float(cfg.log_bound)

    accepted: List[RsSample] = []
    violations = 0
    run = n_pilot
    k = 0
    while run < cfg.budget:
        size = min(cfg.batch_size, cfg.budget - run)
        rngs = [task_rng(seed, "rs.proposal", k + b) for b in range(size)]
        hypers = [sample_prior(prior, r) for r in rngs]
        log_us = [float(np.log(r.random())) for r in rngs]
        seeds = [task_seed(seed, "rs.field", k + b) for b in range(size)]
        log_liks = _log_likelihoods(evaluator.map(fwd, list(zip(hypers, seeds))), d_obs, r_diag)
        for b in range(size):
            if log_liks[b] > log_bound:
                violations += 1
            if accept(log_us[b], log_liks[b], log_bound):
                accepted.append(RsSample(h=hypers[b], log_likelihood=float(log_liks[b]), seed=seeds[b], run=run + b))
        run += size
        k += size
        logger.debug(f"RS: {run}/{cfg.budget} runs, {len(accepted)} accepted")

    if violations:
        logger.warning(f"RS: {violations} draws exceeded the pilot likelihood bound")
    n_runs = evaluator.n_runs - start_runs
    snapshots = [(s, sum(1 for a in accepted if a.run < s)) for s in cfg.snapshots if s <= cfg.budget]
    logger.info(f"RS finished: {len(accepted)} accepted from {n_runs} runs")
    return RsResult(
        accepted=accepted,
        n_runs=n_runs,
        n_pilot=n_pilot,
        log_bound=log_bound,
        bound_violations=violations,
        snapshots=snapshots,
    )
