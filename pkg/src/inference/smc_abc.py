"""
Sequential Monte Carlo approximate Bayesian computation over hyperparameters.

Iteration 1 accepts N prior draws with equal weights. Later iterations
propose from the weighted previous population perturbed by a Gaussian kernel
with twice the weighted population covariance, keep proposals whose distance
to the observed data is within the current threshold, and reweight them
against the mixture proposal density. The next threshold is the median of
the accepted distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from ..forward.observation import DataVector, NoiseModel
from ..geomodel.hyperparams import HyperParams, HyperPrior, sample_prior
from ..utils.errors import ConfigError, DegenerateKernel
from ..utils.logger import setup_logger
from .evaluator import Evaluator, task_rng, task_seed
from .likelihood import distance

logger = setup_logger(__name__)

ForwardFn = Callable[[HyperParams, Tuple[int, ...]], DataVector]

_MIXTURE_CHUNK = 256


@dataclass(frozen=True)
class Particle:
    """One accepted hyperparameter sample."""

    h: HyperParams
    weight: float
    distance: float
    seed: Tuple[int, ...]


@dataclass(frozen=True)
class Population:
    """
    Accepted particles of one completed iteration.

    Attributes:
        particles: N particles with normalized weights.
        t: Iteration index (1-based).
        epsilon: Threshold the particles were accepted under (inf for t = 1).
        next_epsilon: Median of the accepted distances.
        weighted_cov: Weighted covariance of the active hyperparameters.
        accept_rate: Accepted / evaluated proposals in this iteration.
        n_evaluated: Forward runs spent in this iteration.
        n_runs: Cumulative forward runs after this iteration.
    """

    particles: Tuple[Particle, ...]
    t: int
    epsilon: float
    next_epsilon: float
    weighted_cov: np.ndarray
    accept_rate: float
    n_evaluated: int
    n_runs: int

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.particles])

    @property
    def distances(self) -> np.ndarray:
        return np.array([p.distance for p in self.particles])

    def hypers(self) -> List[HyperParams]:
        return [p.h for p in self.particles]

    def vectors(self, names) -> np.ndarray:
        return np.vstack([p.h.vector(names) for p in self.particles])

    def effective_size(self) -> float:
        w = self.weights
        return float(1.0 / np.sum(w ** 2))


@dataclass(frozen=True)
class StopPolicy:
    """
    Termination rules, whichever triggers first.

    Attributes:
        rate: Stop after an iteration whose acceptance rate is below this.
        max_iterations: Hard iteration cap.
        budget: Hard cap on forward runs (None for unlimited).
    """

    rate: float = 0.05
    max_iterations: int = 12
    budget: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ConfigError("smc_abc.stop_rate", f"must lie in [0, 1), got {self.rate}")
        if self.max_iterations < 1:
            raise ConfigError("smc_abc.max_iterations", f"must be >= 1, got {self.max_iterations}")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("smc_abc.budget", f"must be >= 1, got {self.budget}")


@dataclass(frozen=True)
class SmcAbcConfig:
    """
    Sampler options.

    Attributes:
        n_particles: Population size N.
        stop: Termination policy.
        batch_size: Proposals evaluated per batch (defaults to N).
        jitter: Relative kernel jitter, scaled by the squared prior ranges.
        max_support_retries: Draws allowed per proposal to land inside the prior box.
    """

    n_particles: int = 500
    stop: StopPolicy = field(default_factory=StopPolicy)
    batch_size: Optional[int] = None
    jitter: float = 1e-8
    max_support_retries: int = 100_000

    def __post_init__(self):
        if self.n_particles < 2:
            raise ConfigError("smc_abc.n_particles", f"must be >= 2, got {self.n_particles}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("smc_abc.batch_size", f"must be >= 1, got {self.batch_size}")

    @property
    def batch(self) -> int:
        return self.batch_size or self.n_particles


@dataclass
class SmcAbcResult:
    """
    Completed iterations plus run accounting.

    Attributes:
        populations: One Population per completed iteration.
        n_runs: Forward runs spent, including any unfinished iteration.
        budget_exhausted: True when the budget stopped the sampler.
        stop_reason: "acceptance_rate", "max_iterations" or "budget".
    """

    populations: List[Population]
    n_runs: int
    budget_exhausted: bool
    stop_reason: str

    @property
    def final(self) -> Optional[Population]:
        return self.populations[-1] if self.populations else None

    @property
    def thresholds(self) -> List[float]:
        return [p.epsilon for p in self.populations]


def weighted_covariance(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted covariance (normalized by the weight sum) of row samples."""
    w = np.asarray(w, dtype=float) / np.sum(w)
    mean = w @ x
    centered = x - mean
    return centered.T @ (centered * w[:, None])


def kernel_factor(cov: np.ndarray, ranges: np.ndarray, jitter: float) -> np.ndarray:
    """
    Lower Cholesky factor of the kernel covariance 2 * cov.

    Falls back to adding ``jitter * ranges**2`` on the diagonal when 2 * cov is
    not positive definite.

    Raises:
        DegenerateKernel: If the jittered covariance still cannot be factorized.
    """
    kernel = 2.0 * np.atleast_2d(cov)
    try:
        return linalg.cholesky(kernel, lower=True)
    except linalg.LinAlgError:
        logger.warning("Kernel covariance is singular, adding diagonal jitter")
    try:
        return linalg.cholesky(kernel + np.diag(jitter * ranges ** 2), lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateKernel("kernel covariance is singular even after jitter") from e


def log_kernel_mixture(x: np.ndarray, centers: np.ndarray, log_w: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """
    Log density of a Gaussian mixture with shared covariance L L^T.

    Args:
        x: (n, d) evaluation points.
        centers: (N, d) component means.
        log_w: (N,) log mixture weights.
        factor: Lower Cholesky factor of the component covariance.

    Returns:
        np.ndarray: (n,) log densities.
    """
    d = centers.shape[1]
    log_norm = -0.5 * d * np.log(2.0 * np.pi) - np.sum(np.log(np.diag(factor)))
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], _MIXTURE_CHUNK):
        block = x[start:start + _MIXTURE_CHUNK]
        diff = block[:, None, :] - centers[None, :, :]
        z = linalg.solve_triangular(factor, diff.reshape(-1, d).T, lower=True).T.reshape(diff.shape)
        log_k = log_norm - 0.5 * np.sum(z ** 2, axis=2)
        out[start:start + _MIXTURE_CHUNK] = logsumexp(log_k + log_w[None, :], axis=1)
    return out


def _propose(
    prior: HyperPrior,
    prev: Population,
    centers: np.ndarray,
    factor: np.ndarray,
    rng: np.random.Generator,
    max_retries: int,
) -> np.ndarray:
    """Draw from the kernel mixture until the point lies inside the prior box."""
    w = prev.weights
    for _ in range(max_retries):
        j = rng.choice(len(w), p=w)
        candidate = centers[j] + factor @ rng.standard_normal(centers.shape[1])
        if prior.contains(candidate):
            return candidate
    raise DegenerateKernel(f"no proposal inside the prior box after {max_retries} draws")


def smc_abc(
    prior: HyperPrior,
    fwd: ForwardFn,
    d_obs: DataVector,
    nm: NoiseModel,
    cfg: SmcAbcConfig,
    seed: int,
    evaluator: Optional[Evaluator] = None,
) -> SmcAbcResult:
    """
    Run SMC-ABC until the acceptance rate, iteration cap or budget stops it.

    Args:
        prior: Hyperprior (active parameters are inferred).
        fwd: Forward closure ``fwd(h, field_seed) -> DataVector``.
        d_obs: Observed data.
        nm: Noise model normalizing the distance.
        cfg: Sampler options.
        seed: Master seed; every proposal and field draw derives from it.
        evaluator: Batch evaluator (serial if omitted).

    Returns:
        SmcAbcResult: Completed populations and run accounting.
    """
    evaluator = evaluator or Evaluator(workers=1)
    start_runs = evaluator.n_runs
    n = cfg.n_particles
    names = prior.active
    budget = cfg.stop.budget
    populations: List[Population] = []

    def remaining() -> Optional[int]:
        return None if budget is None else budget - (evaluator.n_runs - start_runs)

    def result(reason: str) -> SmcAbcResult:
        exhausted = reason == "budget"
        if exhausted:
            logger.warning(f"SMC-ABC budget of {budget} runs exhausted after {len(populations)} iterations")
        return SmcAbcResult(
            populations=populations,
            n_runs=evaluator.n_runs - start_runs,
            budget_exhausted=exhausted,
            stop_reason=reason,
        )

    # Iteration 1: prior draws, all accepted.
    left = remaining()
    if left is not None and left < n:
        return result("budget")
    hypers = [sample_prior(prior, task_rng(seed, "smc.proposal", 1, k)) for k in range(n)]
    seeds = [task_seed(seed, "smc.field", 1, k) for k in range(n)]
    outputs = evaluator.map(fwd, list(zip(hypers, seeds)))
    dists = np.array([distance(y, d_obs, nm) for y in outputs])
    particles = tuple(
        Particle(h=h, weight=1.0 / n, distance=float(dm), seed=s)
        for h, dm, s in zip(hypers, dists, seeds)
    )
    populations.append(_population(particles, 1, np.inf, 1.0, n, evaluator.n_runs - start_runs, names))
    _log_population(populations[-1])

    t = 1
    while True:
        prev = populations[-1]
        if prev.accept_rate < cfg.stop.rate:
            return result("acceptance_rate")
        if t >= cfg.stop.max_iterations:
            return result("max_iterations")
        t += 1
        epsilon = prev.next_epsilon
        centers = prev.vectors(names)
        factor = kernel_factor(prev.weighted_cov, prior.ranges, cfg.jitter)

        accepted: List[Tuple[np.ndarray, float, Tuple[int, ...]]] = []
        n_evaluated = 0
        n_within = 0
        k = 0
        while len(accepted) < n:
            size = cfg.batch
            left = remaining()
            if left is not None:
                if left <= 0:
                    return result("budget")
                size = min(size, left)
            vectors = [
                _propose(prior, prev, centers, factor, task_rng(seed, "smc.proposal", t, k + b), cfg.max_support_retries)
                for b in range(size)
            ]
            seeds = [task_seed(seed, "smc.field", t, k + b) for b in range(size)]
            outputs = evaluator.map(fwd, [(prior.build(v), s) for v, s in zip(vectors, seeds)])
            k += size
            n_evaluated += size
            for v, s, y in zip(vectors, seeds, outputs):
                dm = distance(y, d_obs, nm)
                if dm <= epsilon:
                    n_within += 1
                    if len(accepted) < n:
                        accepted.append((v, dm, s))

        x = np.vstack([a[0] for a in accepted])
        log_prior = np.array([prior.log_density(v) for v in x])
        log_q = log_kernel_mixture(x, centers, np.log(prev.weights), factor)
        log_w = log_prior - log_q
        w = np.exp(log_w - logsumexp(log_w))
        particles = tuple(
            Particle(h=prior.build(v), weight=float(wi), distance=float(dm), seed=s)
            for (v, dm, s), wi in zip(accepted, w)
        )
        populations.append(
            _population(particles, t, epsilon, n_within / n_evaluated, n_evaluated,
                        evaluator.n_runs - start_runs, names)
        )
        _log_population(populations[-1])


def _population(particles, t, epsilon, accept_rate, n_evaluated, n_runs, names) -> Population:
    x = np.vstack([p.h.vector(names) for p in particles])
    w = np.array([p.weight for p in particles])
    dists = np.array([p.distance for p in particles])
    return Population(
        particles=particles,
        t=t,
        epsilon=float(epsilon),
        next_epsilon=float(np.quantile(dists, 0.5, method="lower")),
        weighted_cov=weighted_covariance(x, w),
        accept_rate=float(accept_rate),
        n_evaluated=int(n_evaluated),
        n_runs=int(n_runs),
    )


def _log_population(pop: Population) -> None:
    logger.info(
        f"SMC-ABC iteration {pop.t}: epsilon={pop.epsilon:.4g}, "
        f"acceptance={pop.accept_rate:.3f}, ESS={pop.effective_size():.1f}, runs={pop.n_runs}"
    )
