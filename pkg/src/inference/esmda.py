"""
Ensemble smoother with multiple data assimilation (ESMDA).

Every assimilation step runs the ensemble forward, perturbs the observations
with inflated noise and applies the ensemble Kalman update

    m_a = m_f + C_md (C_dd + alpha R)^-1 (d_uc - d_f)

with covariances estimated from member anomalies (1 / (N_e - 1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..forward.observation import DataVector, stack_values
from ..geomodel.hyperparams import HyperParams
from ..utils.errors import ConfigError, NumericalError, ShapeMismatch, SingularInnovationMatrix
from ..utils.logger import setup_logger
from .evaluator import Evaluator, task_rng

logger = setup_logger(__name__)

StateForward = Callable[[np.ndarray], DataVector]

ALPHA_PRESETS: Dict[str, Tuple[float, ...]] = {
    "four_step": (9.333, 7.0, 4.0, 2.0),
    "ten_step": (57.017, 35.0, 25.0, 20.0, 18.0, 15.0, 12.0, 8.0, 5.0, 3.0),
    "twenty_step": (
        129.635, 105.0, 95.0, 85.0, 75.0, 65.0, 60.0, 55.0, 50.0, 45.0,
        40.0, 35.0, 30.0, 25.0, 20.0, 15.0, 12.0, 9.0, 6.0, 4.0,
    ),
}

# Standalone budget ladder: (ensemble size, schedule preset).
BUDGET_PRESETS: Dict[str, Tuple[int, str]] = {
    "ne500_na4": (500, "four_step"),
    "ne1000_na4": (1000, "four_step"),
    "ne2500_na10": (2500, "ten_step"),
    "ne5000_na10": (5000, "ten_step"),
    "ne10000_na10": (10000, "ten_step"),
    "ne7500_na20": (7500, "twenty_step"),
    "ne10000_na20": (10000, "twenty_step"),
}

ALPHA_SUM_TOLERANCE = 1e-3


def resolve_alphas(alphas: Union[str, Sequence[float]]) -> Tuple[float, ...]:
    """Expand a schedule preset name or pass an explicit list through."""
    if isinstance(alphas, str):
        if alphas not in ALPHA_PRESETS:
            raise ConfigError("esmda.alphas", f"unknown preset {alphas!r}, expected one of {sorted(ALPHA_PRESETS)}")
        return ALPHA_PRESETS[alphas]
    return tuple(float(a) for a in alphas)


@dataclass(frozen=True)
class EsmdaConfig:
    """
    ESMDA options.

    Attributes:
        n_ensemble: Ensemble size N_e.
        alphas: Inflation coefficients, one per assimilation step.
        r_diag: Measurement-error variances (None to supply them per run).
    """

    n_ensemble: int = 500
    alphas: Tuple[float, ...] = ALPHA_PRESETS["four_step"]
    r_diag: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", resolve_alphas(self.alphas))
        if self.r_diag is not None:
            object.__setattr__(self, "r_diag", tuple(float(r) for r in self.r_diag))
        if self.n_ensemble < 2:
            raise ConfigError("esmda.n_ensemble", f"must be >= 2, got {self.n_ensemble}")
        if not self.alphas:
            raise ConfigError("esmda.alphas", "schedule is empty")
        if min(self.alphas) < 1.0:
            raise ConfigError("esmda.alphas", f"every alpha must be >= 1, got {min(self.alphas)}")
        total = sum(1.0 / a for a in self.alphas)
        if abs(total - 1.0) > ALPHA_SUM_TOLERANCE:
            raise ConfigError(
                "esmda.alphas", f"sum of 1/alpha is {total:.4g}, expected 1 within {ALPHA_SUM_TOLERANCE:g}"
            )

    @property
    def n_steps(self) -> int:
        return len(self.alphas)

    @property
    def run_count(self) -> int:
        return self.n_ensemble * self.n_steps

    @classmethod
    def from_preset(cls, name: str) -> "EsmdaConfig":
        if name not in BUDGET_PRESETS:
            raise ConfigError("modified_esmda.preset", f"unknown preset {name!r}, expected one of {sorted(BUDGET_PRESETS)}")
        n_ensemble, schedule = BUDGET_PRESETS[name]
        return cls(n_ensemble=n_ensemble, alphas=schedule)


@dataclass(frozen=True)
class EnsembleState:
    """
    Ensemble of model states.

    Attributes:
        members: (N_e, n_state) state matrix.
        predicted: Per-member predictions for the current members (None until evaluated).
        hyper: Hyperparameters the ensemble was generated at.
    """

    members: np.ndarray
    predicted: Optional[Tuple[DataVector, ...]] = None
    hyper: Optional[HyperParams] = None

    def __post_init__(self):
        members = np.atleast_2d(np.asarray(self.members, dtype=float))
        object.__setattr__(self, "members", members)
        if self.predicted is not None:
            predicted = tuple(self.predicted)
            object.__setattr__(self, "predicted", predicted)
            if len(predicted) != members.shape[0]:
                raise ShapeMismatch(f"{len(predicted)} predictions for {members.shape[0]} members")

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    @property
    def dim(self) -> int:
        return int(self.members.shape[1])

    def predicted_matrix(self) -> np.ndarray:
        if self.predicted is None:
            raise ShapeMismatch("ensemble predictions have not been evaluated")
        return stack_values(self.predicted)

    def with_members(self, members: np.ndarray) -> "EnsembleState":
        return replace(self, members=members, predicted=None)

    def with_predictions(self, predicted: Sequence[DataVector]) -> "EnsembleState":
        return replace(self, predicted=tuple(predicted))


@dataclass
class EsmdaResult:
    """
    Posterior ensemble plus run accounting.

    Attributes:
        state: Ensemble after the last update (predictions not evaluated).
        n_runs: Forward runs spent assimilating.
        mismatch: Mean squared normalized data mismatch before each step.
    """

    state: EnsembleState
    n_runs: int
    mismatch: List[float] = field(default_factory=list)


def anomalies(x: np.ndarray) -> np.ndarray:
    """Row anomalies scaled by 1 / sqrt(N - 1)."""
    x = np.asarray(x, dtype=float)
    return (x - x.mean(axis=0)) / np.sqrt(x.shape[0] - 1)


def perturb_observations(
    d_obs: DataVector,
    alpha: float,
    r_diag: np.ndarray,
    rng: np.random.Generator,
    z: Optional[np.ndarray] = None,
) -> DataVector:
    """
    d_obs + sqrt(alpha) R^1/2 z with z ~ N(0, I).

    Args:
        d_obs: Observed data.
        alpha: Inflation coefficient (> 0).
        r_diag: Measurement-error variances.
        rng: Random source for z.
        z: Explicit standard-normal draw; overrides ``rng`` (zero for a noise-free test).

    Returns:
        DataVector: Perturbed observations with the layout of ``d_obs``.
    """
    if alpha <= 0:
        raise ConfigError("esmda.alphas", f"alpha must be > 0, got {alpha}")
    if z is None:
        z = rng.standard_normal(len(d_obs))
    return d_obs.with_values(d_obs.values + np.sqrt(alpha) * np.sqrt(np.asarray(r_diag)) * np.asarray(z))


def esmda_step(
    ens: EnsembleState,
    d_obs: DataVector,
    alpha: float,
    r_diag: np.ndarray,
    rng: np.random.Generator,
) -> EnsembleState:
    """
    One ensemble-smoother analysis.

    Args:
        ens: Forecast ensemble with predictions populated.
        d_obs: Observed data.
        alpha: Inflation coefficient of this step.
        r_diag: Measurement-error variances.
        rng: Source of the observation perturbations.

    Returns:
        EnsembleState: Analysis ensemble (predictions cleared).

    Raises:
        ShapeMismatch: If predictions are missing or misaligned.
        SingularInnovationMatrix: If C_dd + alpha R cannot be factorized.
    """
    m_f = ens.members
    d_f = ens.predicted_matrix()
    r_diag = np.asarray(r_diag, dtype=float)
    if d_f.shape[1] != len(d_obs) or r_diag.shape != (len(d_obs),):
        raise ShapeMismatch(
            f"predictions have {d_f.shape[1]} entries, observations {len(d_obs)}, R {r_diag.shape}"
        )
    for y in ens.predicted:
        y.require_same_layout(d_obs)

    delta_m = anomalies(m_f)
    delta_d = anomalies(d_f)
    c_md = delta_m.T @ delta_d
    c_dd = delta_d.T @ delta_d

    d_uc = np.vstack([perturb_observations(d_obs, alpha, r_diag, rng).values for _ in range(ens.size)])
    try:
        factor = linalg.cho_factor(c_dd + alpha * np.diag(r_diag), lower=True)
    except linalg.LinAlgError as e:
        raise SingularInnovationMatrix(f"C_dd + {alpha:g} R is not positive definite") from e
    gain_rhs = linalg.cho_solve(factor, (d_uc - d_f).T)
    m_a = m_f + (c_md @ gain_rhs).T
    return ens.with_members(m_a)


def evaluate_ensemble(ens: EnsembleState, fwd: StateForward, evaluator: Evaluator) -> EnsembleState:
    """Run every member forward and attach the predictions."""
    outputs = evaluator.map(fwd, [(m,) for m in ens.members])
    return ens.with_predictions(outputs)


def esmda_run(
    initial: EnsembleState,
    fwd: StateForward,
    d_obs: DataVector,
    cfg: EsmdaConfig,
    seed: int,
    evaluator: Optional[Evaluator] = None,
    r_diag: Optional[np.ndarray] = None,
    stream: str = "esmda",
) -> EsmdaResult:
    """
    Assimilate ``d_obs`` once per inflation coefficient.

    Args:
        initial: Prior ensemble (N_e members).
        fwd: State-to-observation closure.
        d_obs: Observed data.
        cfg: ESMDA options.
        seed: Master seed for observation perturbations.
        evaluator: Batch evaluator (serial if omitted).
        r_diag: Measurement-error variances; defaults to ``cfg.r_diag``.
        stream: Seed-stream tag separating independent runs under one seed.

    Returns:
        EsmdaResult: Posterior ensemble; N_e * N_a forward runs were spent.
    """
    evaluator = evaluator or Evaluator(workers=1)
    if r_diag is None:
        if cfg.r_diag is None:
            raise ConfigError("esmda.r_diag", "measurement-error variances are required")
        r_diag = np.asarray(cfg.r_diag)
    r_diag = np.asarray(r_diag, dtype=float)
    if initial.size != cfg.n_ensemble:
        raise ConfigError("esmda.n_ensemble", f"initial ensemble has {initial.size} members, expected {cfg.n_ensemble}")

    start_runs = evaluator.n_runs
    state = initial
    mismatch: List[float] = []
    for j, alpha in enumerate(cfg.alphas, start=1):
        try:
            state = evaluate_ensemble(state, fwd, evaluator)
            residual = (state.predicted_matrix() - d_obs.values) ** 2 / r_diag
            mismatch.append(float(np.mean(np.sum(residual, axis=1))))
            state = esmda_step(state, d_obs, alpha, r_diag, task_rng(seed, stream, j))
        except NumericalError as err:
            logger.error(
                f"ESMDA aborted at step {j}/{cfg.n_steps} after {evaluator.n_runs - start_runs} runs"
            )
            err.partial_state = state.with_members(state.members)
            err.completed_steps = j - 1
            err.n_runs = evaluator.n_runs - start_runs
            err.mismatch = tuple(mismatch)
            raise
        logger.info(
            f"ESMDA step {j}/{cfg.n_steps}: alpha={alpha:g}, mean mismatch={mismatch[-1]:.4g}, "
            f"runs={evaluator.n_runs - start_runs}"
        )
    return EsmdaResult(state=state, n_runs=evaluator.n_runs - start_runs, mismatch=mismatch)


def ensemble_prior_norm(prior_members: np.ndarray) -> Callable[[np.ndarray], float]:
    """
    Squared prior norm ||dm||^2_Sigma with Sigma estimated from an ensemble.

    The inverse is the pseudo-inverse of the anomaly covariance, applied
    through a minimum-norm least-squares solve against the anomalies.
    """
    delta_m = anomalies(prior_members)

    def norm(dm: np.ndarray) -> float:
        coeffs = np.linalg.lstsq(delta_m.T, np.asarray(dm, dtype=float), rcond=None)[0]
        return float(coeffs @ coeffs)

    return norm


def objective(
    m: np.ndarray,
    m_bar: np.ndarray,
    prior_norm: Optional[Callable[[np.ndarray], float]],
    y: DataVector,
    d_obs: DataVector,
    r_diag: np.ndarray,
) -> float:
    """
    Regularized data-mismatch objective.

    1/2 ||d_obs - y||^2_R + 1/2 ||m - m_bar||^2_Sigma. Reporting only; the
    smoother never minimizes it directly.

    Args:
        m: Model state.
        m_bar: Prior mean state.
        prior_norm: Squared Sigma-norm (see ``ensemble_prior_norm``); None drops the model term.
        y: Predicted data at ``m``.
        d_obs: Observed data.
        r_diag: Measurement-error variances.

    Raises:
        ShapeMismatch: If dimensions disagree.
    """
    y.require_same_layout(d_obs)
    m = np.asarray(m, dtype=float)
    m_bar = np.asarray(m_bar, dtype=float)
    r_diag = np.asarray(r_diag, dtype=float)
    if m.shape != m_bar.shape:
        raise ShapeMismatch(f"state shapes {m.shape} and {m_bar.shape} differ")
    if r_diag.shape != d_obs.values.shape:
        raise ShapeMismatch(f"R diagonal has shape {r_diag.shape}, data has {d_obs.values.shape}")
    data_term = 0.5 * float(np.sum((d_obs.values - y.values) ** 2 / r_diag))
    model_term = 0.0 if prior_norm is None else 0.5 * prior_norm(m - m_bar)
    return data_term + model_term
