import numpy as np
import pytest

from conftest import LinearStateForward
from src.forward.observation import DataVector
from src.inference.esmda import (
    ALPHA_PRESETS,
    BUDGET_PRESETS,
    EnsembleState,
    EsmdaConfig,
    ensemble_prior_norm,
    esmda_run,
    esmda_step,
    objective,
    perturb_observations,
)
from src.inference.evaluator import Evaluator
from src.utils.errors import ConfigError, ShapeMismatch, SingularInnovationMatrix

G = ((1.0, 0.5), (0.0, 1.0))
R_DIAG = np.array([0.5, 0.5])
D_OBS = DataVector(values=[1.0, -0.5], channels=("pressure", "pressure"), times=(1.0, 2.0))


def prior_ensemble(n, seed=0):
    return EnsembleState(members=np.random.default_rng(seed).standard_normal((n, 2)))


@pytest.mark.parametrize("name", sorted(ALPHA_PRESETS))
def test_alpha_presets_sum_to_one(name):
    assert sum(1.0 / a for a in ALPHA_PRESETS[name]) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("name", sorted(BUDGET_PRESETS))
def test_budget_presets_resolve(name):
    cfg = EsmdaConfig.from_preset(name)
    n_ensemble, schedule = BUDGET_PRESETS[name]
    assert cfg.run_count == n_ensemble * len(ALPHA_PRESETS[schedule])


def test_unknown_budget_preset():
    with pytest.raises(ConfigError, match="modified_esmda.preset"):
        EsmdaConfig.from_preset("ne3_na1")


@pytest.mark.parametrize("kwargs, fragment", [
    ({"n_ensemble": 1}, "esmda.n_ensemble"),
    ({"alphas": ()}, "empty"),
    ({"alphas": (0.5, 2.0)}, ">= 1"),
    ({"alphas": (2.0, 3.0)}, "sum of 1/alpha"),
    ({"alphas": "five_step"}, "unknown preset"),
])
def test_config_validation(kwargs, fragment):
    with pytest.raises(ConfigError, match=fragment):
        EsmdaConfig(**kwargs)


def test_single_step_with_alpha_one_is_allowed():
    assert EsmdaConfig(n_ensemble=4, alphas=(1.0,)).n_steps == 1


def test_zero_perturbation_returns_observations():
    d = perturb_observations(D_OBS, 4.0, R_DIAG, np.random.default_rng(0), z=np.zeros(2))
    np.testing.assert_array_equal(d.values, D_OBS.values)
    d = perturb_observations(D_OBS, 4.0, np.array([0.25, 0.25]), np.random.default_rng(0), z=np.ones(2))
    np.testing.assert_allclose(d.values, D_OBS.values + 1.0)
    assert d.channels == D_OBS.channels


def test_perturbation_variance_is_alpha_times_r():
    alpha, r_diag = 4.0, np.array([0.5, 2.0])
    rng = np.random.default_rng(21)
    draws = np.vstack([perturb_observations(D_OBS, alpha, r_diag, rng).values for _ in range(100_000)])
    noise = draws - D_OBS.values
    np.testing.assert_allclose(noise.var(axis=0), alpha * r_diag, rtol=0.02)
    assert abs(np.corrcoef(noise.T)[0, 1]) < 0.02
    # Consecutive draws (members) are uncorrelated too.
    assert abs(np.corrcoef(noise[:-1, 0], noise[1:, 0])[0, 1]) < 0.02


def test_perturbation_rejects_non_positive_alpha():
    with pytest.raises(ConfigError):
        perturb_observations(D_OBS, 0.0, R_DIAG, np.random.default_rng(0))


def test_run_count_and_determinism():
    cfg = EsmdaConfig(n_ensemble=50, alphas="four_step")
    evaluator = Evaluator(workers=1)
    a = esmda_run(prior_ensemble(50), LinearStateForward(G), D_OBS, cfg, 4, evaluator, R_DIAG)
    b = esmda_run(prior_ensemble(50), LinearStateForward(G), D_OBS, cfg, 4, r_diag=R_DIAG)
    assert a.n_runs == 200
    assert evaluator.n_runs == 200
    assert len(a.mismatch) == 4
    assert a.mismatch[-1] < a.mismatch[0]
    np.testing.assert_array_equal(a.state.members, b.state.members)
    assert a.state.predicted is None


def test_streams_separate_runs_under_one_seed():
    cfg = EsmdaConfig(n_ensemble=20, alphas="four_step")
    a = esmda_run(prior_ensemble(20), LinearStateForward(G), D_OBS, cfg, 4, r_diag=R_DIAG, stream="rep.0")
    b = esmda_run(prior_ensemble(20), LinearStateForward(G), D_OBS, cfg, 4, r_diag=R_DIAG, stream="rep.1")
    assert not np.array_equal(a.state.members, b.state.members)


KALMAN_OBS = DataVector(values=[3.0, -2.0], channels=("pressure", "pressure"), times=(1.0, 2.0))


@pytest.mark.parametrize("alphas", [(1.0,), "four_step"])
def test_linear_gaussian_posterior_matches_kalman(alphas):
    g = np.array(G)
    gain = g.T @ np.linalg.inv(g @ g.T + np.diag(R_DIAG))
    mean = gain @ KALMAN_OBS.values
    cov = np.eye(2) - gain @ g

    cfg = EsmdaConfig(n_ensemble=10_000, alphas=alphas)
    result = esmda_run(prior_ensemble(10_000, seed=1), LinearStateForward(G), KALMAN_OBS, cfg, 8, r_diag=R_DIAG)
    members = result.state.members
    assert np.linalg.norm(members.mean(axis=0) - mean) <= 0.02 * np.linalg.norm(mean)
    assert np.trace(np.cov(members.T)) == pytest.approx(np.trace(cov), rel=0.05)
    np.testing.assert_allclose(np.cov(members.T), cov, atol=0.05)


def test_missing_measurement_error_is_a_config_error():
    with pytest.raises(ConfigError, match="esmda.r_diag"):
        esmda_run(prior_ensemble(4), LinearStateForward(G), D_OBS, EsmdaConfig(n_ensemble=4), 0)


def test_ensemble_size_must_match_config():
    with pytest.raises(ConfigError, match="esmda.n_ensemble"):
        esmda_run(prior_ensemble(5), LinearStateForward(G), D_OBS, EsmdaConfig(n_ensemble=4), 0, r_diag=R_DIAG)


def test_constant_forward_without_noise_is_singular():
    flat = LinearStateForward(((0.0, 0.0),))
    d_obs = DataVector(values=[1.0], channels=("pressure",), times=(1.0,))
    ens = prior_ensemble(5)
    ens = ens.with_predictions([flat(m) for m in ens.members])
    with pytest.raises(SingularInnovationMatrix):
        esmda_step(ens, d_obs, 2.0, np.zeros(1), np.random.default_rng(0))


def test_step_without_state_data_covariance_keeps_the_forecast():
    flat = LinearStateForward(((0.0, 0.0),))
    d_obs = DataVector(values=[1.0], channels=("pressure",), times=(1.0,))
    ens = prior_ensemble(6)
    ens = ens.with_predictions([flat(m) for m in ens.members])
    analysis = esmda_step(ens, d_obs, 2.0, np.array([0.5]), np.random.default_rng(0))
    np.testing.assert_array_equal(analysis.members, ens.members)


def test_numerical_failure_carries_the_last_good_ensemble():
    flat = LinearStateForward(((0.0, 0.0),))
    d_obs = DataVector(values=[1.0], channels=("pressure",), times=(1.0,))
    initial = prior_ensemble(5)
    with pytest.raises(SingularInnovationMatrix) as info:
        esmda_run(initial, flat, d_obs, EsmdaConfig(n_ensemble=5, alphas=(1.0,)), 0, r_diag=np.zeros(1))
    err = info.value
    np.testing.assert_array_equal(err.partial_state.members, initial.members)
    assert err.completed_steps == 0
    assert err.n_runs == 5
    assert len(err.mismatch) == 1


def test_step_needs_predictions():
    with pytest.raises(ShapeMismatch):
        esmda_step(prior_ensemble(5), D_OBS, 2.0, R_DIAG, np.random.default_rng(0))


def test_prior_norm_uses_ensemble_covariance():
    members = np.random.default_rng(2).normal(size=(200, 3)) * [1.0, 2.0, 0.5]
    norm = ensemble_prior_norm(members)
    dm = np.array([0.3, -1.0, 0.2])
    expected = dm @ np.linalg.pinv(np.cov(members.T)) @ dm
    assert norm(dm) == pytest.approx(expected, rel=1e-8)


def test_objective_terms():
    y = D_OBS.with_values([0.0, 0.0])
    m = np.array([1.0, 2.0])
    assert objective(m, m, None, y, D_OBS, R_DIAG) == pytest.approx(0.5 * (1.0 / 0.5 + 0.25 / 0.5))
    unit = lambda dm: float(dm @ dm)
    assert objective(m, np.zeros(2), unit, D_OBS, D_OBS, R_DIAG) == pytest.approx(2.5)
    with pytest.raises(ShapeMismatch):
        objective(m, np.zeros(3), None, y, D_OBS, R_DIAG)
