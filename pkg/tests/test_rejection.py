import numpy as np
import pytest
from scipy.stats import ks_2samp, kstest, truncnorm, uniform

from conftest import ConstantForward, GaussianToyForward
from src.forward.observation import DataVector
from src.inference.evaluator import Evaluator
from src.geomodel.hyperparams import HyperPrior
from src.inference.rejection import RsConfig, accept, rejection_sampling
from src.utils.errors import ConfigError

D_OBS = DataVector(values=[3.3], channels=("pressure",), times=(1.0,))
R_DIAG = np.array([0.25])


def test_accept_compares_in_log_space():
    assert accept(np.log(0.5), np.log(0.6), 0.0)
    assert not accept(np.log(0.7), np.log(0.6), 0.0)
    assert accept(0.0, 1.0, 0.5)  # above the bound always passes
    assert all(accept(np.log(u), -3.2, -3.2) for u in (1e-9, 0.5, 1.0))


def test_pilot_defaults_to_five_percent():
    assert RsConfig(budget=1000).pilot_runs == 50
    assert RsConfig(budget=10).pilot_runs == 1
    assert RsConfig(budget=10, log_bound=0.0).pilot_runs == 0


@pytest.mark.parametrize("kwargs, path", [
    ({"budget": 0}, "rejection.budget"),
    ({"budget": 10, "pilot_count": 10}, "rejection.pilot_count"),
    ({"budget": 10, "pilot_count": 0}, "rejection.pilot_count"),
    ({"budget": 10, "batch_size": 0}, "rejection.batch_size"),
])
def test_config_validation(kwargs, path):
    with pytest.raises(ConfigError, match=path):
        RsConfig(**kwargs)


def test_runs_exactly_the_budget(mu_only_prior):
    evaluator = Evaluator(workers=1)
    cfg = RsConfig(budget=137, pilot_count=11, batch_size=40, snapshots=(100, 50))
    result = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, cfg, 3, evaluator)
    assert result.n_runs == 137
    assert evaluator.n_runs == 137
    assert result.n_pilot == 11
    assert result.budget_exhausted
    assert [count for count, _ in result.snapshots] == [50, 100]
    for count, n_accepted in result.snapshots:
        assert n_accepted == len(result.accepted_until(count))
    assert all(11 <= s.run < 137 for s in result.accepted)


def test_known_bound_skips_pilot(mu_only_prior):
    # The maximum of N(3.3; mu, 0.25) over mu is the density at its mode.
    log_bound = -0.5 * np.log(2 * np.pi * 0.25)
    cfg = RsConfig(budget=200, log_bound=log_bound)
    result = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, cfg, 5)
    assert result.n_pilot == 0
    assert result.n_runs == 200
    assert result.bound_violations == 0
    assert result.log_bound == log_bound


def test_same_seed_same_samples(mu_only_prior):
    cfg = RsConfig(budget=300, pilot_count=20, batch_size=64)
    a = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, cfg, 11)
    b = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, cfg, 11)
    assert [s.h for s in a.accepted] == [s.h for s in b.accepted]
    assert [s.run for s in a.accepted] == [s.run for s in b.accepted]


def test_batch_size_does_not_change_samples(mu_only_prior):
    small = RsConfig(budget=300, pilot_count=20, batch_size=7)
    large = RsConfig(budget=300, pilot_count=20, batch_size=500)
    a = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, small, 11)
    b = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, large, 11)
    assert [s.h for s in a.accepted] == [s.h for s in b.accepted]


def test_posterior_matches_truncated_normal(mu_only_prior):
    cfg = RsConfig(budget=20000, pilot_count=1000, batch_size=5000)
    result = rejection_sampling(mu_only_prior, GaussianToyForward(0.0), D_OBS, R_DIAG, cfg, 2)
    x = np.array([s.h.mu_logk for s in result.accepted])
    exact = truncnorm((2.5 - 3.3) / 0.5, (4.5 - 3.3) / 0.5, loc=3.3, scale=0.5)
    assert len(x) > 5000
    assert 0.3 < result.acceptance_rate < 0.9
    assert x.mean() == pytest.approx(exact.mean(), abs=4 * exact.std() / np.sqrt(len(x)) + 0.005)
    assert x.std() == pytest.approx(exact.std(), rel=0.05)
    reference = exact.rvs(size=1000, random_state=np.random.default_rng(0))
    assert ks_2samp(x[:1000], reference).pvalue > 0.01


def test_flat_likelihood_accepts_uniformly_over_the_prior_box():
    prior = HyperPrior()
    cfg = RsConfig(budget=1053, pilot_count=53, batch_size=256)
    result = rejection_sampling(prior, ConstantForward(), D_OBS, R_DIAG, cfg, 17)
    assert len(result.accepted) == 1000
    assert result.bound_violations == 0
    values = np.vstack([prior.active_vector(s.h) for s in result.accepted])
    for col, (lo, hi) in enumerate(zip(prior.lower, prior.upper)):
        assert kstest(values[:, col], uniform(loc=lo, scale=hi - lo).cdf).pvalue > 1e-3
