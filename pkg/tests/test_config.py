import importlib.util
import json
from pathlib import Path

import numpy as np
import pytest

from conftest import tiny_config_dict
from src.config import load_config, parse_config
from src.geomodel.hyperparams import HyperPrior
from src.utils.errors import ConfigError


@pytest.mark.parametrize("name, truth", [
    ("desk_twin_tm1", {"mu_logk": 3.3, "sigma_logk": 0.9, "log10_ar": -0.5}),
    ("desk_twin_tm2", {"mu_logk": 2.7, "sigma_logk": 1.2, "log10_ar": -1.7}),
])
def test_bundled_configs_load(name, truth):
    cfg = load_config(name)
    assert cfg.name == name
    assert cfg.sim.grid.n_cells == 16 * 16 * 4
    assert cfg.prior.active == ("mu_logk", "sigma_logk", "log10_ar")
    assert cfg.smc.n_particles == 500
    assert cfg.rejection.budget == 200_000
    assert cfg.esmda.run_count == 2000
    assert cfg.hierarchical.n_rep * cfg.esmda.run_count == 20_000
    assert cfg.modified_esmda.n_ensemble == 500
    h = cfg.truth.resolve(cfg.prior, np.random.default_rng(0))
    assert {k: getattr(h, k) for k in truth} == truth
    assert h.corr_len_h == 8.0


def test_config_file_on_disk(tiny_config_file):
    cfg = load_config(tiny_config_file)
    assert cfg.name == "tiny"
    assert cfg.seed == 7
    assert cfg.schedule.indices == (0, 1, 2)
    assert cfg.rejection.snapshots == (30, 60)
    assert cfg.raw["seed"] == 7


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="file not found"):
        load_config(tmp_path / "nope.json")


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path)


def test_with_seed_updates_raw_document():
    cfg = parse_config(tiny_config_dict()).with_seed(99)
    assert cfg.seed == 99
    assert cfg.raw["seed"] == 99
    assert json.loads(json.dumps(cfg.raw))["seed"] == 99


@pytest.mark.parametrize("overrides, path", [
    ({"bogus": 1}, "bogus"),
    ({"seed": 1.5}, "seed"),
    ({"smc_abc": {"n_particles": 20, "foo": 1}}, "smc_abc.foo"),
    ({"smc_abc": {"n_particles": 1}}, "smc_abc.n_particles"),
    ({"smc_abc": {"stop_rate": 1.5}}, "smc_abc.stop_rate"),
    ({"esmda": {"n_ensemble": 6, "alphas": [2.0, 3.0]}}, "esmda.alphas"),
    ({"modified_esmda": {"n_ensemble": 6, "alphas": [2.0, 3.0]}}, "modified_esmda.alphas"),
    ({"modified_esmda": {"n_ensemble": 1}}, "modified_esmda.n_ensemble"),
    ({"modified_esmda": {"preset": "ne500_na4", "n_ensemble": 6}}, "modified_esmda"),
    ({"modified_esmda": {"preset": "huge"}}, "modified_esmda.preset"),
    ({"rejection": {"budget": 10, "pilot_count": 10}}, "rejection.pilot_count"),
    ({"hierarchical": {"n_rep": 0}}, "hierarchical.n_rep"),
    ({"observation": {"times": [1.5]}}, "observation.times"),
    ({"observation": {"times": [1.0], "layers": [5]}}, "observation.layers"),
    ({"truth": {"preset": "true_model_9"}}, "truth.preset"),
    ({"truth": {"preset": "true_model_1", "values": {"mu_logk": 3.0}}}, "truth"),
    ({"prior": {"bounds": {"mu_logk": [4.5, 2.5]}}}, "prior.bounds.mu_logk"),
    ({"prior": {"active": ["mu_logk", "kappa"]}}, "prior.active"),
    ({"diagnostics": {"bins": 0}}, "diagnostics.bins"),
    ({"forecast": {"members": 1}}, "forecast.members"),
    ({"variogram": {"cell_cap": 10}}, "grid"),
])
def test_invalid_keys_name_their_path(overrides, path):
    with pytest.raises(ConfigError) as info:
        parse_config(tiny_config_dict(**overrides))
    assert info.value.path == path


def test_preset_runs_match_the_budget_ladder():
    cfg = parse_config(tiny_config_dict(modified_esmda={"preset": "ne2500_na10"}))
    assert cfg.modified_esmda.n_ensemble == 2500
    assert cfg.modified_esmda.run_count == 25_000


def test_truth_values_override_the_midpoint():
    cfg = parse_config(tiny_config_dict(truth={"values": {"mu_logk": 3.0}}))
    h = cfg.truth.resolve(cfg.prior, np.random.default_rng(0))
    assert h.mu_logk == 3.0
    assert h.sigma_logk == pytest.approx(1.25)
    assert cfg.truth.mode == "values"


def test_sampled_truth_is_inside_the_prior():
    cfg = parse_config(tiny_config_dict(truth={}))
    h = cfg.truth.resolve(cfg.prior, np.random.default_rng(0))
    assert cfg.prior.contains(cfg.prior.active_vector(h))
    assert cfg.truth.mode == "sampled"


def test_default_prior_matches_the_bundled_box():
    assert parse_config(tiny_config_dict()).prior == HyperPrior()


def _fresh_settings():
    path = Path(__file__).resolve().parent.parent / "src" / "config" / "settings.py"
    spec = importlib.util.spec_from_file_location("settings_under_test", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module.settings


def test_log_file_is_read_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("LOG_FILE", str(tmp_path / "hda.log"))
    assert _fresh_settings().LOG_FILE == str(tmp_path / "hda.log")


def test_log_file_defaults_to_empty(monkeypatch):
    monkeypatch.delenv("LOG_FILE", raising=False)
    assert _fresh_settings().LOG_FILE == ""
