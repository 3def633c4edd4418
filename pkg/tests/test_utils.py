import json
import logging

import numpy as np
import pandas as pd

from src.geomodel.field import factor_cache_stats, generate_field
from src.geomodel.hyperparams import GridSpec, HyperParams
from src.utils.artifacts import hash_file, read_json, write_csv, write_json, write_manifest
from src.utils.cache import FactorCache, stable_cache_key
from src.utils.logger import set_level, setup_logger


def test_cache_evicts_least_recently_used():
    cache = FactorCache(max_items=2)
    cache.set("a", 1)
    cache.set("b", 2)
    assert cache.get("a") == 1
    cache.set("c", 3)
    assert cache.get("b") is None
    assert cache.get("a") == 1 and cache.get("c") == 3
    stats = cache.stats()
    assert (stats.hits, stats.misses, stats.items) == (3, 1, 2)


def test_get_or_compute_calls_once():
    cache = FactorCache()
    calls = []
    for _ in range(3):
        cache.get_or_compute("k", lambda: calls.append(1) or "value")
    assert len(calls) == 1


def test_cache_keys_keep_float_precision():
    assert stable_cache_key(0.1, None, "x") == "0.1||x"
    assert stable_cache_key(0.1) != stable_cache_key(0.1 + 1e-17 * 10)


def test_fields_share_a_correlation_factor():
    grid = GridSpec(3, 3, 1, 10.0, 10.0, 1.0)
    h = HyperParams(mu_logk=3.0, sigma_logk=1.0, log10_ar=-1.0, corr_len_h=7.25, porosity=0.2)
    generate_field(h, grid, np.random.default_rng(0))
    before = factor_cache_stats().hits
    generate_field(h.shifted_mean(0.5), grid, np.random.default_rng(1))
    assert factor_cache_stats().hits == before + 1


def test_json_encodes_infinity_and_numpy(tmp_path):
    path = write_json(tmp_path / "a.json", {"eps": float("inf"), "n": np.int64(3), "v": np.arange(2)})
    assert read_json(path) == {"eps": "inf", "n": 3, "v": [0, 1]}
    assert path.read_text().endswith("\n")


def test_csv_keeps_full_precision(tmp_path):
    path = write_csv(tmp_path / "x.csv", pd.DataFrame({"x": [0.1 + 0.2]}))
    assert pd.read_csv(path)["x"].iloc[0] == 0.1 + 0.2


def test_manifest_lists_files_with_checksums(tmp_path):
    write_csv(tmp_path / "sub" / "x.csv", pd.DataFrame({"x": [1.0]}))
    write_json(tmp_path / "ledger.json", {"forward_runs": 3})
    manifest = json.loads(write_manifest(tmp_path, {"seed": 1}).read_text())
    paths = [f["path"] for f in manifest["files"]]
    assert paths == ["ledger.json", "sub/x.csv"]
    assert manifest["files"][1]["sha256"] == hash_file(tmp_path / "sub" / "x.csv")
    assert manifest["seed"] == 1


def test_set_level_reaches_every_configured_logger():
    logger = setup_logger("src.test_handlers")
    set_level("ERROR")
    assert logger.level == logging.ERROR
    set_level("WARNING")
    assert len(setup_logger("src.test_handlers").handlers) == 1
