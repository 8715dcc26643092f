import json

import numpy as np
import pytest

from clband.cache import PhysicsCache, cache_physics
from clband.config import GRID_PLANS, RunConfig, load_config, save_config
from clband.errors import ConfigError


def test_default_config_round_trip(tmp_path):
    cfg = RunConfig()
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    again = load_config(path)
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


def test_hash_sensitive_to_physics(tmp_path):
    cfg = RunConfig()
    doc = cfg.to_dict()
    doc["fiber"]["nonlinear_gamma_w_km"] = 1.4
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    changed = load_config(path)
    assert changed.config_hash() != cfg.config_hash()


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"fiber": {"bogus": 1}}))
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text(json.dumps({"not_a_section": {}}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_bad_json_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(path)


def test_grid_plan_override():
    cfg = RunConfig().with_grid_plan("cl-8")
    grid = cfg.grid.build()
    assert grid.n_channels == 16
    with pytest.raises(ConfigError):
        RunConfig().with_grid_plan("cl-99").grid.build()
    assert "cl-64" in GRID_PLANS


def test_cache_round_trip(tmp_path):
    cache = PhysicsCache(str(tmp_path))
    arrays = {"eta": np.arange(8.0), "p_ase": np.full(8, 1e-7)}
    cache.put("k1", arrays)
    back = cache.get("k1")
    np.testing.assert_array_equal(back["eta"], arrays["eta"])
    np.testing.assert_array_equal(back["p_ase"], arrays["p_ase"])


def test_cache_corruption_detected(tmp_path):
    cache = PhysicsCache(str(tmp_path))
    cache.put("k1", {"x": np.ones(4)})
    victim = tmp_path / "k1.npz"
    data = bytearray(victim.read_bytes())
    data[len(data) // 2] ^= 0xFF
    victim.write_bytes(bytes(data))
    assert cache.get("k1") is None  # silently recomputes


def test_cache_disabled_is_noop(tmp_path):
    cache = PhysicsCache(str(tmp_path), enabled=False)
    cache.put("k1", {"x": np.ones(4)})
    assert cache.get("k1") is None


def test_cache_physics_warm_equals_cold(tmp_path):
    cache = PhysicsCache(str(tmp_path))
    calls = []

    def compute():
        calls.append(1)
        return {"eta": np.linspace(0, 1, 5), "gsnr": np.full(5, 20.0)}

    cold = cache_physics(cache, "h", 10, compute)
    warm = cache_physics(cache, "h", 10, compute)
    assert len(calls) == 1
    np.testing.assert_array_equal(cold["eta"], warm["eta"])
    np.testing.assert_array_equal(cold["gsnr"], warm["gsnr"])
    # different span count is a different entry
    cache_physics(cache, "h", 11, compute)
    assert len(calls) == 2


def test_cache_physics_without_cache():
    out = cache_physics(None, "h", 1, lambda: {"x": np.zeros(2)})
    np.testing.assert_array_equal(out["x"], np.zeros(2))
