import json
import os

import pytest

from clband.cli import dispatch

SMALL_CONFIG = {
    "grid": {"plan": "cl-8"},
    "optimizer": {"particles": 8, "iterations": 15},
    "simulation": {
        "otl_grid": [60.0, 120.0],
        "replications": 2,
        "n_demands": 400,
    },
}


@pytest.fixture()
def small_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMALL_CONFIG))
    return str(path)


def run(args):
    return dispatch(args)


def test_gsnr_profile_csv(tmp_path, small_config):
    out_dir = str(tmp_path / "out")
    rc = run(["--config", small_config, "--out-dir", out_dir, "gsnr-profile", "--figure"])
    assert rc == 0
    lines = open(os.path.join(out_dir, "profile.csv")).read().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "channel_index,center_THz,band,p_rx_dBm,eta_per_W2,p_ase_dBm"
    assert len(lines) == 2 + 16
    assert os.path.exists(os.path.join(out_dir, "profile.png"))


def test_optimize_power_byte_identical(tmp_path, small_config):
    d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
    for d in (d1, d2):
        rc = run(["--config", small_config, "--out-dir", d, "optimize-power", "--seed", "7"])
        assert rc == 0
    a = open(os.path.join(d1, "mrd_table.json"), "rb").read()
    b = open(os.path.join(d2, "mrd_table.json"), "rb").read()
    assert a == b
    doc = json.loads(a)
    assert doc["seed"] == 7
    assert "config_hash" in doc and "artifact_version" in doc
    assert len(doc["per_format"]) == 6


def test_mrd_table_at_power(tmp_path, small_config):
    out = str(tmp_path / "out")
    rc = run(["--config", small_config, "--out-dir", out, "mrd-table", "--power", "-0.15"])
    assert rc == 0
    doc = json.loads(open(os.path.join(out, "mrd_table.json")).read())
    reaches = [e["reach_spans"] for e in doc["per_format"]]
    assert all(a >= b for a, b in zip(reaches, reaches[1:]))


def test_simulate_and_report_roundtrip(tmp_path):
    # the ELF advantage needs the full comb's ISRS tilt, so run on cl-64
    cfg = dict(SMALL_CONFIG)
    cfg["grid"] = {"plan": "cl-64"}
    cfg["simulation"] = {
        "otl_grid": [120.0, 400.0],
        "replications": 2,
        "n_demands": 500,
    }
    config = tmp_path / "config.json"
    config.write_text(json.dumps(cfg))
    out = str(tmp_path / "out")
    rc = run(["--config", str(config), "--out-dir", out, "optimize-power"])
    assert rc == 0
    mrd = os.path.join(out, "mrd_table.json")
    rc = run([
        "--config", str(config), "--out-dir", out,
        "simulate", "--mrd-table", mrd, "--out", "report.json",
    ])
    assert rc == 0
    rc = run([
        "--config", str(config), "--out-dir", out,
        "report", "--in", os.path.join(out, "report.json"),
    ])
    assert rc == 0
    lines = open(os.path.join(out, "report.csv")).read().splitlines()
    assert lines[0] == "otl,policy,bbp,bbp_ci,mean_gsnr_db,gsnr_ci"
    rows = [dict(zip(lines[0].split(","), l.split(","))) for l in lines[1:]]
    by_key = {(r["otl"], r["policy"]): r for r in rows}
    for otl in ("120.0", "400.0"):
        eff = float(by_key[(otl, "eff")]["mean_gsnr_db"])
        elf = float(by_key[(otl, "elf")]["mean_gsnr_db"])
        assert elf > eff
    assert os.path.exists(os.path.join(out, "report.png"))


def test_missing_topology_fails_without_output(tmp_path, small_config):
    out = str(tmp_path / "out")
    rc = run([
        "--config", small_config, "--out-dir", out,
        "simulate", "--mrd-table", "also-missing.json",
        "--topology", str(tmp_path / "missing.json"),
    ])
    assert rc != 0
    assert not os.path.exists(os.path.join(out, "report.json"))


def test_unknown_option_fails():
    assert run(["gsnr-profile", "--frobnicate"]) != 0


def test_unreadable_config_fails(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run(["--config", str(bad), "gsnr-profile"]) != 0


def test_warm_cache_equals_cold_run(tmp_path, small_config):
    out = str(tmp_path / "out")
    run(["--config", small_config, "--out-dir", out, "optimize-power", "--seed", "3"])
    cold = open(os.path.join(out, "mrd_table.json"), "rb").read()
    assert os.path.isdir(os.path.join(out, ".clband-cache"))
    run(["--config", small_config, "--out-dir", out, "optimize-power", "--seed", "3"])
    warm = open(os.path.join(out, "mrd_table.json"), "rb").read()
    assert warm == cold


def test_cache_disabled_results_unchanged(tmp_path, small_config):
    cfg = dict(SMALL_CONFIG)
    cfg["cache_enabled"] = False
    nocache_cfg = tmp_path / "nocache.json"
    nocache_cfg.write_text(json.dumps(cfg))
    d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
    run(["--config", small_config, "--out-dir", d1, "optimize-power", "--seed", "3"])
    run(["--config", str(nocache_cfg), "--out-dir", d2, "optimize-power", "--seed", "3"])
    a = open(os.path.join(d1, "mrd_table.json"), "rb").read()
    b = open(os.path.join(d2, "mrd_table.json"), "rb").read()
    assert a == b
    assert not os.path.isdir(os.path.join(d2, ".clband-cache"))


def test_env_var_output_dir(tmp_path, small_config, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("CLBAND_OUT_DIR", str(target))
    rc = run(["--config", small_config, "gsnr-profile"])
    assert rc == 0
    assert (target / "profile.csv").exists()


def test_help_exits_cleanly():
    assert run(["--help"]) == 0
