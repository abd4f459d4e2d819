import json
from pathlib import Path

import pytest

from tacsim.harness import (SEED_ENV, SweepConfig, load_manifest, resolve_seed, run_sweep, summarize,
                            summary_csv, verify_manifest)
from tacsim.pullsim import ActuatorModel


def _config(tmp_path, **kw):
    base = {"objects": ["long_shaft"], "grip_forces": [40.0], "repetitions": 1, "seed": 7}
    base.update(kw)
    return SweepConfig.from_dict(base, output_dir=str(tmp_path))


def _tree_bytes(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_minimal_sweep(tmp_path, lut):
    res = run_sweep(_config(tmp_path), lut=lut)
    assert res["header"]["n_records"] == 1
    assert res["header"]["n_failed"] == 0
    assert "output_dir" not in res["header"]["config"]
    assert len(list((tmp_path / "images").iterdir())) == 2
    assert len(list((tmp_path / "traces").iterdir())) == 1
    rec = res["entries"][0]
    assert rec["record_id"] == "long_shaft-00-000"
    assert 0 < rec["f_pull_max"] <= 2 * rec["mu_used"] * 40.0
    lines = (tmp_path / "manifest.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["type"] == "header"
    assert verify_manifest(load_manifest(tmp_path / "manifest.jsonl")) == []


def test_failure_isolated(tmp_path, lut):
    tiny = {"name": "tiny", "shape": {"type": "sphere", "radius": 0.5}, "mu_sim": 0.2, "c": 1.0}
    res = run_sweep(_config(tmp_path, objects=[tiny, "gear"], repetitions=2), lut=lut)
    kinds = [(e["object"], e["type"]) for e in res["entries"]]
    assert kinds == [("tiny", "failed")] * 2 + [("gear", "record")] * 2
    assert "volume" in res["entries"][0]["error"]
    assert res["header"]["n_failed"] == 2
    assert verify_manifest(load_manifest(res["path"])) == []


def test_rerun_is_byte_identical(tmp_path, lut):
    kw = {"objects": ["ball_bearing", "gear"], "grip_forces": [20.0, 60.0], "repetitions": 2}
    run_sweep(_config(tmp_path / "a", **kw), lut=lut)
    run_sweep(_config(tmp_path / "b", **kw), lut=lut)
    run_sweep(_config(tmp_path / "c", **kw), jobs=2, lut=lut)
    a = _tree_bytes(tmp_path / "a")
    assert a == _tree_bytes(tmp_path / "b")
    assert a == _tree_bytes(tmp_path / "c")
    run_sweep(_config(tmp_path / "d", seed=8, **kw), lut=lut)
    assert _tree_bytes(tmp_path / "d")["manifest.jsonl"] != a["manifest.jsonl"]


def test_verify_detects_tampering(tmp_path, lut):
    res = run_sweep(_config(tmp_path), lut=lut)
    trace = tmp_path / res["entries"][0]["trace"]
    trace.write_text(trace.read_text() + "0,0,0,0\n")
    assert verify_manifest(load_manifest(res["path"])) == [("long_shaft-00-000", "trace")]


def test_summarize_without_jitter(tmp_path, lut):
    cfg = _config(tmp_path, repetitions=4, friction_jitter=0.0, actuator={"noise_sigma": 0.0})
    rows = summarize(run_sweep(cfg, lut=lut))
    assert len(rows) == 1
    assert rows[0]["n"] == 4
    assert rows[0]["rms"] == 0.0
    text = summary_csv(rows)
    assert text.splitlines()[0] == "object,grip_force,n,mean,rms"
    assert text.splitlines()[1].startswith("long_shaft,40,4,")


def test_summarize_jitter_spread(tmp_path, lut):
    rows = summarize(run_sweep(_config(tmp_path, repetitions=30), lut=lut))
    assert 0.005 <= rows[0]["rms"] / rows[0]["mean"] <= 0.05


def test_corrected_mu_used(tmp_path, lut):
    fits = {"long_shaft": {"a": 1.05, "b": -3.20}}
    res = run_sweep(_config(tmp_path, ratio_fits=fits, friction_jitter=0.0), lut=lut)
    assert res["entries"][0]["mu_used"] == pytest.approx(0.16296, rel=1e-12)


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        _config(tmp_path, grip_forces=[100.0])
    with pytest.raises(ValueError):
        _config(tmp_path, repetitions=0)
    with pytest.raises(ValueError):
        _config(tmp_path, objects=["gear", "gear"])
    assert isinstance(_config(tmp_path, actuator={"tau": 0.1}).actuator, ActuatorModel)


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed(None, 5) == 5
    assert resolve_seed(None, None) == 0
    monkeypatch.setenv(SEED_ENV, "11")
    assert resolve_seed(None, 5) == 11
    assert resolve_seed(3, 5) == 3
