import json

import numpy as np
import pytest

from pacrate.channels import frame_rng
from pacrate.sim import (
    CSV_COLUMNS,
    SimConfig,
    build_code,
    load_configs,
    read_results_csv,
    run_point,
    run_sweep,
    write_results_csv,
)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(min_frame_errors=0)
    with pytest.raises(ValueError):
        SimConfig(max_frames=0)
    with pytest.raises(ValueError):
        SimConfig(channel="rayleigh")
    with pytest.raises(ValueError):
        SimConfig(g="0o8")
    with pytest.raises(ValueError):
        SimConfig.from_dict({"bogus": 1})
    assert SimConfig(crc=True, rate="info").code_rate() == 56 / 128
    assert SimConfig(rate=0.25).code_rate() == 0.25


def test_build_code_profiles(tmp_path):
    assert build_code(SimConfig(profile="ncf-opt", m=4)).phi == pytest.approx(83.61, abs=0.01)
    assert build_code(SimConfig(profile="rm")).phi == pytest.approx(73.81, abs=0.01)
    ga = build_code(SimConfig(profile="ga", channel="awgn", param=2.5, g="0o1"))
    assert ga.profile.meta["method"] == "ga"
    with pytest.raises(ValueError):
        build_code(SimConfig(profile="ga", channel="bec"))
    with pytest.raises(FileNotFoundError):
        build_code(SimConfig(profile=str(tmp_path / "missing.profile")))


def test_noiseless_point():
    r = run_point(SimConfig(param=0.0, max_frames=500))
    assert r.frames == 500 and r.frame_errors == 0 and r.fer == 0.0


def test_all_erased_point():
    r = run_point(SimConfig(n=32, k=16, param=1.0, min_frame_errors=200, max_frames=200))
    assert r.frames == 200
    # decoding all-zero LLRs yields one fixed guess; only a matching payload survives
    assert r.fer >= 0.99


def test_stopping_rule():
    r = run_point(SimConfig(param=0.35, min_frame_errors=37, max_frames=10**6))
    assert r.frame_errors == 37
    r2 = run_point(SimConfig(param=0.35, min_frame_errors=37, max_frames=10**6), batch_size=13)
    assert (r2.frames, r2.frame_errors) == (r.frames, r.frame_errors)


def test_thread_count_invariance():
    cfg = SimConfig(param=0.3, min_frame_errors=50, max_frames=20_000, seed=9)
    one = run_point(cfg, threads=1)
    many = run_point(cfg, threads=4)
    assert (one.frames, one.frame_errors) == (many.frames, many.frame_errors)
    cfg = SimConfig(n=64, k=32, g="0o133", crc=True, channel="awgn", param=1.5,
                    decoder="scl", list_size=4, min_frame_errors=20, max_frames=3000, seed=3)
    assert run_point(cfg, threads=1).frames == run_point(cfg, threads=3).frames


def test_payloads_uniform():
    bits = np.concatenate([frame_rng(0, f).integers(0, 2, 64, dtype=np.uint8) for f in range(20_000)])
    ones = bits.sum()
    n = bits.size
    chi2 = (ones - n / 2) ** 2 / (n / 2) + ((n - ones) - n / 2) ** 2 / (n / 2)
    assert chi2 < 10.83  # p = 0.001 with one degree of freedom


def test_sweep_basics():
    cfg = SimConfig(param=0.3, min_frame_errors=20, max_frames=5000)
    [single] = run_sweep([cfg])
    direct = run_point(cfg)
    assert (single.frames, single.frame_errors) == (direct.frames, direct.frame_errors)
    a, b = run_sweep([cfg, cfg])
    assert (a.frames, a.frame_errors) == (b.frames, b.frame_errors)
    with pytest.raises(ValueError):
        run_sweep([])
    with pytest.raises(RuntimeError, match="sweep point 1"):
        run_sweep([cfg, SimConfig(profile="/nonexistent/file")])


def test_bec_sweep_monotone():
    fers = [run_point(SimConfig(profile="ncf-opt", m=4, param=e, min_frame_errors=100,
                                max_frames=10**5)).fer for e in (0.30, 0.25, 0.20)]
    assert fers[0] > fers[1] > fers[2]


def test_csv_roundtrip(tmp_path):
    write_results_csv([], tmp_path / "empty.csv")
    assert (tmp_path / "empty.csv").read_text().strip() == ",".join(CSV_COLUMNS)
    results = run_sweep([SimConfig(param=e, min_frame_errors=10, max_frames=2000, label="rm")
                         for e in (0.3, 0.25)])
    write_results_csv(results, tmp_path / "r.csv")
    rows = read_results_csv(tmp_path / "r.csv")
    assert len(rows) == 2
    for row, res in zip(rows, results):
        assert row["channel_param"] == res.config.param
        assert row["frames"] == res.frames
        assert row["frame_errors"] == res.frame_errors
        assert row["fer"] == res.fer
        assert row["phi"] == res.metadata["phi"]
        assert row["profile_method"] == "rm"


def test_load_configs(tmp_path):
    doc = {"base": {"n": 128, "k": 64, "profile": "rm"},
           "points": [{"param": 0.2}, {"param": 0.3, "profile": "ncf-opt", "m": 4}]}
    (tmp_path / "c.json").write_text(json.dumps(doc))
    cfgs = load_configs(tmp_path / "c.json")
    assert [c.param for c in cfgs] == [0.2, 0.3]
    assert cfgs[1].profile == "ncf-opt"
    (tmp_path / "d.json").write_text(json.dumps({"param": 0.1}))
    assert load_configs(tmp_path / "d.json")[0].param == 0.1
    with pytest.raises(FileNotFoundError, match="nope.json"):
        load_configs(tmp_path / "nope.json")


def test_undetected_errors_tracked():
    cfg = SimConfig(n=64, k=32, g="0o133", crc=True, channel="awgn", param=0.0,
                    decoder="scl", list_size=4, min_frame_errors=30, max_frames=5000)
    r = run_point(cfg)
    assert 0 <= r.metadata["undetected_errors"] <= r.frame_errors
    assert "0xa6" in r.metadata["crc_convention"].lower()
