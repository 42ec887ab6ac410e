import csv
import json

import pytest

from pacrate.cli import build_parser, main
from pacrate.rate_profile import import_profile


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_construct_rm(tmp_path, capsys):
    out = tmp_path / "rm.profile"
    assert main(["construct", "--n", "128", "--k", "64", "--method", "rm", "--g", "0o177", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["phi"] == pytest.approx(73.81, abs=0.01)
    assert doc["method"] == "rm" and doc["generator"] == "0o177"
    assert "73.81" in capsys.readouterr().out


def test_construct_small(tmp_path):
    out = tmp_path / "p"
    assert main(["construct", "--n", "8", "--k", "4", "--method", "rm", "--g", "0o7", "--out", str(out)]) == 0
    assert import_profile(out).frozen == (1, 2, 3, 5)


def test_construct_ga(tmp_path):
    out = tmp_path / "ga.profile"
    assert main(["construct", "--n", "128", "--k", "64", "--method", "ga", "--snr", "2.5",
                 "--g", "0o1", "--out", str(out)]) == 0
    assert import_profile(out).meta["method"] == "ga"


def test_construct_invalid_k(tmp_path, capsys):
    out = tmp_path / "bad"
    assert main(["construct", "--n", "128", "--k", "129", "--out", str(out)]) != 0
    assert not out.exists()
    assert "--k" in capsys.readouterr().err


def test_unknown_flag_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["construct", "--n", "8", "--k", "4", "--out", str(tmp_path / "p"), "--bogus"])
    assert exc.value.code != 0
    with pytest.raises(SystemExit):
        main(["construct", "--n", "8", "--k", "4", "--ou", str(tmp_path / "p")])


def test_ncf_polar_u_level(tmp_path):
    prof = tmp_path / "polar.profile"
    main(["construct", "--n", "128", "--k", "64", "--g", "0o1", "--out", str(prof)])
    out = tmp_path / "u.csv"
    assert main(["ncf", "--profile", str(prof), "--level", "u", "--out", str(out)]) == 0
    assert {float(r["gamma"]) for r in read_csv(out)} <= {0.0, 1.0}


def test_ncf_x_level_summation_identity(tmp_path):
    from pacrate.codec import PacCode
    prof = tmp_path / "rm.profile"
    main(["construct", "--n", "64", "--k", "32", "--g", "0o133", "--out", str(prof)])
    out = tmp_path / "x.csv"
    assert main(["ncf", "--profile", str(prof), "--level", "x", "--out", str(out)]) == 0
    rows = read_csv(out)
    lhs = sum(float(r["gamma"]) * int(r["weight"]) for r in rows)
    p = import_profile(prof)
    G = PacCode(p, "0o133").G
    rhs = sum(int(G[j].sum()) for j in range(64) if p.indicator[j])
    assert lhs == pytest.approx(rhs)


def test_ncf_sorted_with_capacity(tmp_path):
    prof = tmp_path / "rm.profile"
    main(["construct", "--n", "128", "--k", "64", "--g", "0o177", "--out", str(prof)])
    out = tmp_path / "fig3.csv"
    assert main(["ncf", "--profile", str(prof), "--level", "u", "--sorted", "--bec-eps", "0.5",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert sum(float(r["capacity"]) for r in rows) == pytest.approx(64)
    gam = [float(r["gamma"]) for r in rows]
    assert gam == sorted(gam)


def test_ncf_missing_profile(tmp_path, capsys):
    assert main(["ncf", "--profile", str(tmp_path / "nope"), "--out", str(tmp_path / "o.csv")]) != 0
    assert "nope" in capsys.readouterr().err
    assert not (tmp_path / "o.csv").exists()


@pytest.mark.parametrize("m, phi", [(0, 73.81), (2, 82.21), (4, 83.61)])
def test_optimize_table_values(tmp_path, capsys, m, phi):
    out, trace = tmp_path / "opt.profile", tmp_path / "trace.csv"
    assert main(["optimize", "--n", "128", "--k", "64", "--g", "0o177", "--m", str(m),
                 "--out", str(out), "--trace", str(trace)]) == 0
    assert f"best phi = {phi:.2f}" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert doc["phi"] == pytest.approx(phi, abs=0.01)
    assert doc["method"] == "ncf-opt" and doc["m"] == m
    rows = read_csv(trace)
    assert max(float(r["phi"]) for r in rows) == pytest.approx(doc["phi"])
    if m == 0:
        rm = tmp_path / "rm.profile"
        main(["construct", "--n", "128", "--k", "64", "--g", "0o177", "--out", str(rm)])
        assert import_profile(out) == import_profile(rm)


def test_optimize_invalid_m(tmp_path):
    assert main(["optimize", "--n", "16", "--k", "4", "--g", "0o7", "--m", "5",
                 "--out", str(tmp_path / "o")]) != 0


def test_simulate_inline_deterministic(tmp_path):
    args = ["simulate", "--n", "64", "--k", "32", "--g", "0o133", "--channel", "bec",
            "--param", "0.3", "0.35", "--min-frame-errors", "10", "--max-frames", "2000", "--seed", "42"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--csv", str(a)]) == 0
    assert main(args + ["--csv", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_csv(a)) == 2


def test_simulate_config_file(tmp_path):
    cfg = {"base": {"n": 64, "k": 32, "g": "0o133", "min_frame_errors": 10, "max_frames": 2000},
           "points": [{"param": 0.3, "profile": "rm"}, {"param": 0.3, "profile": "ncf-opt", "m": 2}]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(path), "--csv", str(tmp_path / "r.csv")]) == 0
    assert [r["profile_method"] for r in read_csv(tmp_path / "r.csv")] == ["rm", "ncf-opt"]


def test_simulate_config_and_flags_conflict(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text("{}")
    assert main(["simulate", "--config", str(path), "--n", "64", "--csv", str(tmp_path / "r.csv")]) != 0
    assert "cannot be combined" in capsys.readouterr().err


def test_simulate_missing_config(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--csv", str(out)]) != 0
    assert "missing.json" in capsys.readouterr().err
    assert not out.exists()


def _subparsers():
    parser = build_parser()
    action = next(a for a in parser._actions if a.dest == "command")
    return action.choices


@pytest.mark.parametrize("name", ["construct", "ncf", "optimize", "simulate"])
def test_help_documents_every_flag(name):
    sub = _subparsers()[name]
    text = sub.format_help()
    for action in sub._actions:
        for opt in action.option_strings:
            assert opt in text
        if action.option_strings and action.dest != "help":
            assert action.help
