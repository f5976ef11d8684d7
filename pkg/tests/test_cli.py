"""End-to-end tests for the zcover command line runner."""

import json

import pytest

from zcover.cli import EXIT_CONFIG, EXIT_MODE, main, parse_config


def run(tmp_path, sub, config_text, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(config_text)
    out = tmp_path / "out"
    return main([sub, str(cfg), "--out-dir", str(out), *extra]), out


ORBIT_CFG = """\
[inputs]
iet = 4; 0.2 0.3 0.1 0.4; 3 1 4 2
x0 = 0.1
[params]
steps = 5
"""


def test_parse_config_lines():
    sections = parse_config("# comment\n[inputs]\nx0 = 0.1\n")
    assert sections["inputs"]["x0"] == ("0.1", 3)
    with pytest.raises(Exception):
        parse_config("[inputs]\nno equals sign here\n")


def test_iet_orbit_outputs(tmp_path):
    code, out = run(tmp_path, "iet-orbit", ORBIT_CFG)
    assert code == 0
    lines = (out / "iet-orbit.csv").read_text().splitlines()
    assert lines[0] == "n,x"
    assert len(lines) == 7
    assert lines[1].startswith("0,")
    summary = json.loads((out / "iet-orbit.json").read_text())
    assert summary["metrics"]["steps"] == 5
    assert summary["config_echo"]["inputs"]["x0"] == "0.1"
    assert (out / "iet-orbit.plt").exists()


def test_csv_is_deterministic(tmp_path):
    _, out1 = run(tmp_path / "a", "iet-orbit", ORBIT_CFG, "--seed", "7")
    _, out2 = run(tmp_path / "b", "iet-orbit", ORBIT_CFG, "--seed", "7")
    assert (out1 / "iet-orbit.csv").read_bytes() == (out2 / "iet-orbit.csv").read_bytes()
    j1 = json.loads((out1 / "iet-orbit.json").read_text())
    j2 = json.loads((out2 / "iet-orbit.json").read_text())
    j1.pop("runtime_ms"), j2.pop("runtime_ms")
    assert j1 == j2


def test_random_point_respects_seed(tmp_path):
    cfg = ORBIT_CFG.replace("x0 = 0.1", "x0 = random")
    _, out1 = run(tmp_path / "a", "iet-orbit", cfg, "--seed", "3")
    _, out2 = run(tmp_path / "b", "iet-orbit", cfg, "--seed", "3")
    _, out3 = run(tmp_path / "c", "iet-orbit", cfg, "--seed", "4")
    r1 = (out1 / "iet-orbit.csv").read_text()
    assert r1 == (out2 / "iet-orbit.csv").read_text()
    assert r1 != (out3 / "iet-orbit.csv").read_text()


def test_missing_field_is_config_error(tmp_path):
    code, _ = run(tmp_path, "iet-orbit", "[params]\nsteps = 5\n")
    assert code == EXIT_CONFIG


def test_malformed_line_is_config_error(tmp_path):
    code, _ = run(tmp_path, "iet-orbit", "[inputs]\nbroken line\n")
    assert code == EXIT_CONFIG


def test_exact_mode_rejects_decimal_lengths(tmp_path):
    code, _ = run(tmp_path, "iet-orbit", ORBIT_CFG, "--mode", "exact")
    assert code == EXIT_MODE


def test_keane_certified_collision(tmp_path):
    cfg = """\
[inputs]
iet = 4; 1/4 1/4 1/4 1/4; 4 3 2 1
[params]
depth = 10
certify = true
"""
    code, out = run(tmp_path, "keane", cfg, "--mode", "exact")
    assert code == 0
    summary = json.loads((out / "keane.json").read_text())
    assert "COLLISION" in summary["flags"]
    assert summary["metrics"]["n"] == 1


def test_keane_certify_needs_exact_mode(tmp_path):
    cfg = "[inputs]\niet = 2; 0.4 0.6; 2 1\n[params]\ncertify = true\n"
    code, _ = run(tmp_path, "keane", cfg)
    assert code == EXIT_MODE


def test_suspend_writes_dump(tmp_path):
    cfg = """\
[inputs]
iet = 4; 1/5 3/10 1/10 2/5; 3 1 4 2
roof = 1
"""
    code, out = run(tmp_path, "suspend", cfg, "--mode", "exact")
    assert code == 0
    summary = json.loads((out / "suspend.json").read_text())
    assert summary["metrics"]["genus"] == 2
    assert (out / "suspend.txt").read_text().startswith("roof 1")


def test_dimension_grid_syntax(tmp_path):
    cfg = """\
[inputs]
track = figure-eight
[params]
L = 4:12:4
"""
    code, out = run(tmp_path, "dimension", cfg)
    assert code == 0
    lines = (out / "dimension.csv").read_text().splitlines()
    assert lines[0] == "L,N,estimate"
    assert len(lines) == 4
    summary = json.loads((out / "dimension.json").read_text())
    assert summary["metrics"]["growth_exponent"] == pytest.approx(0.693, abs=0.01)


def test_unknown_track_kind(tmp_path):
    cfg = "[inputs]\ntrack = moebius\n[params]\nL = 4\n"
    code, _ = run(tmp_path, "routes", cfg)
    assert code == EXIT_CONFIG


def test_delta_spectrum_runs(tmp_path):
    cfg = "[params]\nR = 2\n"
    code, out = run(tmp_path, "delta-spectrum", cfg)
    assert code == 0
    lines = (out / "delta-spectrum.csv").read_text().splitlines()
    assert lines[0] == "r,word,phi"
    assert len(lines) > 1


def test_qm_csv_header(tmp_path):
    cfg = """\
[inputs]
x = axis-inv a1
[params]
t = 0,1
R = 2
kernel = true
"""
    code, out = run(tmp_path, "qm", cfg)
    assert code == 0
    lines = (out / "qm.csv").read_text().splitlines()
    assert lines[0] == "t,defect,flag"
    assert len(lines) == 3


def test_bad_frame_is_config_error(tmp_path):
    cfg = "[inputs]\nx = sideways 1 2\n[params]\nt = 0,1\nR = 1\n"
    code, _ = run(tmp_path, "qm", cfg)
    assert code == EXIT_CONFIG
